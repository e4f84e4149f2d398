"""Selects the trajectory kernel backend at import time.

The compiled extension is used when importable; otherwise the pure-numpy
implementations take over.  Set ``QMSKIT_BACKEND=python`` or
``QMSKIT_BACKEND=compiled`` to force a choice (forcing ``compiled`` raises
if the extension is unavailable).
"""

import os

from . import _kernels_py

_requested = os.environ.get("QMSKIT_BACKEND", "auto").lower()
if _requested not in ("auto", "compiled", "python"):
    raise ValueError(
        f"QMSKIT_BACKEND must be 'auto', 'compiled' or 'python', got {_requested!r}"
    )

if _requested == "python":
    kernels = _kernels_py
    BACKEND = "python"
else:
    try:
        from . import _kernels as kernels  # type: ignore[no-redef]

        BACKEND = "compiled"
    except ImportError:
        if _requested == "compiled":
            raise
        kernels = _kernels_py
        BACKEND = "python"


def backend_name() -> str:
    """Which kernel implementation is active: 'compiled' or 'python'."""
    return BACKEND
