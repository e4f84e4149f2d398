"""Dense complex linear-algebra kernels.

Everything in here operates on plain ``numpy`` arrays of ``complex128``.
The vectorization convention used throughout the package is column
stacking, ``vec(A X B) = (B^T (x) A) vec(X)``.
"""

from __future__ import annotations

from dataclasses import dataclass
import math

import numpy as np
import scipy.linalg

from .errors import (
    DimensionMismatch,
    NotCommuting,
    NotHermitian,
    NotNormal,
)

__all__ = [
    "Tolerance",
    "DEFAULT_TOL",
    "as_matrix",
    "frob",
    "vec",
    "unvec",
    "herm_eig",
    "matrix_exp",
    "numerical_rank",
    "null_space",
    "simultaneous_diagonalize",
]


@dataclass(frozen=True)
class Tolerance:
    """Absolute/relative tolerance pair used by every epsilon test.

    ``bound(scale)`` gives the admissible residual for a quantity whose
    natural magnitude is ``scale``.
    """

    abs_tol: float = 1e-9
    rel_tol: float = 1e-12

    def __post_init__(self):
        if not (math.isfinite(self.abs_tol) and math.isfinite(self.rel_tol)):
            raise ValueError("tolerances must be finite")
        if self.abs_tol < 0 or self.rel_tol < 0:
            raise ValueError("tolerances must be nonnegative")
        if self.abs_tol == 0 and self.rel_tol == 0:
            raise ValueError("at least one tolerance must be positive")

    def bound(self, scale: float = 1.0) -> float:
        return self.abs_tol + self.rel_tol * abs(scale)


DEFAULT_TOL = Tolerance()


def as_matrix(a, name: str = "matrix") -> np.ndarray:
    """Coerce to a 2-d complex array, rejecting NaN/Inf entries."""
    arr = np.asarray(a, dtype=complex)
    if arr.ndim != 2:
        raise DimensionMismatch(f"{name} must be 2-dimensional, got shape {arr.shape}")
    if not np.all(np.isfinite(arr.real)) or not np.all(np.isfinite(arr.imag)):
        raise ValueError(f"{name} contains non-finite entries")
    return arr


def _square(a, name: str = "matrix") -> np.ndarray:
    arr = as_matrix(a, name)
    if arr.shape[0] != arr.shape[1]:
        raise DimensionMismatch(f"{name} must be square, got shape {arr.shape}")
    return arr


def frob(a) -> float:
    """Frobenius norm."""
    return float(np.linalg.norm(a))


def vec(a: np.ndarray) -> np.ndarray:
    """Column-stacking vectorization: ``vec(A)[i + N*j] = A[i, j]``."""
    return np.asarray(a).reshape(-1, order="F")


def unvec(v: np.ndarray, shape=None) -> np.ndarray:
    """Inverse of :func:`vec`; assumes a square target when ``shape`` is None."""
    v = np.asarray(v).reshape(-1)
    if shape is None:
        n = int(round(math.sqrt(v.size)))
        if n * n != v.size:
            raise DimensionMismatch(f"cannot unvec length {v.size} into a square matrix")
        shape = (n, n)
    return v.reshape(shape, order="F")


def herm_eig(a, tol: Tolerance = DEFAULT_TOL):
    """Eigendecomposition of a Hermitian matrix.

    Parameters
    ----------
    a : array_like
        Square matrix with ``||a - a^dag||_F`` within tolerance.
    tol : Tolerance
        Bound for the Hermiticity residual.

    Returns
    -------
    (eigenvalues, u) : (ndarray, ndarray)
        Real eigenvalues in ascending order and the unitary whose columns
        are the corresponding eigenvectors, ``a = u @ diag(w) @ u^dag``.
    """
    a = _square(a)
    resid = frob(a - a.conj().T)
    if resid > tol.bound(frob(a)):
        raise NotHermitian(f"Hermiticity residual {resid:.3e} exceeds tolerance")
    w, u = np.linalg.eigh(a)
    return w, u


def matrix_exp(a) -> np.ndarray:
    """Matrix exponential via scaling-and-squaring (scipy's Pade scheme)."""
    a = _square(a)
    if a.shape[0] == 0:
        return np.zeros((0, 0), dtype=complex)
    return np.asarray(scipy.linalg.expm(a), dtype=complex)


def numerical_rank(vectors, tol: Tolerance = DEFAULT_TOL) -> int:
    """Rank of the matrix whose rows are the given flattened vectors.

    Singular values above ``tol.abs_tol + tol.rel_tol * sigma_max`` are
    counted, so the result is invariant under row permutations and
    nonzero row rescalings.
    """
    rows = [np.asarray(v, dtype=complex).reshape(-1) for v in vectors]
    if not rows:
        return 0
    length = rows[0].size
    if any(r.size != length for r in rows):
        raise DimensionMismatch("all vectors must have the same length")
    m = np.vstack(rows)
    s = np.linalg.svd(m, compute_uv=False)
    if s.size == 0:
        return 0
    cut = tol.abs_tol + tol.rel_tol * float(s[0])
    return int(np.count_nonzero(s > cut))


def null_space(m, tol: Tolerance = DEFAULT_TOL) -> list[np.ndarray]:
    """Orthonormal basis of the numerical kernel of ``m``.

    Returns the right singular vectors whose singular values fall at or
    below ``tol.abs_tol + tol.rel_tol * sigma_max``; empty list when the
    matrix is injective at that tolerance.
    """
    m = as_matrix(m)
    if m.size == 0:
        n = m.shape[1]
        return [e for e in np.eye(n, dtype=complex)]
    _, s, vh = np.linalg.svd(m)
    cut = tol.abs_tol + tol.rel_tol * float(s[0]) if s.size else tol.abs_tol
    ncols = m.shape[1]
    small = [i for i in range(ncols) if i >= s.size or s[i] <= cut]
    return [vh[i].conj() for i in small]


def _fix_column_phases(u: np.ndarray) -> np.ndarray:
    """Rotate each column so its largest-magnitude entry is real positive."""
    u = u.copy()
    for j in range(u.shape[1]):
        col = u[:, j]
        k = int(np.argmax(np.abs(col)))
        pivot = col[k]
        if abs(pivot) > 0:
            u[:, j] = col * (pivot.conjugate() / abs(pivot))
    return u


def simultaneous_diagonalize(family, tol: Tolerance = DEFAULT_TOL, attempts: int = 3):
    """Common eigenbasis of a commuting family of normal matrices.

    A random real-coefficient Hermitian combination of the matrices'
    Hermitian and anti-Hermitian parts is diagonalized, then every family
    member is verified to be diagonal in the resulting basis; fresh
    coefficients are drawn on failure, up to ``attempts`` times.

    Returns
    -------
    (u, diagonals) : (ndarray, list[ndarray])
        Unitary ``u`` and the diagonals ``diag(u^dag A_j u)``.  Columns are
        ordered lexicographically by the diagonal tuples (real part first,
        then imaginary part, in family order), so the output is
        deterministic up to degenerate joint eigenspaces.

    Raises
    ------
    NotNormal, NotCommuting, NotSimultaneouslyDiagonalizable
    """
    from .errors import NotSimultaneouslyDiagonalizable

    mats = [_square(a, f"family[{j}]") for j, a in enumerate(family)]
    if not mats:
        raise ValueError("family must contain at least one matrix")
    n = mats[0].shape[0]
    for a in mats:
        if a.shape[0] != n:
            raise DimensionMismatch("family members must share one dimension")

    for j, a in enumerate(mats):
        resid = frob(a @ a.conj().T - a.conj().T @ a)
        if resid > tol.bound(frob(a) ** 2):
            raise NotNormal(f"family[{j}] is not normal (residual {resid:.3e})")
    for i in range(len(mats)):
        for j in range(i + 1, len(mats)):
            resid = frob(mats[i] @ mats[j] - mats[j] @ mats[i])
            if resid > tol.bound(frob(mats[i]) * frob(mats[j])):
                raise NotCommuting(
                    f"family[{i}] and family[{j}] do not commute (residual {resid:.3e})"
                )

    rng = np.random.default_rng(0x5EED)
    for _ in range(attempts):
        combo = np.zeros((n, n), dtype=complex)
        for a in mats:
            c_re, c_im = rng.normal(size=2)
            combo += c_re * (a + a.conj().T) / 2
            combo += c_im * (a - a.conj().T) / 2j
        _, u = np.linalg.eigh(combo)
        diags = []
        ok = True
        for a in mats:
            d = u.conj().T @ a @ u
            off = d - np.diag(np.diag(d))
            if frob(off) > tol.bound(max(frob(a), 1.0)):
                ok = False
                break
            diags.append(np.diag(d).copy())
        if not ok:
            continue
        # Deterministic column order: lexicographic in the joint diagonals.
        keys = []
        for d in reversed(diags):
            keys.append(d.imag)
            keys.append(d.real)
        order = np.lexsort(tuple(keys))
        u = _fix_column_phases(u[:, order])
        diags = [np.diag(u.conj().T @ a @ u).copy() for a in mats]
        return u, diags

    raise NotSimultaneouslyDiagonalizable(
        "no common eigenbasis found after "
        f"{attempts} attempts (degeneracy resolution failed)"
    )
