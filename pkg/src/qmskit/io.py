"""JSON model files.

Complex scalars serialize as two-element ``[re, im]`` arrays (bare reals
are accepted on input), matrices as row-major nested lists.  A model file
carries an explicit ``dim`` so ragged input fails fast:

    {
      "dim": 2,
      "channels": [ [[..], [..]], ... ],      # coupling operators L_k
      "hamiltonian": [[..], [..]],
      "scattering": [[..], ..],               # optional, (d*N) x (d*N)
      "classical": {                           # optional
        "jumps": [ {"matrix": [[..]], "rate": 1.0}, ... ],
        "diffusions": [ {"matrix": [[..]]}, ... ],
        "hamiltonian": [[..]]                  # optional, defaults to 0
      }
    }
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .dilation import ClassicalModel, DiffusionChannel, JumpChannel
from .errors import QmsError
from .model import SlhTriple

__all__ = [
    "ModelFormatError",
    "ModelFile",
    "load_model",
    "parse_model",
    "model_to_dict",
    "triple_to_dict",
    "save_model",
    "matrix_to_json",
    "matrix_from_json",
    "load_state",
]


class ModelFormatError(QmsError):
    """The JSON document does not follow the model schema."""


def _complex_from_json(x, where: str) -> complex:
    if isinstance(x, (int, float)):
        return complex(x)
    if isinstance(x, list) and len(x) == 2 and all(
        isinstance(p, (int, float)) for p in x
    ):
        return complex(x[0], x[1])
    raise ModelFormatError(f"{where}: expected a number or [re, im] pair, got {x!r}")


def matrix_from_json(rows, where: str, shape=None) -> np.ndarray:
    if not isinstance(rows, list) or not rows or not all(
        isinstance(r, list) for r in rows
    ):
        raise ModelFormatError(f"{where}: expected a nested list of rows")
    ncols = len(rows[0])
    if any(len(r) != ncols for r in rows):
        raise ModelFormatError(f"{where}: ragged rows")
    out = np.empty((len(rows), ncols), dtype=complex)
    for i, row in enumerate(rows):
        for j, entry in enumerate(row):
            out[i, j] = _complex_from_json(entry, f"{where}[{i}][{j}]")
    if shape is not None and out.shape != shape:
        raise ModelFormatError(f"{where}: expected shape {shape}, got {out.shape}")
    return out


def matrix_to_json(m: np.ndarray) -> list:
    m = np.asarray(m, dtype=complex)
    return [[[float(z.real), float(z.imag)] for z in row] for row in m]


@dataclass(frozen=True)
class ModelFile:
    dim: int
    channels: tuple
    hamiltonian: np.ndarray
    scattering: np.ndarray | None = None
    classical: ClassicalModel | None = None

    def to_triple(self) -> SlhTriple:
        return SlhTriple.from_parts(self.channels, self.hamiltonian, self.scattering)


def parse_model(doc) -> ModelFile:
    """Build a ModelFile from a decoded JSON document."""
    if not isinstance(doc, dict):
        raise ModelFormatError("top-level document must be an object")
    if "dim" not in doc or not isinstance(doc["dim"], int) or doc["dim"] < 1:
        raise ModelFormatError("'dim' must be a positive integer")
    n = doc["dim"]
    channels = doc.get("channels", [])
    if not isinstance(channels, list):
        raise ModelFormatError("'channels' must be a list of matrices")
    ls = tuple(
        matrix_from_json(ch, f"channels[{k}]", (n, n)) for k, ch in enumerate(channels)
    )
    if "hamiltonian" not in doc:
        raise ModelFormatError("'hamiltonian' is required")
    h = matrix_from_json(doc["hamiltonian"], "hamiltonian", (n, n))
    scattering = None
    if doc.get("scattering") is not None:
        d = len(ls)
        scattering = matrix_from_json(doc["scattering"], "scattering", (d * n, d * n))
    classical = None
    if doc.get("classical") is not None:
        classical = _parse_classical(doc["classical"], n)
    return ModelFile(n, ls, h, scattering, classical)


def _parse_classical(doc, n: int) -> ClassicalModel:
    if not isinstance(doc, dict):
        raise ModelFormatError("'classical' must be an object")
    jumps = []
    for i, entry in enumerate(doc.get("jumps", [])):
        if not isinstance(entry, dict) or "matrix" not in entry or "rate" not in entry:
            raise ModelFormatError(f"classical.jumps[{i}] needs 'matrix' and 'rate'")
        mat = matrix_from_json(entry["matrix"], f"classical.jumps[{i}].matrix", (n, n))
        if not isinstance(entry["rate"], (int, float)):
            raise ModelFormatError(f"classical.jumps[{i}].rate must be a number")
        jumps.append(JumpChannel(mat, float(entry["rate"])))
    diffusions = []
    for i, entry in enumerate(doc.get("diffusions", [])):
        if not isinstance(entry, dict) or "matrix" not in entry:
            raise ModelFormatError(f"classical.diffusions[{i}] needs 'matrix'")
        mat = matrix_from_json(
            entry["matrix"], f"classical.diffusions[{i}].matrix", (n, n)
        )
        diffusions.append(DiffusionChannel(mat))
    if doc.get("hamiltonian") is not None:
        h = matrix_from_json(doc["hamiltonian"], "classical.hamiltonian", (n, n))
    else:
        h = np.zeros((n, n), dtype=complex)
    return ClassicalModel(tuple(jumps), tuple(diffusions), h)


def load_model(path) -> ModelFile:
    with open(path) as fh:
        doc = json.load(fh)
    return parse_model(doc)


def triple_to_dict(triple: SlhTriple, include_scattering: bool = True) -> dict:
    n, d = triple.dim, triple.multiplicity
    out = {
        "dim": n,
        "channels": [matrix_to_json(l) for l in triple.couplings],
        "hamiltonian": matrix_to_json(triple.hamiltonian),
    }
    if include_scattering:
        eye = np.eye(d * n, dtype=complex)
        if not np.array_equal(triple.scattering, eye):
            out["scattering"] = matrix_to_json(triple.scattering)
    return out


def model_to_dict(mf: ModelFile) -> dict:
    out = {
        "dim": mf.dim,
        "channels": [matrix_to_json(l) for l in mf.channels],
        "hamiltonian": matrix_to_json(mf.hamiltonian),
    }
    if mf.scattering is not None:
        out["scattering"] = matrix_to_json(mf.scattering)
    if mf.classical is not None:
        out["classical"] = {
            "jumps": [
                {"matrix": matrix_to_json(j.s), "rate": j.nu} for j in mf.classical.jumps
            ],
            "diffusions": [
                {"matrix": matrix_to_json(d.r)} for d in mf.classical.diffusions
            ],
            "hamiltonian": matrix_to_json(mf.classical.hamiltonian),
        }
    return out


def save_model(doc: dict, path) -> None:
    with open(path, "w") as fh:
        json.dump(doc, fh, indent=2)
        fh.write("\n")


def load_state(path) -> np.ndarray:
    """Read a density matrix from a JSON file with a 'rho' field."""
    with open(path) as fh:
        doc = json.load(fh)
    if not isinstance(doc, dict) or "rho" not in doc:
        raise ModelFormatError("state file must be an object with a 'rho' matrix")
    return matrix_from_json(doc["rho"], "rho")
