"""Generator evaluation, superoperators, evolution, and stationary structure.

The Heisenberg generator is

    L(X) = 1/2 sum_k [L_k^dag, X] L_k + 1/2 sum_k L_k^dag [X, L_k] - i[X, H]

and its Schrodinger dual drives the master equation for density matrices.
Superoperator matrices use column-stacking vectorization throughout.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatch, InvalidState
from .linalg import (
    DEFAULT_TOL,
    Tolerance,
    as_matrix,
    frob,
    matrix_exp,
    null_space,
    unvec,
    vec,
)
from .model import GeneratorSpec, complex_damping, require_density

__all__ = [
    "HEISENBERG",
    "SCHRODINGER",
    "Superoperator",
    "StationaryReport",
    "apply_generator",
    "apply_dual",
    "dissipator",
    "to_superoperator",
    "evolve",
    "is_bistochastic",
    "purity_trajectory",
    "stationary_states",
    "choi_matrix",
]

HEISENBERG = "heisenberg"
SCHRODINGER = "schrodinger"


@dataclass(frozen=True)
class Superoperator:
    """Matrix form of the generator (or its dual) on vectorized operators."""

    dim: int
    matrix: np.ndarray
    picture: str

    def __post_init__(self):
        if self.picture not in (HEISENBERG, SCHRODINGER):
            raise ValueError(f"unknown picture {self.picture!r}")
        m = as_matrix(self.matrix, "matrix")
        n2 = self.dim * self.dim
        if m.shape != (n2, n2):
            raise DimensionMismatch(f"matrix has shape {m.shape}, expected {(n2, n2)}")
        m = np.array(m)
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)

    def apply(self, x) -> np.ndarray:
        return unvec(self.matrix @ vec(as_matrix(x)), (self.dim, self.dim))

    def spectral_abscissa(self) -> float:
        return float(np.max(np.linalg.eigvals(self.matrix).real))


@dataclass(frozen=True)
class StationaryReport:
    """Kernel of the dual generator plus any pure stationary states."""

    basis: tuple          # orthonormal Hermitian operators spanning ker L*
    pure_states: tuple    # unit vectors e with |e><e| stationary


def _check_op(spec: GeneratorSpec, x, name: str = "operator") -> np.ndarray:
    x = as_matrix(x, name)
    n = spec.dim
    if x.shape != (n, n):
        raise DimensionMismatch(f"{name} has shape {x.shape}, expected {(n, n)}")
    return x


def apply_generator(spec: GeneratorSpec, x) -> np.ndarray:
    """Heisenberg generator applied to an observable."""
    x = _check_op(spec, x)
    h = spec.hamiltonian
    out = -1j * (x @ h - h @ x)
    for l in spec.couplings:
        ld = l.conj().T
        ldl = ld @ l
        out = out + (ld @ x) @ l - 0.5 * (ldl @ x + x @ ldl)
    return out


def apply_dual(spec: GeneratorSpec, rho) -> np.ndarray:
    """Schrodinger (dual) generator applied to a state-like operator."""
    rho = _check_op(spec, rho, "rho")
    h = spec.hamiltonian
    out = 1j * (rho @ h - h @ rho)
    for l in spec.couplings:
        ld = l.conj().T
        ldl = ld @ l
        out = out + (l @ rho) @ ld - 0.5 * (ldl @ rho + rho @ ldl)
    return out


def dissipator(spec: GeneratorSpec, x, y) -> np.ndarray:
    """D(X, Y) = L(XY) - L(X) Y - X L(Y), the departure from a derivation."""
    x = _check_op(spec, x, "x")
    y = _check_op(spec, y, "y")
    return (
        apply_generator(spec, x @ y)
        - apply_generator(spec, x) @ y
        - x @ apply_generator(spec, y)
    )


def to_superoperator(spec: GeneratorSpec, picture: str = HEISENBERG) -> Superoperator:
    """Column-stacked matrix M with M vec(X) = vec(L X) (or the dual)."""
    n = spec.dim
    eye = np.eye(n, dtype=complex)
    h = spec.hamiltonian
    ham = np.kron(h.T, eye) - np.kron(eye, h)
    if picture == HEISENBERG:
        m = -1j * ham
        for l in spec.couplings:
            ldl = l.conj().T @ l
            m = m + np.kron(l.T, l.conj().T)
            m = m - 0.5 * np.kron(eye, ldl) - 0.5 * np.kron(ldl.T, eye)
    elif picture == SCHRODINGER:
        m = 1j * ham
        for l in spec.couplings:
            ldl = l.conj().T @ l
            m = m + np.kron(l.conj(), l)
            m = m - 0.5 * np.kron(eye, ldl) - 0.5 * np.kron(ldl.T, eye)
    else:
        raise ValueError(f"unknown picture {picture!r}")
    return Superoperator(n, m, picture)


def _check_times(times) -> np.ndarray:
    t = np.asarray(times, dtype=float).reshape(-1)
    if t.size and (np.any(t < 0) or np.any(np.diff(t) < 0)):
        raise ValueError("times must be nonnegative and ascending")
    return t


def evolve(spec: GeneratorSpec, x0, times, picture: str = HEISENBERG) -> list:
    """Propagate an operator along exp(t M) for each requested time."""
    x0 = _check_op(spec, x0, "x0")
    t = _check_times(times)
    m = to_superoperator(spec, picture).matrix
    v0 = vec(x0)
    out = []
    for ti in t:
        out.append(unvec(matrix_exp(ti * m) @ v0, x0.shape))
    return out


def is_bistochastic(spec: GeneratorSpec, tol: Tolerance = DEFAULT_TOL) -> bool:
    """True iff sum_k L_k^dag L_k = sum_k L_k L_k^dag within tolerance."""
    n = spec.dim
    left = np.zeros((n, n), dtype=complex)
    right = np.zeros((n, n), dtype=complex)
    for l in spec.couplings:
        left += l.conj().T @ l
        right += l @ l.conj().T
    return frob(left - right) <= tol.bound(max(1.0, frob(left)))


def purity_trajectory(spec: GeneratorSpec, rho0, times, tol: Tolerance = DEFAULT_TOL):
    """tr(rho_t^2) along the Schrodinger evolution."""
    rho0 = require_density(rho0, tol)
    if rho0.shape[0] != spec.dim:
        raise DimensionMismatch("rho0 dimension does not match the spec")
    states = evolve(spec, rho0, times, SCHRODINGER)
    n = spec.dim
    out = np.empty(len(states), dtype=float)
    slack = max(tol.bound(1.0), 1e-10)
    for i, rho in enumerate(states):
        p = float(np.trace(rho @ rho).real)
        if p < 1.0 / n - slack or p > 1.0 + slack:
            raise InvalidState(f"purity {p} left the admissible range at step {i}")
        out[i] = p
    return out


def _hermitian_kernel_basis(kernel_vecs, n: int) -> list:
    """Orthonormal Hermitian basis (real span) of a *-closed operator space."""
    cands = []
    for v in kernel_vecs:
        b = unvec(v, (n, n))
        cands.append((b + b.conj().T) / 2)
        cands.append((b - b.conj().T) / 2j)
    if not cands:
        return []
    real_rows = np.array([np.concatenate([vec(c).real, vec(c).imag]) for c in cands])
    u, s, vh = np.linalg.svd(real_rows, full_matrices=False)
    cut = 1e-10 * (s[0] if s.size else 0.0)
    basis = []
    for i in range(len(s)):
        if s[i] > max(cut, 1e-14):
            row = vh[i]
            mat = unvec(row[: n * n] + 1j * row[n * n :], (n, n))
            mat = (mat + mat.conj().T) / 2
            mat = mat / frob(mat)
            # Fix the overall sign: positive trace, else first sizable entry.
            tr = float(np.trace(mat).real)
            if abs(tr) > 1e-10:
                mat = mat * np.sign(tr)
            else:
                flat = vec(mat)
                k = int(np.argmax(np.abs(flat)))
                lead = flat[k].real if abs(flat[k].real) > 1e-10 else flat[k].imag
                if lead < 0:
                    mat = -mat
            basis.append(mat)
    return basis


def _is_eigvec_of(a: np.ndarray, v: np.ndarray, tol: Tolerance) -> bool:
    av = a @ v
    perp = av - (v.conj() @ av) * v
    return frob(perp.reshape(-1, 1)) <= tol.bound(max(1.0, float(np.linalg.norm(av))))


def stationary_states(spec: GeneratorSpec, tol: Tolerance = DEFAULT_TOL) -> StationaryReport:
    """Kernel of the dual generator and verified pure stationary states.

    Pure states are located by scanning eigenvectors of Hermitian kernel
    elements (and of a few random Hermitian combinations, to split
    degeneracies); a candidate e is kept when |e><e| is annihilated by the
    dual generator and e is a joint eigenvector of the damping operator K
    and every coupling.
    """
    n = spec.dim
    ms = to_superoperator(spec, SCHRODINGER).matrix
    kern = null_space(ms, tol)
    basis = _hermitian_kernel_basis(kern, n)

    scale = max(1.0, frob(ms))
    k_op = complex_damping(spec).k
    rng = np.random.default_rng(0xD1CE)
    candidates = []
    for b in basis:
        candidates.append(b)
    for _ in range(4):
        if basis:
            coef = rng.normal(size=len(basis))
            candidates.append(sum(c * b for c, b in zip(coef, basis)))

    pure = []
    for cand in candidates:
        w, u = np.linalg.eigh(cand)
        for j in range(n):
            v = u[:, j]
            resid = float(np.linalg.norm(ms @ vec(np.outer(v, v.conj()))))
            if resid > tol.bound(scale):
                continue
            if not _is_eigvec_of(k_op, v, tol):
                continue
            if not all(_is_eigvec_of(l, v, tol) for l in spec.couplings):
                continue
            if any(abs(np.vdot(p, v)) > 1 - 1e-8 for p in pure):
                continue
            k = int(np.argmax(np.abs(v)))
            v = v * (v[k].conjugate() / abs(v[k]))
            pure.append(v)

    return StationaryReport(tuple(basis), tuple(pure))


def choi_matrix(channel: np.ndarray) -> np.ndarray:
    """Choi matrix of a channel given as a column-stacked superoperator."""
    channel = as_matrix(channel, "channel")
    n2 = channel.shape[0]
    n = int(round(np.sqrt(n2)))
    if n * n != n2 or channel.shape != (n2, n2):
        raise DimensionMismatch("channel must be N^2 x N^2")
    c4 = channel.reshape(n, n, n, n)          # axes [l, k, j, i]
    return c4.transpose(3, 1, 2, 0).reshape(n2, n2)
