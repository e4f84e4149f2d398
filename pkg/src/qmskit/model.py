"""SLH triples and generator data.

An open-system component is described by a triple ``(S, L, H)``: a unitary
scattering matrix on the joint multiplicity/system space, a list of ``d``
coupling operators, and a Hamiltonian.  The Lindblad generator depends on
``(L, H)`` only, so a scattering-free :class:`GeneratorSpec` view is used
by everything downstream of composition.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from .errors import DimensionMismatch, InvalidState
from .linalg import DEFAULT_TOL, Tolerance, as_matrix, frob, numerical_rank, vec, unvec

__all__ = [
    "GeneratorSpec",
    "SlhTriple",
    "EuclideanTransform",
    "DampingOperator",
    "ValidationReport",
    "validate",
    "require_density",
    "series_product",
    "concatenation",
    "euclidean_transform",
    "complex_damping",
    "center",
    "is_minimal",
    "reduce_to_minimal",
]


def _freeze(a: np.ndarray) -> np.ndarray:
    out = np.array(a, dtype=complex)
    out.setflags(write=False)
    return out


def _im(m: np.ndarray) -> np.ndarray:
    """Matrix imaginary part, (M - M^dag) / 2i."""
    return (m - m.conj().T) / 2j


@dataclass(frozen=True)
class GeneratorSpec:
    """Coupling operators and Hamiltonian, the data the generator sees."""

    couplings: tuple
    hamiltonian: np.ndarray

    def __post_init__(self):
        h = as_matrix(self.hamiltonian, "hamiltonian")
        if h.shape[0] != h.shape[1]:
            raise DimensionMismatch("hamiltonian must be square")
        n = h.shape[0]
        ls = []
        for k, l in enumerate(self.couplings):
            l = as_matrix(l, f"couplings[{k}]")
            if l.shape != (n, n):
                raise DimensionMismatch(
                    f"couplings[{k}] has shape {l.shape}, expected {(n, n)}"
                )
            ls.append(_freeze(l))
        object.__setattr__(self, "couplings", tuple(ls))
        object.__setattr__(self, "hamiltonian", _freeze(h))

    @property
    def dim(self) -> int:
        return self.hamiltonian.shape[0]

    @property
    def multiplicity(self) -> int:
        return len(self.couplings)


@dataclass(frozen=True)
class SlhTriple:
    """Scattering matrix, coupling list, Hamiltonian.

    ``scattering`` is the full ``(d*N) x (d*N)`` matrix, read as a ``d x d``
    grid of ``N x N`` blocks.
    """

    scattering: np.ndarray
    couplings: tuple
    hamiltonian: np.ndarray

    def __post_init__(self):
        h = as_matrix(self.hamiltonian, "hamiltonian")
        if h.shape[0] != h.shape[1]:
            raise DimensionMismatch("hamiltonian must be square")
        n = h.shape[0]
        ls = []
        for k, l in enumerate(self.couplings):
            l = as_matrix(l, f"couplings[{k}]")
            if l.shape != (n, n):
                raise DimensionMismatch(
                    f"couplings[{k}] has shape {l.shape}, expected {(n, n)}"
                )
            ls.append(_freeze(l))
        d = len(ls)
        s = as_matrix(self.scattering, "scattering")
        if s.shape != (d * n, d * n):
            raise DimensionMismatch(
                f"scattering has shape {s.shape}, expected {(d * n, d * n)}"
            )
        object.__setattr__(self, "scattering", _freeze(s))
        object.__setattr__(self, "couplings", tuple(ls))
        object.__setattr__(self, "hamiltonian", _freeze(h))

    @classmethod
    def from_parts(cls, couplings, hamiltonian, scattering=None) -> "SlhTriple":
        """Build a triple, defaulting to identity scattering."""
        h = as_matrix(hamiltonian, "hamiltonian")
        n = h.shape[0]
        d = len(couplings)
        if scattering is None:
            scattering = np.eye(d * n, dtype=complex)
        return cls(scattering, tuple(couplings), h)

    @property
    def dim(self) -> int:
        return self.hamiltonian.shape[0]

    @property
    def multiplicity(self) -> int:
        return len(self.couplings)

    def generator_spec(self) -> GeneratorSpec:
        """Scattering-free view; the generator never depends on S."""
        return GeneratorSpec(self.couplings, self.hamiltonian)


@dataclass(frozen=True)
class EuclideanTransform:
    """Gauge freedom relating representations of one generator.

    ``t`` is a ``d x d`` unitary of scalars, ``beta`` a complex ``d``-vector
    and ``e`` a real energy offset.
    """

    t: np.ndarray
    beta: np.ndarray
    e: float = 0.0

    def __post_init__(self):
        t = as_matrix(self.t, "t")
        if t.shape[0] != t.shape[1]:
            raise DimensionMismatch("t must be square")
        beta = np.asarray(self.beta, dtype=complex).reshape(-1)
        if beta.size != t.shape[0]:
            raise DimensionMismatch("beta length must match t dimension")
        object.__setattr__(self, "t", _freeze(t))
        b = beta.copy()
        b.setflags(write=False)
        object.__setattr__(self, "beta", b)
        object.__setattr__(self, "e", float(self.e))

    @classmethod
    def identity(cls, d: int) -> "EuclideanTransform":
        return cls(np.eye(d, dtype=complex), np.zeros(d, dtype=complex), 0.0)

    def unitarity_residual(self) -> float:
        d = self.t.shape[0]
        return frob(self.t.conj().T @ self.t - np.eye(d))


@dataclass(frozen=True)
class DampingOperator:
    """Drift operator K = -1/2 sum_k L_k^dag L_k - iH."""

    k: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "k", _freeze(as_matrix(self.k, "k")))


@dataclass(frozen=True)
class ValidationReport:
    dim: int
    multiplicity: int
    scattering_unitarity_residual: float
    hamiltonian_hermiticity_residual: float
    failures: tuple = field(default_factory=tuple)

    @property
    def passed(self) -> bool:
        return not self.failures


def validate(g: SlhTriple, tol: Tolerance = DEFAULT_TOL) -> ValidationReport:
    """Check the structural invariants of a triple without aborting."""
    n, d = g.dim, g.multiplicity
    s = g.scattering
    eye = np.eye(d * n, dtype=complex)
    s_resid = frob(s.conj().T @ s - eye)
    h_resid = frob(g.hamiltonian - g.hamiltonian.conj().T)
    failures = []
    if s_resid > tol.bound(max(1.0, frob(s))):
        failures.append(f"scattering not unitary (residual {s_resid:.3e})")
    if h_resid > tol.bound(max(1.0, frob(g.hamiltonian))):
        failures.append(f"hamiltonian not Hermitian (residual {h_resid:.3e})")
    return ValidationReport(n, d, s_resid, h_resid, tuple(failures))


def _stack(couplings, n: int) -> np.ndarray:
    """Stack coupling operators into the (d*N) x N column block vector."""
    if not couplings:
        return np.zeros((0, n), dtype=complex)
    return np.vstack(couplings)


def _unstack(stacked: np.ndarray, n: int) -> tuple:
    d = stacked.shape[0] // n
    return tuple(stacked[j * n : (j + 1) * n].copy() for j in range(d))


def series_product(first: SlhTriple, second: SlhTriple) -> SlhTriple:
    """Feed the output of ``first`` into ``second``.

    Result: ``(S'S, S'L + L', H + H' + Im{L'^dag S' L})`` with the primed
    triple applied second.  Both Hamiltonians enter the sum.
    """
    n = first.dim
    if second.dim != n:
        raise DimensionMismatch("series product requires equal system dimensions")
    if second.multiplicity != first.multiplicity:
        raise DimensionMismatch("series product requires equal multiplicities")
    l1 = _stack(first.couplings, n)
    l2 = _stack(second.couplings, n)
    s_out = second.scattering @ first.scattering
    l_out = second.scattering @ l1 + l2
    h_out = first.hamiltonian + second.hamiltonian + _im(
        l2.conj().T @ second.scattering @ l1
    )
    return SlhTriple(s_out, _unstack(l_out, n), h_out)


def concatenation(g: SlhTriple, g2: SlhTriple) -> SlhTriple:
    """Run two components in parallel: block-diagonal S, stacked L, summed H."""
    if g2.dim != g.dim:
        raise DimensionMismatch("concatenation requires equal system dimensions")
    s_out = scipy.linalg.block_diag(g.scattering, g2.scattering)
    return SlhTriple(
        s_out, g.couplings + g2.couplings, g.hamiltonian + g2.hamiltonian
    )


def euclidean_transform(g: SlhTriple, e: EuclideanTransform) -> SlhTriple:
    """Apply the scalar gauge transformation (T, beta, e) to a triple."""
    n, d = g.dim, g.multiplicity
    if e.t.shape != (d, d):
        raise DimensionMismatch(
            f"transform has multiplicity {e.t.shape[0]}, triple has {d}"
        )
    eye = np.eye(n, dtype=complex)
    s_out = np.kron(e.t, eye) @ g.scattering
    l_mixed = [
        sum((e.t[j, l] * g.couplings[l] for l in range(d)), np.zeros((n, n), complex))
        for j in range(d)
    ]
    l_out = [l_mixed[j] + e.beta[j] * eye for j in range(d)]
    cross = sum(
        (e.beta[j].conjugate() * l_mixed[j] for j in range(d)),
        np.zeros((n, n), complex),
    )
    h_out = g.hamiltonian + e.e * eye + _im(cross)
    return SlhTriple(s_out, tuple(l_out), h_out)


def complex_damping(spec: GeneratorSpec) -> DampingOperator:
    """K = -1/2 sum_k L_k^dag L_k - iH."""
    n = spec.dim
    acc = np.zeros((n, n), dtype=complex)
    for l in spec.couplings:
        acc += l.conj().T @ l
    return DampingOperator(-0.5 * acc - 1j * spec.hamiltonian)


def require_density(rho, tol: Tolerance = DEFAULT_TOL) -> np.ndarray:
    """Validate a density matrix (Hermitian, PSD, unit trace) or raise InvalidState."""
    rho = as_matrix(rho, "rho")
    if rho.shape[0] != rho.shape[1]:
        raise DimensionMismatch("rho must be square")
    if frob(rho - rho.conj().T) > tol.bound(max(1.0, frob(rho))):
        raise InvalidState("rho is not Hermitian within tolerance")
    w = np.linalg.eigvalsh((rho + rho.conj().T) / 2)
    if w.min() < -tol.bound(1.0):
        raise InvalidState(f"rho has negative eigenvalue {w.min():.3e}")
    tr = float(np.trace(rho).real)
    if abs(tr - 1.0) > tol.bound(1.0):
        raise InvalidState(f"tr(rho) = {tr} is not 1 within tolerance")
    return rho


def center(g: SlhTriple, rho, tol: Tolerance = DEFAULT_TOL):
    """Gauge-shift a triple so that tr(rho H') = 0 and tr(rho L'_k) = 0.

    Returns the centered triple together with the transform that realizes
    it (T = identity, beta_k = -tr(rho L_k), e cancelling the Hamiltonian
    average).
    """
    rho = require_density(rho, tol)
    if rho.shape[0] != g.dim:
        raise DimensionMismatch("rho dimension does not match the triple")
    d = g.multiplicity
    beta = np.array(
        [-np.trace(rho @ l) for l in g.couplings], dtype=complex
    )
    shift = EuclideanTransform(np.eye(d, dtype=complex), beta, 0.0)
    g_shifted = euclidean_transform(g, shift)
    e = -float(np.trace(rho @ g_shifted.hamiltonian).real)
    transform = EuclideanTransform(np.eye(d, dtype=complex), beta, e)
    return euclidean_transform(g, transform), transform


def is_minimal(g, tol: Tolerance = DEFAULT_TOL) -> bool:
    """True iff {identity, L_1, ..., L_d} is linearly independent."""
    n = g.dim
    rows = [vec(np.eye(n, dtype=complex))] + [vec(l) for l in g.couplings]
    return numerical_rank(rows, tol) == len(g.couplings) + 1


def reduce_to_minimal(g: SlhTriple, tol: Tolerance = DEFAULT_TOL):
    """Compress the coupling list to a minimal, identity-scattering triple.

    The identity component of each coupling is absorbed into a Hamiltonian
    correction; the traceless remainders are compressed to an orthogonal
    set of channels via SVD.  The generator is preserved exactly.

    Returns the reduced triple and its rank ``d'``.
    """
    n = g.dim
    eye = np.eye(n, dtype=complex)
    h = np.array(g.hamiltonian)
    traceless = []
    for l in g.couplings:
        c = complex(np.trace(l)) / n
        lt = l - c * eye
        h = h - _im(np.conjugate(c) * lt)
        traceless.append(lt)

    cols = np.zeros((n * n, len(traceless)), dtype=complex)
    for k, lt in enumerate(traceless):
        cols[:, k] = vec(lt)
    if cols.shape[1] == 0:
        return SlhTriple.from_parts((), h), 0
    w, s, _ = np.linalg.svd(cols, full_matrices=False)
    cut = tol.abs_tol + tol.rel_tol * (float(s[0]) if s.size else 0.0)
    rank = int(np.count_nonzero(s > cut))
    new_ls = tuple(unvec(s[i] * w[:, i], (n, n)) for i in range(rank))
    return SlhTriple.from_parts(new_ls, h), rank
