"""Dephasing structure of a generator.

Certifies invariant projector families, finds the stable basis of a
maximally dephasing generator, assembles the coupling-coefficient matrix
F (rows = channels, columns = basis states), and from it the block
eigenvalues

    z_nm = <col_n, col_m> - |col_n|^2/2 - |col_m|^2/2 + i(eps_n - eps_m),

the decay rates Gamma = -Re z, the oscillation frequencies Omega = -Im z,
the signed areas A_nm = Im <col_n, col_m>, and the obstruction tensor
Delta_nml = A_nm + A_ml + A_ln.  A vanishing obstruction is exactly the
condition under which the generator admits a representation with
self-adjoint couplings; the constructive converse is implemented in
:func:`self_adjoint_representation`.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import (
    DimensionMismatch,
    InvalidFamily,
    NotCommuting,
    NotDiagonal,
    NotInvariant,
    NotMaximallyDephasing,
    NotNormal,
    NotProjector,
    NotSimultaneouslyDiagonalizable,
    NotApplicable,
    Obstructed,
)
from .linalg import DEFAULT_TOL, Tolerance, as_matrix, frob, simultaneous_diagonalize
from .model import GeneratorSpec, is_minimal
from .semigroup import HEISENBERG, apply_generator, to_superoperator

__all__ = [
    "ProjectorFamily",
    "CouplingMatrixF",
    "DephasingReport",
    "is_invariant_projector",
    "family_commutant_check",
    "is_dephasing_family",
    "find_stable_basis",
    "coupling_matrix",
    "block_eigenvalues",
    "obstruction",
    "is_maximally_dephasing",
    "max_rank_check",
    "self_adjoint_representation",
    "center_coupling_columns",
]


@dataclass(frozen=True)
class ProjectorFamily:
    """Complete family of mutually orthogonal projectors."""

    projectors: tuple

    def __post_init__(self):
        ps = []
        n = None
        for i, p in enumerate(self.projectors):
            p = as_matrix(p, f"projectors[{i}]")
            if p.shape[0] != p.shape[1]:
                raise DimensionMismatch(f"projectors[{i}] must be square")
            if n is None:
                n = p.shape[0]
            elif p.shape[0] != n:
                raise DimensionMismatch("projectors must share one dimension")
            q = np.array(p)
            q.setflags(write=False)
            ps.append(q)
        if not ps:
            raise InvalidFamily("family must contain at least one projector")
        object.__setattr__(self, "projectors", tuple(ps))

    @property
    def dim(self) -> int:
        return self.projectors[0].shape[0]

    @property
    def ranks(self) -> tuple:
        return tuple(int(round(float(np.trace(p).real))) for p in self.projectors)

    def validate(self, tol: Tolerance = DEFAULT_TOL) -> None:
        """Raise InvalidFamily unless idempotent, Hermitian, orthogonal, complete."""
        n = self.dim
        total = np.zeros((n, n), dtype=complex)
        for i, p in enumerate(self.projectors):
            if frob(p - p.conj().T) > tol.bound(max(1.0, frob(p))):
                raise InvalidFamily(f"projectors[{i}] is not Hermitian")
            if frob(p @ p - p) > tol.bound(max(1.0, frob(p))):
                raise InvalidFamily(f"projectors[{i}] is not idempotent")
            total += p
        for i in range(len(self.projectors)):
            for j in range(i + 1, len(self.projectors)):
                cross = frob(self.projectors[i] @ self.projectors[j])
                if cross > tol.bound(1.0):
                    raise InvalidFamily(f"projectors {i} and {j} are not orthogonal")
        if frob(total - np.eye(n)) > tol.bound(float(n)):
            raise InvalidFamily("family is not complete (projectors do not sum to 1)")


@dataclass(frozen=True)
class CouplingMatrixF:
    """Diagonal coupling coefficients in a stable basis.

    ``f[k, n]`` is the n-th diagonal entry of the k-th coupling, ``diag_h``
    the (real) Hamiltonian diagonal, and ``basis`` the unitary whose
    columns define the stable basis.
    """

    f: np.ndarray
    diag_h: np.ndarray
    basis: np.ndarray

    def __post_init__(self):
        f = np.asarray(self.f, dtype=complex)
        if f.ndim != 2:
            raise DimensionMismatch("f must be a d x N matrix")
        diag_h = np.asarray(self.diag_h, dtype=float).reshape(-1)
        basis = as_matrix(self.basis, "basis")
        if diag_h.size != f.shape[1] or basis.shape != (f.shape[1], f.shape[1]):
            raise DimensionMismatch("inconsistent F-matrix shapes")
        for arr in (f, diag_h, basis):
            arr.setflags(write=False)
        object.__setattr__(self, "f", f)
        object.__setattr__(self, "diag_h", diag_h)
        object.__setattr__(self, "basis", basis)

    @property
    def n_channels(self) -> int:
        return self.f.shape[0]

    @property
    def dim(self) -> int:
        return self.f.shape[1]

    def column(self, n: int) -> np.ndarray:
        """Coefficient vector of basis state n across all channels."""
        return self.f[:, n].copy()


@dataclass(frozen=True)
class DephasingReport:
    """Block eigenvalues and derived dephasing data.

    ``z`` are the eigenvalues of the generator on the off-diagonal blocks,
    ``gamma = -Re z`` the decay rates, ``omega = -Im z`` the frequencies,
    ``areas`` the signed areas Im <col_n, col_m>, and ``delta`` the
    obstruction tensor.  ``maximal`` and ``stable_basis`` are filled in by
    :func:`is_maximally_dephasing`.
    """

    z: np.ndarray
    gamma: np.ndarray
    omega: np.ndarray
    areas: np.ndarray
    delta: np.ndarray | None = None
    maximal: bool | None = None
    stable_basis: np.ndarray | None = None
    coupling: CouplingMatrixF | None = None


def _generator_scale(spec: GeneratorSpec) -> float:
    scale = frob(spec.hamiltonian)
    for l in spec.couplings:
        scale += frob(l) ** 2
    return max(1.0, scale)


def _require_projector(p, tol: Tolerance) -> np.ndarray:
    p = as_matrix(p, "projector")
    if p.shape[0] != p.shape[1]:
        raise DimensionMismatch("projector must be square")
    if frob(p - p.conj().T) > tol.bound(max(1.0, frob(p))):
        raise NotProjector("matrix is not Hermitian")
    if frob(p @ p - p) > tol.bound(max(1.0, frob(p))):
        raise NotProjector("matrix is not idempotent")
    return p


def is_invariant_projector(spec: GeneratorSpec, p, tol: Tolerance = DEFAULT_TOL) -> bool:
    """True iff the generator annihilates the projector."""
    p = _require_projector(p, tol)
    if p.shape[0] != spec.dim:
        raise DimensionMismatch("projector dimension does not match the spec")
    return frob(apply_generator(spec, p)) <= tol.bound(_generator_scale(spec))


def family_commutant_check(
    spec: GeneratorSpec, fam: ProjectorFamily, tol: Tolerance = DEFAULT_TOL
) -> bool:
    """True iff H and every coupling commute with every family member."""
    fam.validate(tol)
    if fam.dim != spec.dim:
        raise DimensionMismatch("family dimension does not match the spec")
    ops = (spec.hamiltonian,) + spec.couplings
    for p in fam.projectors:
        for a in ops:
            if frob(p @ a - a @ p) > tol.bound(max(1.0, frob(a))):
                return False
    return True


def _sandwich_basis(p_left: np.ndarray, p_right: np.ndarray) -> np.ndarray:
    """Orthonormal columns spanning the vectorized space {P_left X P_right}."""
    proj = np.kron(p_right.T, p_left)
    w, u = np.linalg.eigh((proj + proj.conj().T) / 2)
    return u[:, w > 0.5]


def is_dephasing_family(
    spec: GeneratorSpec, fam: ProjectorFamily, tol: Tolerance = DEFAULT_TOL
) -> bool:
    """True iff every cross block P_n X P_m (n != m) decays to zero.

    The Heisenberg superoperator is restricted to each vectorized sandwich
    subspace; decay holds when the restricted spectral abscissa is
    strictly negative.
    """
    fam.validate(tol)
    if fam.dim != spec.dim:
        raise DimensionMismatch("family dimension does not match the spec")
    for i, p in enumerate(fam.projectors):
        if not is_invariant_projector(spec, p, tol):
            raise NotInvariant(f"projectors[{i}] is not invariant under the generator")
    m = to_superoperator(spec, HEISENBERG).matrix
    k = len(fam.projectors)
    for i in range(k):
        for j in range(k):
            if i == j:
                continue
            basis = _sandwich_basis(fam.projectors[i], fam.projectors[j])
            if basis.shape[1] == 0:
                continue
            restricted = basis.conj().T @ m @ basis
            abscissa = float(np.max(np.linalg.eigvals(restricted).real))
            if abscissa >= -tol.abs_tol:
                return False
    return True


def find_stable_basis(spec: GeneratorSpec, tol: Tolerance = DEFAULT_TOL) -> np.ndarray:
    """Unitary diagonalizing H and every coupling simultaneously.

    Columns are ordered by the Hamiltonian diagonal first, then
    lexicographically by the coupling coefficients, so reports are
    reproducible.  Raises NotSimultaneouslyDiagonalizable when no common
    eigenbasis exists (the generator is then not maximally dephasing in
    any basis).
    """
    family = [spec.hamiltonian] + list(spec.couplings)
    try:
        u, _ = simultaneous_diagonalize(family, tol)
    except (NotNormal, NotCommuting) as err:
        raise NotSimultaneouslyDiagonalizable(str(err)) from err
    return u


def coupling_matrix(
    spec: GeneratorSpec, basis: np.ndarray, tol: Tolerance = DEFAULT_TOL
) -> CouplingMatrixF:
    """Collect the diagonal coefficients of H and the couplings in ``basis``."""
    u = as_matrix(basis, "basis")
    n = spec.dim
    if u.shape != (n, n):
        raise DimensionMismatch("basis must be an N x N unitary")

    def _diag(a, name):
        d = u.conj().T @ a @ u
        off = d - np.diag(np.diag(d))
        if frob(off) > tol.bound(max(1.0, frob(a))):
            raise NotDiagonal(f"{name} is not diagonal in the given basis")
        return np.diag(d).copy()

    h_diag = _diag(spec.hamiltonian, "hamiltonian")
    f = np.zeros((len(spec.couplings), n), dtype=complex)
    for k, l in enumerate(spec.couplings):
        f[k] = _diag(l, f"couplings[{k}]")
    return CouplingMatrixF(f, h_diag.real, u)


def block_eigenvalues(f: CouplingMatrixF) -> DephasingReport:
    """Analytic eigenvalues of the generator on the blocks |n><m|.

    The Gram matrix is hermitized and the real/imaginary parts assembled
    from exactly (anti)symmetric pieces, so z[m, n] == conj(z[n, m]),
    gamma stays exactly symmetric and omega, areas exactly antisymmetric.
    """
    gram = f.f.conj().T @ f.f
    gram = (gram + gram.conj().T) / 2
    s = gram.diagonal().real
    eps = f.diag_h
    half_sum = 0.5 * (s[:, None] + s[None, :])
    z = (gram.real - half_sum) + 1j * (gram.imag + (eps[:, None] - eps[None, :]))
    np.fill_diagonal(z, 0.0)
    gamma = -z.real.copy()
    omega = -z.imag.copy()
    areas = gram.imag.copy()
    return DephasingReport(z=z, gamma=gamma, omega=omega, areas=areas, coupling=f)


def _delta_from_areas(areas: np.ndarray) -> np.ndarray:
    """Delta[n, m, l] = A[n, m] + A[m, l] + A[l, n].

    Filled per sorted triple so the cyclic and sign-flip symmetries hold
    exactly; triples with a repeated index vanish identically.
    """
    a = areas
    n = a.shape[0]
    out = np.zeros((n, n, n))
    for i in range(n):
        for j in range(i + 1, n):
            for k in range(j + 1, n):
                val = a[i, j] + a[j, k] + a[k, i]
                out[i, j, k] = out[j, k, i] = out[k, i, j] = val
                out[j, i, k] = out[i, k, j] = out[k, j, i] = -val
    return out


def obstruction(f: CouplingMatrixF) -> np.ndarray:
    """Obstruction tensor Delta[n, m, l] = A_nm + A_ml + A_ln.

    The areas are the entrywise imaginary parts of the column Gram matrix.
    """
    gram = f.f.conj().T @ f.f
    gram = (gram + gram.conj().T) / 2
    return _delta_from_areas(gram.imag)


def is_maximally_dephasing(spec: GeneratorSpec, tol: Tolerance = DEFAULT_TOL):
    """Decide maximal dephasing and return the full report when a basis exists.

    Returns ``(verdict, report)``; the report is None when no common
    eigenbasis exists, and populated (with ``maximal`` set either way)
    when it does.  The verdict is True iff additionally every off-diagonal
    decay rate is strictly positive.
    """
    try:
        u = find_stable_basis(spec, tol)
    except NotSimultaneouslyDiagonalizable:
        return False, None
    f = coupling_matrix(spec, u, tol)
    report = block_eigenvalues(f)
    n = f.dim
    off = report.gamma[~np.eye(n, dtype=bool)]
    maximal = bool(off.size == 0 or off.min() > tol.abs_tol)
    delta = _delta_from_areas(report.areas)
    report = DephasingReport(
        z=report.z,
        gamma=report.gamma,
        omega=report.omega,
        areas=report.areas,
        delta=delta,
        maximal=maximal,
        stable_basis=u,
        coupling=f,
    )
    return maximal, report


def max_rank_check(
    spec: GeneratorSpec,
    report: DephasingReport | None = None,
    tol: Tolerance = DEFAULT_TOL,
) -> bool:
    """For minimal, maximally dephasing specs: check d <= N - 1."""
    if report is None or report.maximal is None:
        ok, report = is_maximally_dephasing(spec, tol)
    else:
        ok = bool(report.maximal)
    if not ok:
        raise NotApplicable("generator is not maximally dephasing")
    if not is_minimal(spec, tol):
        raise NotApplicable("representation is not minimal")
    return spec.multiplicity <= spec.dim - 1


def center_coupling_columns(f: CouplingMatrixF):
    """Shift the coupling columns to zero mean (a gauge move on the triple).

    Returns ``(fc, eps_c)``: the centered column matrix and the
    compensated Hamiltonian diagonal.  The underlying generator is
    unchanged: the shift is the Euclidean transform with beta equal to
    minus the column mean, whose Hamiltonian correction is
    Im(sum_k conj(beta_k) F[k, n]) on the diagonal.
    """
    beta = -f.f.mean(axis=1)
    fc = f.f + beta[:, None]
    eps_c = f.diag_h + np.imag(np.einsum("k,kn->n", beta.conj(), f.f))
    return fc, eps_c


def self_adjoint_representation(
    spec: GeneratorSpec, tol: Tolerance = DEFAULT_TOL
) -> GeneratorSpec:
    """Rewrite a maximally dephasing generator with Hermitian couplings.

    Steps: (i) compute the obstruction; bail out when any entry exceeds
    tolerance, since a nonzero obstruction rules out any self-adjoint
    representation; (ii) center the coupling columns, which provably
    cancels every signed area once the obstruction vanishes (the area
    matrix becomes an antisymmetric coboundary with zero row sums) while
    preserving the generator; (iii) the centered Gram matrix is then real
    symmetric PSD of rank d' <= d: factor it by eigendecomposition into
    real row vectors; (iv) emit the corresponding Hermitian diagonal
    couplings and the compensated diagonal Hamiltonian.

    The output generates the same semigroup; equality of superoperators
    is asserted internally.
    """
    ok, report = is_maximally_dephasing(spec, tol)
    if report is None or not ok:
        raise NotMaximallyDephasing("spec is not maximally dephasing")
    f = report.coupling
    scale = max(1.0, float(np.abs(f.f).max()) ** 2)
    max_idx = np.unravel_index(np.argmax(np.abs(report.delta)), report.delta.shape)
    max_delta = float(np.abs(report.delta[max_idx]))
    if max_delta > tol.bound(scale):
        raise Obstructed(report.delta[max_idx], max_idx)

    fc, eps_c = center_coupling_columns(f)
    areas_c = np.imag(fc.conj().T @ fc)
    if float(np.abs(areas_c).max(initial=0.0)) > 100 * tol.bound(scale):
        raise Obstructed(float(np.abs(areas_c).max()), max_idx)

    gram = np.real(fc.conj().T @ fc)
    gram = (gram + gram.T) / 2
    w, v = np.linalg.eigh(gram)
    cut = tol.bound(float(w.max(initial=0.0)))
    keep = np.where(w > cut)[0][::-1]          # descending eigenvalue order
    rows = np.sqrt(w[keep])[:, None] * v[:, keep].T

    u = f.basis
    new_ls = tuple(
        _hermitize(u @ np.diag(rows[i].astype(complex)) @ u.conj().T)
        for i in range(rows.shape[0])
    )
    new_h = _hermitize(u @ np.diag(eps_c.astype(complex)) @ u.conj().T)
    out = GeneratorSpec(new_ls, new_h)

    m_in = to_superoperator(spec, HEISENBERG).matrix
    m_out = to_superoperator(out, HEISENBERG).matrix
    resid = frob(m_in - m_out)
    if resid > 1e-9 * max(1.0, frob(m_in)):
        raise ArithmeticError(
            f"self-adjoint rewrite failed to preserve the generator (residual {resid:.3e})"
        )
    return out


def _hermitize(a: np.ndarray) -> np.ndarray:
    return (a + a.conj().T) / 2
