"""Essentially classical dilations.

A classical noise model drives a random unitary evolution through Poisson
jump channels ``(S_j, nu_j)``, Wiener diffusion channels ``R_k``, and a
deterministic Hamiltonian.  This module assembles the induced generators
and SLH triples, implements the rank-one line/circle classicality test,
and decides when a maximally dephasing generator can be dilated using
diffusive noise only (exactly when all signed areas, equivalently the
obstruction tensor, vanish).
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .errors import (
    DimensionMismatch,
    InvalidModel,
    NotDiagonal,
    NotMaximallyDephasing,
)
from .dephasing import (
    _delta_from_areas,
    center_coupling_columns,
    is_maximally_dephasing,
    self_adjoint_representation,
)
from .linalg import DEFAULT_TOL, Tolerance, as_matrix, frob
from .model import GeneratorSpec, SlhTriple, concatenation
from .semigroup import HEISENBERG, to_superoperator

__all__ = [
    "JumpChannel",
    "DiffusionChannel",
    "ClassicalModel",
    "ClassicalityKind",
    "LineFit",
    "CircleFit",
    "ClassicalityVerdict",
    "classical_to_generator",
    "classical_to_slh",
    "km_rank1_classical_test",
    "jump_dephasing_coefficients",
    "obstruction_from_phases",
    "admits_diffusive_dilation",
    "verify_classical_model",
]

CLASSICALITY_FIT_TOL = Tolerance(1e-8, 1e-12)


@dataclass(frozen=True)
class JumpChannel:
    """Poisson kick channel: unitary ``s`` applied at rate ``nu``."""

    s: np.ndarray
    nu: float
    xi_phase: float = 0.0

    def __post_init__(self):
        s = as_matrix(self.s, "s")
        if s.shape[0] != s.shape[1]:
            raise DimensionMismatch("jump unitary must be square")
        s = np.array(s)
        s.setflags(write=False)
        object.__setattr__(self, "s", s)
        object.__setattr__(self, "nu", float(self.nu))
        object.__setattr__(self, "xi_phase", float(self.xi_phase))


@dataclass(frozen=True)
class DiffusionChannel:
    """Wiener channel: Hermitian ``r`` coupled to an independent Brownian path."""

    r: np.ndarray
    theta: float = 0.0

    def __post_init__(self):
        r = as_matrix(self.r, "r")
        if r.shape[0] != r.shape[1]:
            raise DimensionMismatch("diffusion operator must be square")
        r = np.array(r)
        r.setflags(write=False)
        object.__setattr__(self, "r", r)
        object.__setattr__(self, "theta", float(self.theta))


@dataclass(frozen=True)
class ClassicalModel:
    """Jump channels, diffusion channels, and a Hamiltonian."""

    jumps: tuple = ()
    diffusions: tuple = ()
    hamiltonian: np.ndarray = None

    def __post_init__(self):
        h = as_matrix(self.hamiltonian, "hamiltonian")
        if h.shape[0] != h.shape[1]:
            raise DimensionMismatch("hamiltonian must be square")
        h = np.array(h)
        h.setflags(write=False)
        object.__setattr__(self, "hamiltonian", h)
        object.__setattr__(self, "jumps", tuple(self.jumps))
        object.__setattr__(self, "diffusions", tuple(self.diffusions))

    @property
    def dim(self) -> int:
        return self.hamiltonian.shape[0]

    def validate(self, tol: Tolerance = DEFAULT_TOL) -> None:
        """Raise InvalidModel on any structural violation."""
        n = self.dim
        if frob(self.hamiltonian - self.hamiltonian.conj().T) > tol.bound(
            max(1.0, frob(self.hamiltonian))
        ):
            raise InvalidModel("hamiltonian is not Hermitian")
        for i, j in enumerate(self.jumps):
            if j.s.shape != (n, n):
                raise InvalidModel(f"jumps[{i}] has wrong dimension")
            if j.nu <= 0:
                raise InvalidModel(f"jumps[{i}] has nonpositive rate {j.nu}")
            resid = frob(j.s.conj().T @ j.s - np.eye(n))
            if resid > tol.bound(max(1.0, frob(j.s))):
                raise InvalidModel(f"jumps[{i}] is not unitary (residual {resid:.3e})")
        for i, d in enumerate(self.diffusions):
            if d.r.shape != (n, n):
                raise InvalidModel(f"diffusions[{i}] has wrong dimension")
            resid = frob(d.r - d.r.conj().T)
            if resid > tol.bound(max(1.0, frob(d.r))):
                raise InvalidModel(
                    f"diffusions[{i}] is not Hermitian (residual {resid:.3e})"
                )


class ClassicalityKind(enum.Enum):
    LINE = "line"
    CIRCLE = "circle"
    BOTH = "both"
    NOT_CLASSICAL = "not_classical"


@dataclass(frozen=True)
class LineFit:
    point: complex
    direction: complex  # unit modulus


@dataclass(frozen=True)
class CircleFit:
    center: complex
    radius: float


@dataclass(frozen=True)
class ClassicalityVerdict:
    kind: ClassicalityKind
    residual: float
    line: LineFit | None = None
    circle: CircleFit | None = None


def classical_to_generator(model: ClassicalModel, tol: Tolerance = DEFAULT_TOL) -> GeneratorSpec:
    """Generator of the noise-averaged evolution.

    Jump channels contribute nu (S^dag X S - X), realized through the
    coupling sqrt(nu) S; diffusion channels contribute -[[X, R], R]/2,
    realized through the coupling R itself (the quadrature phase drops out
    of the generator).
    """
    model.validate(tol)
    ls = [np.sqrt(j.nu) * j.s for j in model.jumps]
    ls += [d.r for d in model.diffusions]
    return GeneratorSpec(tuple(ls), model.hamiltonian)


def classical_to_slh(model: ClassicalModel, tol: Tolerance = DEFAULT_TOL) -> SlhTriple:
    """Concatenation of the per-channel germs plus the deterministic part.

    Jump channel: scattering S, coupling xi (S - 1) with xi = sqrt(nu)
    e^{i xi_phase}, Hamiltonian |xi|^2 (S^dag - S) / 2i.  Diffusion
    channel: identity scattering, coupling e^{i theta} R.  The resulting
    generator agrees with :func:`classical_to_generator`.
    """
    model.validate(tol)
    n = model.dim
    eye = np.eye(n, dtype=complex)
    out = SlhTriple.from_parts((), np.zeros((n, n), dtype=complex))
    for j in model.jumps:
        xi = np.sqrt(j.nu) * np.exp(1j * j.xi_phase)
        germ = SlhTriple(
            j.s,
            (xi * (j.s - eye),),
            (abs(xi) ** 2 / 2j) * (j.s.conj().T - j.s),
        )
        out = concatenation(out, germ)
    for d in model.diffusions:
        germ = SlhTriple.from_parts((np.exp(1j * d.theta) * d.r,), np.zeros((n, n)))
        out = concatenation(out, germ)
    det = SlhTriple.from_parts((), model.hamiltonian)
    return concatenation(out, det)


def _cluster_points(pts: np.ndarray, eps: float) -> list:
    reps: list = []
    for z in sorted(pts, key=lambda w: (w.real, w.imag)):
        if not any(abs(z - r) <= eps for r in reps):
            reps.append(z)
    return reps


def km_rank1_classical_test(l, tol: Tolerance = CLASSICALITY_FIT_TOL) -> ClassicalityVerdict:
    """Line/circle spectral test for a single coupling operator.

    The rank-one generator built from ``l`` arises from classical noise
    iff ``l`` is normal and its spectrum lies on a straight line or on a
    circle in the complex plane; with at most two distinct eigenvalues
    both realizations exist.
    """
    l = as_matrix(l, "l")
    if l.shape[0] != l.shape[1]:
        raise DimensionMismatch("coupling must be square")
    comm = frob(l @ l.conj().T - l.conj().T @ l)
    if comm > tol.bound(max(1.0, frob(l) ** 2)):
        return ClassicalityVerdict(ClassicalityKind.NOT_CLASSICAL, float(comm))

    eigs = np.linalg.eigvals(l)
    spread = float(np.abs(eigs[:, None] - eigs[None, :]).max(initial=0.0))
    eps = tol.bound(max(1.0, spread))
    unique = _cluster_points(eigs, eps)

    if len(unique) <= 2:
        if len(unique) == 2:
            delta = unique[1] - unique[0]
            line = LineFit(complex(unique[0]), complex(delta / abs(delta)))
            circle = CircleFit(complex((unique[0] + unique[1]) / 2), abs(delta) / 2)
        else:
            line = LineFit(complex(unique[0]), 1 + 0j)
            circle = CircleFit(complex(unique[0]), 0.0)
        return ClassicalityVerdict(ClassicalityKind.BOTH, 0.0, line, circle)

    pts = np.array(unique)
    xy = np.column_stack([pts.real, pts.imag])
    centroid = xy.mean(axis=0)
    centered = xy - centroid
    _, _, vt = np.linalg.svd(centered, full_matrices=False)
    direction, normal = vt[0], vt[1]
    res_line = float(np.abs(centered @ normal).max())
    line = LineFit(
        complex(centroid[0], centroid[1]), complex(direction[0], direction[1])
    )

    # Kasa normal equations: 2 cx x + 2 cy y + c = x^2 + y^2.
    a = np.column_stack([2 * xy[:, 0], 2 * xy[:, 1], np.ones(len(pts))])
    b = (xy**2).sum(axis=1)
    sol, *_ = np.linalg.lstsq(a, b, rcond=None)
    cx, cy, c = sol
    r2 = c + cx**2 + cy**2
    if r2 > 0:
        radius = float(np.sqrt(r2))
        dist = np.abs(pts - complex(cx, cy))
        res_circle = float(np.abs(dist - radius).max())
        circle = CircleFit(complex(cx, cy), radius)
    else:
        res_circle = np.inf
        circle = None

    threshold = tol.bound(max(1.0, spread))
    line_ok = res_line <= threshold
    circle_ok = res_circle <= threshold
    if line_ok and circle_ok:
        return ClassicalityVerdict(
            ClassicalityKind.BOTH, min(res_line, res_circle), line, circle
        )
    if line_ok:
        return ClassicalityVerdict(ClassicalityKind.LINE, res_line, line, None)
    if circle_ok:
        return ClassicalityVerdict(ClassicalityKind.CIRCLE, res_circle, None, circle)
    return ClassicalityVerdict(
        ClassicalityKind.NOT_CLASSICAL, float(min(res_line, res_circle))
    )


def _diag_in_basis(a: np.ndarray, u: np.ndarray, tol: Tolerance, name: str) -> np.ndarray:
    d = u.conj().T @ a @ u
    off = d - np.diag(np.diag(d))
    if frob(off) > tol.bound(max(1.0, frob(a))):
        raise NotDiagonal(f"{name} is not diagonal in the given basis")
    return np.diag(d).copy()


def jump_dephasing_coefficients(
    model: ClassicalModel, basis=None, tol: Tolerance = DEFAULT_TOL
) -> np.ndarray:
    """Block eigenvalues of a diagonal classical model.

    With jump phases theta_{j,n}, diffusion diagonals r_{k,n} and
    Hamiltonian diagonal eps_n (all in ``basis``, default the standard
    one), the coefficient on |n><m| is

        z_nm = sum_j nu_j (e^{-i(theta_{j,n} - theta_{j,m})} - 1)
               - 1/2 sum_k (r_{k,n} - r_{k,m})^2 + i(eps_n - eps_m).
    """
    model.validate(tol)
    n = model.dim
    u = np.eye(n, dtype=complex) if basis is None else as_matrix(basis, "basis")
    if u.shape != (n, n):
        raise DimensionMismatch("basis must match the model dimension")
    z = np.zeros((n, n), dtype=complex)
    for i, j in enumerate(model.jumps):
        theta = np.angle(_diag_in_basis(j.s, u, tol, f"jumps[{i}]"))
        diff = theta[:, None] - theta[None, :]
        z += j.nu * (np.exp(-1j * diff) - 1.0)
    for i, d in enumerate(model.diffusions):
        r = _diag_in_basis(d.r, u, tol, f"diffusions[{i}]").real
        z -= 0.5 * (r[:, None] - r[None, :]) ** 2
    eps = _diag_in_basis(model.hamiltonian, u, tol, "hamiltonian").real
    z = z + 1j * (eps[:, None] - eps[None, :])
    np.fill_diagonal(z, 0.0)
    return z


def obstruction_from_phases(model: ClassicalModel, tol: Tolerance = DEFAULT_TOL) -> np.ndarray:
    """Obstruction tensor of a diagonal classical model from its jump phases.

    Diffusion channels are real and contribute nothing; the obstruction is
    carried entirely by the Poisson phases:

        Delta_nml = sum_j nu_j [ sin(th_m - th_n) + sin(th_l - th_m)
                                 + sin(th_n - th_l) ]  (phases of channel j).
    """
    model.validate(tol)
    n = model.dim
    u = np.eye(n, dtype=complex)
    for i, d in enumerate(model.diffusions):
        _diag_in_basis(d.r, u, tol, f"diffusions[{i}]")
    _diag_in_basis(model.hamiltonian, u, tol, "hamiltonian")
    delta = np.zeros((n, n, n))
    for i, j in enumerate(model.jumps):
        theta = np.angle(_diag_in_basis(j.s, u, tol, f"jumps[{i}]"))
        areas = j.nu * np.sin(theta[None, :] - theta[:, None])
        delta += _delta_from_areas(areas)
    return delta


def admits_diffusive_dilation(spec: GeneratorSpec, tol: Tolerance = DEFAULT_TOL):
    """Decide whether purely diffusive classical noise can dilate the semigroup.

    After centering the coupling columns (a gauge move), the verdict is
    positive iff all signed areas vanish; the returned model carries the
    Hermitian couplings of :func:`self_adjoint_representation` as
    diffusion channels, with per-state variances equal to the squared
    lengths of the centered columns.
    """
    ok, report = is_maximally_dephasing(spec, tol)
    if report is None or not ok:
        raise NotMaximallyDephasing("spec is not maximally dephasing")
    fc, _ = center_coupling_columns(report.coupling)
    areas_c = np.imag(fc.conj().T @ fc)
    scale = max(1.0, float(np.abs(fc).max(initial=0.0)) ** 2)
    if float(np.abs(areas_c).max(initial=0.0)) > tol.bound(scale):
        return False, None

    rep = self_adjoint_representation(spec, tol)
    model = ClassicalModel(
        jumps=(),
        diffusions=tuple(DiffusionChannel(r) for r in rep.couplings),
        hamiltonian=rep.hamiltonian,
    )
    sigma_sq = np.real(np.diag(fc.conj().T @ fc))
    r_diag = np.array(
        [np.real(np.diag(report.stable_basis.conj().T @ d.r @ report.stable_basis))
         for d in model.diffusions]
    )
    var = (r_diag**2).sum(axis=0) if r_diag.size else np.zeros(spec.dim)
    if float(np.abs(var - sigma_sq).max(initial=0.0)) > 1e-8 * max(1.0, sigma_sq.max(initial=0.0)):
        raise ArithmeticError("per-state variances do not match the centered columns")
    return True, model


def verify_classical_model(
    model: ClassicalModel, spec: GeneratorSpec, tol: Tolerance = DEFAULT_TOL
) -> bool:
    """True iff the model's generator matches the spec's, as superoperators."""
    if model.dim != spec.dim:
        raise DimensionMismatch("model and spec dimensions differ")
    m_model = to_superoperator(classical_to_generator(model, tol), HEISENBERG).matrix
    m_spec = to_superoperator(spec, HEISENBERG).matrix
    return frob(m_model - m_spec) <= tol.bound(max(1.0, frob(m_spec)))
