"""Monte Carlo simulation of classical unitary dilations.

Trajectories are random unitaries V(t) driven by Wiener phases, Poisson
kicks, and a deterministic Hamiltonian.  Averaging the conjugations
X -> V^dag X V over trajectories estimates the semigroup map, which is
then compared entrywise against the exact ``exp(t L)``.

Reproducibility contract: trajectory ``i`` draws from a counter-based
stream derived from ``(master_seed, i)``; accumulation happens in fixed
chunks of :data:`CHUNK_SIZE` trajectories reduced in chunk order, so the
result is bit-identical for any worker count.  Draw order per trajectory:
on the commuting path, one block of Gaussian increments (times x
diffusion channels) then one block of Poisson counts (times x jump
channels); on the Trotterized path, per output interval one Gaussian
block (steps x diffusion channels) then one uniform block (steps x jump
channels) for kick thinning.
"""

from __future__ import annotations

import concurrent.futures
import csv
import math
from dataclasses import dataclass

import numpy as np

from ._backend import kernels
from .dilation import ClassicalModel, classical_to_generator
from .errors import (
    InvalidModel,
    NotCommuting,
    NotNormal,
    NotSimultaneouslyDiagonalizable,
)
from .linalg import (
    DEFAULT_TOL,
    Tolerance,
    herm_eig,
    matrix_exp,
    simultaneous_diagonalize,
)
from .semigroup import HEISENBERG, to_superoperator

__all__ = [
    "EXACT_COMMUTING",
    "TROTTERIZED",
    "AUTO",
    "CHUNK_SIZE",
    "SimulationConfig",
    "EmpiricalChannel",
    "ComparisonReport",
    "trajectory_rng",
    "sample_trajectory",
    "ensemble_average",
    "compare_to_semigroup",
    "write_comparison_csv",
]

EXACT_COMMUTING = "exact_commuting"
TROTTERIZED = "trotterized"
AUTO = "auto"

CHUNK_SIZE = 1024        # fixed: reduction granularity, independent of workers
MAX_JUMP_PROB = 0.1      # enforced ceiling on nu_j * dt for kick thinning


@dataclass(frozen=True)
class SimulationConfig:
    """Time grid, ensemble size, seeding and stepping choices."""

    times: tuple
    n_traj: int
    master_seed: int
    dt: float = 0.01
    mode: str = AUTO

    def __post_init__(self):
        t = tuple(float(x) for x in self.times)
        if not t:
            raise ValueError("times must be nonempty")
        if any(x < 0 for x in t) or any(b < a for a, b in zip(t, t[1:])):
            raise ValueError("times must be nonnegative and ascending")
        object.__setattr__(self, "times", t)
        object.__setattr__(self, "n_traj", int(self.n_traj))
        object.__setattr__(self, "master_seed", int(self.master_seed))
        object.__setattr__(self, "dt", float(self.dt))
        if self.n_traj < 2:
            raise ValueError("n_traj must be at least 2")
        if self.dt <= 0:
            raise ValueError("dt must be positive")
        if self.mode not in (EXACT_COMMUTING, TROTTERIZED, AUTO):
            raise ValueError(f"unknown mode {self.mode!r}")
        if self.mode == TROTTERIZED:
            gaps = np.diff(np.concatenate([[0.0], np.asarray(t)]))
            pos = gaps[gaps > 0]
            if pos.size and self.dt > pos.min() + 1e-15:
                raise ValueError("dt must not exceed the smallest positive time gap")


@dataclass(frozen=True)
class EmpiricalChannel:
    """Ensemble-averaged Heisenberg maps with entrywise standard errors."""

    times: tuple
    mean_maps: tuple       # per-time (N^2, N^2) complex matrices
    stderr: tuple          # per-time largest entrywise standard error
    stderr_entries: tuple  # per-time (N^2, N^2) float arrays
    n_traj: int


@dataclass(frozen=True)
class ComparisonReport:
    times: tuple
    max_abs_deviation: tuple
    stderr: tuple
    deviation_over_stderr: tuple
    passed: bool


def trajectory_rng(master_seed: int, index: int) -> np.random.Generator:
    """Counter-based stream for one trajectory, independent of scheduling."""
    ss = np.random.SeedSequence(master_seed, spawn_key=(index,))
    return np.random.Generator(np.random.Philox(ss))


# ---------------------------------------------------------------------------
# model preprocessing


@dataclass(frozen=True)
class _DiagonalData:
    """Joint eigenbasis data for the commuting path."""

    u: np.ndarray        # (N, N) unitary
    hdiag: np.ndarray    # (N,) real
    thetas: np.ndarray   # (J, N) jump phases, principal branch
    rdiags: np.ndarray   # (K, N) diffusion eigenvalues
    rates: np.ndarray    # (J,)


def _commuting_data(model: ClassicalModel, tol: Tolerance):
    """Diagonalize {H, S_j, R_k} jointly, or return None if impossible."""
    n = model.dim
    ops = [model.hamiltonian] + [j.s for j in model.jumps] + [d.r for d in model.diffusions]
    try:
        u, diags = simultaneous_diagonalize(ops, tol)
    except (NotNormal, NotCommuting, NotSimultaneouslyDiagonalizable):
        return None
    nj = len(model.jumps)
    nk = len(model.diffusions)
    hdiag = diags[0].real
    thetas = np.array([np.angle(diags[1 + i]) for i in range(nj)]).reshape(nj, n)
    rdiags = np.array([diags[1 + nj + i].real for i in range(nk)]).reshape(nk, n)
    rates = np.array([j.nu for j in model.jumps], dtype=float)
    return _DiagonalData(u, hdiag, thetas, rdiags, rates)


@dataclass(frozen=True)
class _TrotterData:
    """Precomputed factors for the stepping path."""

    jump_ops: np.ndarray    # (J, N, N)
    diff_vecs: np.ndarray   # (K, N, N)
    diff_vals: np.ndarray   # (K, N)
    rates: np.ndarray       # (J,)
    hamiltonian: np.ndarray


def _trotter_data(model: ClassicalModel, tol: Tolerance) -> _TrotterData:
    n = model.dim
    nj, nk = len(model.jumps), len(model.diffusions)
    jump_ops = np.array([j.s for j in model.jumps], dtype=complex).reshape(nj, n, n)
    diff_vecs = np.empty((nk, n, n), dtype=complex)
    diff_vals = np.empty((nk, n), dtype=float)
    for k, d in enumerate(model.diffusions):
        w, u = herm_eig(d.r, tol)
        diff_vals[k] = w
        diff_vecs[k] = u
    rates = np.array([j.nu for j in model.jumps], dtype=float)
    return _TrotterData(jump_ops, diff_vecs, diff_vals, rates, np.array(model.hamiltonian))


def _resolve_mode(model: ClassicalModel, mode: str, tol: Tolerance):
    """Pick the sampling path and its preprocessed data."""
    if mode == TROTTERIZED:
        return TROTTERIZED, _trotter_data(model, tol)
    data = _commuting_data(model, tol)
    if data is not None:
        return EXACT_COMMUTING, data
    if mode == EXACT_COMMUTING:
        raise NotCommuting("model operators do not commute; use the Trotterized mode")
    return TROTTERIZED, _trotter_data(model, tol)


def _check_jump_probability(rates: np.ndarray, dt: float):
    if rates.size and float(rates.max()) * dt > MAX_JUMP_PROB + 1e-12:
        raise InvalidModel(
            f"nu * dt = {float(rates.max()) * dt:.3g} exceeds {MAX_JUMP_PROB}; "
            "reduce dt for the Trotterized path"
        )


def _intervals(times) -> np.ndarray:
    t = np.asarray(times, dtype=float)
    return np.diff(np.concatenate([[0.0], t]))


def _steps_for(delta: float, dt: float):
    n_steps = max(1, int(math.ceil(delta / dt - 1e-12))) if delta > 0 else 1
    return n_steps, delta / n_steps


# ---------------------------------------------------------------------------
# per-trajectory sampling


def _exact_phases(rng, data: _DiagonalData, intervals: np.ndarray) -> np.ndarray:
    """Accumulated diagonal phases (T, N) for one trajectory.

    The sampled unitary is V = U exp(-i phase) U^dag.  Jump counts enter
    with a minus sign so that each kick applies S itself (V restricted to
    a jump-only channel is S^{N(t)}, matching the stepped path).
    """
    nt = intervals.size
    nk = data.rdiags.shape[0]
    nj = data.thetas.shape[0]
    dw = rng.normal(size=(nt, nk)) * np.sqrt(intervals)[:, None]
    dn = rng.poisson(lam=intervals[:, None] * data.rates[None, :], size=(nt, nj))
    w = np.cumsum(dw, axis=0)
    cnt = np.cumsum(dn, axis=0)
    t_acc = np.cumsum(intervals)
    return w @ data.rdiags - cnt @ data.thetas + t_acc[:, None] * data.hdiag[None, :]


def _trotter_noise(rng, n_steps: int, h: float, data: _TrotterData):
    nk = data.diff_vals.shape[0]
    nj = data.rates.size
    dw = rng.normal(size=(n_steps, nk)) * math.sqrt(h)
    kicks = (rng.random(size=(n_steps, nj)) < data.rates[None, :] * h).astype(np.uint8)
    return dw, kicks


def _diag_unitaries(u: np.ndarray, phases: np.ndarray) -> np.ndarray:
    """V = U diag(e^{-i phase}) U^dag for a (..., N) phase array."""
    p = np.exp(-1j * phases)
    return np.einsum("ab,...b,db->...ad", u, p, u.conj())


def sample_trajectory(
    model: ClassicalModel,
    times,
    rng: np.random.Generator,
    mode: str = AUTO,
    dt: float = 0.01,
    tol: Tolerance = DEFAULT_TOL,
) -> list:
    """One realization of the dilation unitary at each requested time.

    On the commuting path the exact solution
    ``V(t) = exp(-i [sum_k R_k W_k(t) + sum_j Theta_j N_j(t) + H t])`` is
    sampled on the grid; otherwise the evolution is advanced in steps of
    at most ``dt`` (jumps thinned to at most one kick per channel per
    step, requiring nu * dt <= 0.1).
    """
    model.validate(tol)
    cfg_times = np.asarray(times, dtype=float).reshape(-1)
    if cfg_times.size == 0:
        return []
    if np.any(cfg_times < 0) or np.any(np.diff(cfg_times) < 0):
        raise ValueError("times must be nonnegative and ascending")
    path, data = _resolve_mode(model, mode, tol)
    intervals = _intervals(cfg_times)

    if path == EXACT_COMMUTING:
        phases = _exact_phases(rng, data, intervals)
        return [np.ascontiguousarray(v) for v in _diag_unitaries(data.u, phases)]

    _check_jump_probability(data.rates, dt)
    n = model.dim
    v = np.eye(n, dtype=complex)[None, :, :].copy()
    out = []
    for delta in intervals:
        n_steps, h = _steps_for(delta, dt)
        dw, kicks = _trotter_noise(rng, n_steps, h, data)
        ham_step = matrix_exp(-1j * h * data.hamiltonian)
        kernels.trotter_advance(
            v,
            np.ascontiguousarray(ham_step),
            data.jump_ops,
            kicks[None, :, :].copy(),
            data.diff_vecs,
            data.diff_vals,
            dw[None, :, :].copy(),
        )
        out.append(v[0].copy())
    return out


# ---------------------------------------------------------------------------
# ensemble averaging


def _chunk_sums(model, config, path, start, stop, tol):
    """Partial (sum, sum of squares) of the conjugation maps over one chunk."""
    n = model.dim
    nt = len(config.times)
    c = stop - start
    out_sum = np.zeros((nt, n * n, n * n), dtype=complex)
    out_sq = np.zeros((nt, n * n, n * n), dtype=float)
    intervals = _intervals(config.times)

    if path == EXACT_COMMUTING:
        data = _commuting_data(model, tol)
        phases = np.empty((c, nt, n), dtype=float)
        for ci, idx in enumerate(range(start, stop)):
            rng = trajectory_rng(config.master_seed, idx)
            phases[ci] = _exact_phases(rng, data, intervals)
        v = np.ascontiguousarray(_diag_unitaries(data.u, phases))
        kernels.accumulate_conjugation_maps(v, out_sum, out_sq)
        return out_sum, out_sq

    data = _trotter_data(model, tol)
    _check_jump_probability(data.rates, config.dt)
    nk = data.diff_vals.shape[0]
    nj = data.rates.size
    rngs = [trajectory_rng(config.master_seed, idx) for idx in range(start, stop)]
    v = np.tile(np.eye(n, dtype=complex), (c, 1, 1))
    snapshots = np.empty((c, nt, n, n), dtype=complex)
    for ti, delta in enumerate(intervals):
        n_steps, h = _steps_for(delta, config.dt)
        dws = np.empty((c, n_steps, nk), dtype=float)
        kicks = np.empty((c, n_steps, nj), dtype=np.uint8)
        for ci, rng in enumerate(rngs):
            dws[ci], kicks[ci] = _trotter_noise(rng, n_steps, h, data)
        ham_step = np.ascontiguousarray(matrix_exp(-1j * h * data.hamiltonian))
        kernels.trotter_advance(v, ham_step, data.jump_ops, kicks, data.diff_vecs,
                                data.diff_vals, dws)
        snapshots[:, ti] = v
    kernels.accumulate_conjugation_maps(np.ascontiguousarray(snapshots), out_sum, out_sq)
    return out_sum, out_sq


def _chunk_worker(args):
    model, config, path, start, stop, tol = args
    return _chunk_sums(model, config, path, start, stop, tol)


def ensemble_average(
    model: ClassicalModel,
    config: SimulationConfig,
    n_workers: int = 1,
    tol: Tolerance = DEFAULT_TOL,
) -> EmpiricalChannel:
    """Estimate the Heisenberg maps by averaging over sampled trajectories.

    Chunks of :data:`CHUNK_SIZE` trajectories are reduced in index order,
    so the output is bit-identical for any ``n_workers``.
    """
    model.validate(tol)
    path, _ = _resolve_mode(model, config.mode, tol)
    n = model.dim
    nt = len(config.times)

    bounds = [
        (s, min(s + CHUNK_SIZE, config.n_traj))
        for s in range(0, config.n_traj, CHUNK_SIZE)
    ]
    args = [(model, config, path, s, e, tol) for s, e in bounds]
    total_sum = np.zeros((nt, n * n, n * n), dtype=complex)
    total_sq = np.zeros((nt, n * n, n * n), dtype=float)
    if n_workers > 1 and len(args) > 1:
        with concurrent.futures.ProcessPoolExecutor(max_workers=n_workers) as pool:
            for part_sum, part_sq in pool.map(_chunk_worker, args):
                total_sum += part_sum
                total_sq += part_sq
    else:
        for a in args:
            part_sum, part_sq = _chunk_worker(a)
            total_sum += part_sum
            total_sq += part_sq

    n_traj = config.n_traj
    means, ses, scalars = [], [], []
    for ti in range(nt):
        mean = total_sum[ti] / n_traj
        var = np.maximum(total_sq[ti] - n_traj * np.abs(mean) ** 2, 0.0) / (n_traj - 1)
        se = np.sqrt(var / n_traj)
        means.append(mean)
        ses.append(se)
        scalars.append(float(se.max()))
    return EmpiricalChannel(
        times=tuple(config.times),
        mean_maps=tuple(means),
        stderr=tuple(scalars),
        stderr_entries=tuple(ses),
        n_traj=n_traj,
    )


def compare_to_semigroup(
    model: ClassicalModel,
    config: SimulationConfig,
    reference: ClassicalModel | None = None,
    empirical: EmpiricalChannel | None = None,
    n_workers: int = 1,
    tol: Tolerance = DEFAULT_TOL,
) -> ComparisonReport:
    """Entrywise comparison of the empirical maps against exp(t L).

    The reference generator defaults to the simulated model's own; pass
    ``reference`` to run a negative control.  An entry passes when its
    deviation is at most max(5 * stderr, 1e-6), with stderr the largest
    entrywise standard error at that time.
    """
    if empirical is None:
        empirical = ensemble_average(model, config, n_workers=n_workers, tol=tol)
    gen = classical_to_generator(reference if reference is not None else model, tol)
    m = to_superoperator(gen, HEISENBERG).matrix
    devs, units = [], []
    passed = True
    for ti, t in enumerate(empirical.times):
        exact = matrix_exp(t * m)
        dev = float(np.abs(empirical.mean_maps[ti] - exact).max())
        se = empirical.stderr[ti]
        devs.append(dev)
        units.append(dev / se if se > 0 else (0.0 if dev == 0 else math.inf))
        if dev > max(5 * se, 1e-6):
            passed = False
    return ComparisonReport(
        times=tuple(empirical.times),
        max_abs_deviation=tuple(devs),
        stderr=tuple(empirical.stderr),
        deviation_over_stderr=tuple(units),
        passed=passed,
    )


def write_comparison_csv(report: ComparisonReport, path) -> None:
    """CSV export: t, max_abs_dev, stderr, dev_over_stderr."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["t", "max_abs_dev", "stderr", "dev_over_stderr"])
        for t, dev, se, unit in zip(
            report.times,
            report.max_abs_deviation,
            report.stderr,
            report.deviation_over_stderr,
        ):
            writer.writerow([repr(t), repr(dev), repr(se), repr(unit)])
