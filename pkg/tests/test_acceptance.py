"""Acceptance criteria.

Each test prints one PASS/FAIL line (visible with ``pytest -s``) and
enforces its stated tolerances with plain assertions.
"""

import time
from contextlib import contextmanager

import numpy as np
import pytest

import qmskit
from qmskit import (
    ClassicalModel,
    ClassicalityKind,
    DiffusionChannel,
    EuclideanTransform,
    GeneratorSpec,
    HEISENBERG,
    JumpChannel,
    Obstructed,
    SCHRODINGER,
    SimulationConfig,
    SlhTriple,
    admits_diffusive_dilation,
    block_eigenvalues,
    classical_to_generator,
    compare_to_semigroup,
    coupling_matrix,
    ensemble_average,
    euclidean_transform,
    family_commutant_check,
    find_stable_basis,
    is_bistochastic,
    is_dephasing_family,
    is_maximally_dephasing,
    is_minimal,
    km_rank1_classical_test,
    matrix_exp,
    max_rank_check,
    self_adjoint_representation,
    to_superoperator,
    vec,
    verify_classical_model,
)

from conftest import (
    SMINUS,
    SZ,
    exchange_eigenbasis_family,
    max_rank_qutrit_spec,
    obstructed_qutrit_spec,
    random_complex,
    random_dephasing_spec,
    random_hermitian,
    random_spec,
    random_unitary,
    sz_sector_family,
    two_qubit_exchange_spec,
)


@contextmanager
def criterion(num, name):
    try:
        yield
    except Exception:
        print(f"[criterion {num:02d}] FAIL - {name}")
        raise
    print(f"[criterion {num:02d}] PASS - {name}")


def superop(spec):
    return to_superoperator(spec, HEISENBERG).matrix


def random_gauged_spec(rng, spec):
    d = spec.multiplicity
    triple = SlhTriple.from_parts(spec.couplings, spec.hamiltonian)
    e = EuclideanTransform(
        random_unitary(rng, d), random_complex(rng, (d,)), float(rng.normal())
    )
    return euclidean_transform(triple, e).generator_spec()


def test_criterion_01_amplitude_damping_solution():
    with criterion(1, "amplitude damping closed-form solution, runtime < 1 s"):
        start = time.perf_counter()
        spec = GeneratorSpec((SMINUS,), np.zeros((2, 2)))
        times = np.linspace(0.0, 5.0, 41)

        excited = np.diag([1.0, 0.0]).astype(complex)
        for t, rho in zip(times, qmskit.evolve(spec, excited, times, SCHRODINGER)):
            assert abs(rho[0, 0] - np.exp(-t)) <= 1e-10

        mixed = np.array([[0.6, 0.25 - 0.1j], [0.25 + 0.1j, 0.4]])
        for t, rho in zip(times, qmskit.evolve(spec, mixed, times, SCHRODINGER)):
            assert abs(rho[0, 0] - 0.6 * np.exp(-t)) <= 1e-10
            assert abs(rho[0, 1] - (0.25 - 0.1j) * np.exp(-t / 2)) <= 1e-10
        elapsed = time.perf_counter() - start
        assert elapsed < 1.0, f"took {elapsed:.2f}s"


def test_criterion_02_dephasing_block_structure():
    with criterion(2, "dephasing populations constant, rate matches -Re z01"):
        gamma = 0.9
        spec = GeneratorSpec((np.sqrt(gamma) * SZ,), np.zeros((2, 2)))
        rho0 = np.array([[0.55, 0.4], [0.4, 0.45]], dtype=complex)
        times = np.linspace(0.0, 3.0, 16)

        rep = block_eigenvalues(coupling_matrix(spec, find_stable_basis(spec)))
        z01 = rep.z[0, 1]
        for t, rho in zip(times, qmskit.evolve(spec, rho0, times, SCHRODINGER)):
            assert abs(rho[0, 0] - 0.55) <= 1e-12
            assert abs(rho[1, 1] - 0.45) <= 1e-12
            assert abs(rho[0, 1] - 0.4 * np.exp(z01 * t)) <= 1e-10

        # z01 is an eigenvalue of the Heisenberg superoperator on |0><1|.
        m = superop(spec)
        e01 = np.zeros((2, 2), dtype=complex)
        e01[0, 1] = 1.0
        resid = np.linalg.norm(m @ vec(e01) - z01 * vec(e01))
        assert resid <= 1e-10
        # Decay rate is 2*gamma for the sqrt(gamma)*sigma_z coupling; logged,
        # not asserted against the bare coefficient.
        print(f"    note: coherence decays at -Re z01 = {-z01.real:.6g} = 2*gamma")


def test_criterion_03_obstruction_worked_example():
    with criterion(3, "qutrit obstruction Delta_123 = -5 blocks self-adjoint form"):
        spec = obstructed_qutrit_spec()
        ok, rep = is_maximally_dephasing(spec)
        assert ok
        # In the model's own diagonal labeling (the tensor is antisymmetric,
        # so the value is labeling-dependent; the canonical sorted basis may
        # permute indices and flip the sign).
        f_nat = coupling_matrix(spec, np.eye(3, dtype=complex))
        delta_nat = qmskit.obstruction(f_nat)
        assert abs(delta_nat[0, 1, 2] - (-5.0)) <= 1e-12
        assert np.abs(rep.delta).max() == pytest.approx(5.0, abs=1e-12)
        gammas = block_eigenvalues(f_nat).gamma
        for pair in ((0, 1), (1, 2), (2, 0)):
            assert gammas[pair] > 0
        with pytest.raises(Obstructed) as err:
            self_adjoint_representation(spec)
        assert err.value.max_delta == pytest.approx(5.0, abs=1e-12)


def test_criterion_04_two_qubit_exchange_families():
    with criterion(4, "exchange model: sector family dephases, eigenbasis fails"):
        start = time.perf_counter()
        spec = two_qubit_exchange_spec()
        fam = sz_sector_family()
        assert family_commutant_check(spec, fam)
        assert is_dephasing_family(spec, fam)
        assert not family_commutant_check(spec, exchange_eigenbasis_family())
        elapsed = time.perf_counter() - start
        assert elapsed < 1.0, f"took {elapsed:.2f}s"


def test_criterion_05_euclidean_invariance():
    with criterion(5, "generator and obstruction invariant under 100 gauges"):
        rng = np.random.default_rng(501)
        for _ in range(100):
            n = int(rng.integers(2, 5))
            d = int(rng.integers(1, 4))
            spec = random_spec(rng, n, d)
            gauged = random_gauged_spec(rng, spec)
            m0, m1 = superop(spec), superop(gauged)
            assert np.linalg.norm(m0 - m1) <= 1e-10 * max(1, np.linalg.norm(m0))

            deph = random_dephasing_spec(rng, n, d)
            u = find_stable_basis(deph)
            delta0 = qmskit.obstruction(coupling_matrix(deph, u))
            gauged_deph = random_gauged_spec(rng, deph)
            delta1 = qmskit.obstruction(coupling_matrix(gauged_deph, u))
            assert np.abs(delta0 - delta1).max() <= 1e-10


def _obstruction_free_specs(rng, count):
    specs = []
    while len(specs) < count:
        n = int(rng.integers(2, 6))
        d = int(rng.integers(1, n))
        base = random_dephasing_spec(rng, n, d, complex_cols=False)
        specs.append(random_gauged_spec(rng, base))
    return specs


def test_criterion_06_self_adjointization_round_trip():
    with criterion(6, "50 obstruction-free specs rewritten with Hermitian couplings"):
        rng = np.random.default_rng(601)
        for spec in _obstruction_free_specs(rng, 50):
            out = self_adjoint_representation(spec)
            for l in out.couplings:
                assert np.linalg.norm(l - l.conj().T) <= 1e-10
            m0, m1 = superop(spec), superop(out)
            assert np.linalg.norm(m0 - m1) <= 1e-9 * max(1, np.linalg.norm(m0))


def test_criterion_07_diffusive_dilation_iff():
    with criterion(7, "diffusive dilation exists iff the obstruction vanishes"):
        rng = np.random.default_rng(701)
        for spec in _obstruction_free_specs(rng, 50):
            ok, model = admits_diffusive_dilation(spec)
            assert ok
            assert verify_classical_model(model, spec)

        found = 0
        while found < 20:
            n = int(rng.integers(3, 6))
            d = int(rng.integers(2, 4))
            spec = random_dephasing_spec(rng, n, d, complex_cols=True)
            _, rep = is_maximally_dephasing(spec)
            if np.abs(rep.delta).max() < 0.05:
                continue
            ok, model = admits_diffusive_dilation(spec)
            assert not ok and model is None
            found += 1


def test_criterion_08_monte_carlo_jump_dephasing():
    with criterion(8, "10^5-trajectory jump dephasing within 5 sigma, < 60 s"):
        start = time.perf_counter()
        nu, theta = 1.0, np.pi / 3
        s = np.diag([1.0, np.exp(1j * theta)])
        model = ClassicalModel((JumpChannel(s, nu),), (), np.zeros((2, 2)))
        times = (0.5, 1.0, 2.0)
        config = SimulationConfig(times=times, n_traj=100_000, master_seed=808)
        emp = ensemble_average(model, config)

        for ti, t in enumerate(times):
            expected = np.exp(nu * (np.exp(1j * theta) - 1) * t)
            got = emp.mean_maps[ti][2, 2]  # coefficient on |0><1|
            se = emp.stderr_entries[ti][2, 2]
            assert abs(got - expected) <= 5 * se

        report = compare_to_semigroup(model, config, empirical=emp)
        assert report.passed

        doubled = ClassicalModel((JumpChannel(s, 2 * nu),), (), np.zeros((2, 2)))
        control = compare_to_semigroup(model, config, reference=doubled, empirical=emp)
        assert not control.passed

        elapsed = time.perf_counter() - start
        assert elapsed < 60.0, f"took {elapsed:.2f}s"
        print(f"    single-threaded runtime: {elapsed:.2f}s")


def _sampled_purity_increase(spec, n_states, rng):
    """Largest grid-step purity increase over sampled initial states."""
    n = spec.dim
    ms = to_superoperator(spec, SCHRODINGER).matrix
    horizon = 5.0 / max(np.linalg.norm(ms), 1e-6)
    step = matrix_exp((horizon / 50.0) * ms)

    states = [np.eye(n, dtype=complex) / n]
    for _ in range(n_states - 1):
        a = random_complex(rng, (n, n))
        rho = a @ a.conj().T
        states.append(rho / np.trace(rho))
    cols = np.column_stack([vec(rho) for rho in states])

    worst = -np.inf
    purity = np.sum(np.abs(cols) ** 2, axis=0)
    for _ in range(50):
        cols = step @ cols
        nxt = np.sum(np.abs(cols) ** 2, axis=0)
        worst = max(worst, float((nxt - purity).max()))
        purity = nxt
    return worst


def test_criterion_09_purity_monotonicity_iff_bistochastic():
    with criterion(9, "purity non-increasing exactly for bistochastic generators"):
        rng = np.random.default_rng(901)
        for i in range(50):
            if i % 2 == 0:
                ls = []
                for _ in range(2):
                    u = random_unitary(rng, 3)
                    ls.append(u @ np.diag(random_complex(rng, (3,))) @ u.conj().T)
                spec = GeneratorSpec(tuple(ls), random_hermitian(rng, 3))
            else:
                spec = random_spec(rng, 3, 2)
            worst = _sampled_purity_increase(spec, 21, rng)
            if is_bistochastic(spec):
                assert worst <= 1e-8
            else:
                assert worst > 1e-8

        damping = GeneratorSpec((SMINUS,), np.zeros((2, 2)))
        times = np.linspace(0.0, 3.0, 31)
        p = qmskit.purity_trajectory(damping, np.eye(2) / 2, times)
        assert np.all(np.diff(p) > 0)


def test_criterion_10_rank_bound():
    with criterion(10, "minimal maximally dephasing specs obey d <= N - 1"):
        rng = np.random.default_rng(1001)
        checked = 0
        while checked < 40:
            n = int(rng.integers(2, 6))
            d = int(rng.integers(1, n + 1))
            spec = random_dephasing_spec(rng, n, d)
            if not is_minimal(spec):
                continue
            ok, _ = is_maximally_dephasing(spec)
            if not ok:
                continue
            assert spec.multiplicity <= spec.dim - 1
            checked += 1

        qutrit = max_rank_qutrit_spec()
        assert is_minimal(qutrit)
        assert max_rank_check(qutrit)
        assert qutrit.multiplicity == qutrit.dim - 1


def test_criterion_11_classical_generator_equivalences():
    with criterion(11, "jump/diffusion equivalence and line-circle verdicts"):
        gamma = 0.8
        jump = ClassicalModel((JumpChannel(SZ, gamma),), (), np.zeros((2, 2)))
        diff = ClassicalModel(
            (), (DiffusionChannel(np.sqrt(gamma) * SZ),), np.zeros((2, 2))
        )
        m_jump = superop(classical_to_generator(jump))
        m_diff = superop(classical_to_generator(diff))
        assert np.linalg.norm(m_jump - m_diff) <= 1e-12

        assert km_rank1_classical_test(SZ).kind is ClassicalityKind.BOTH
        assert km_rank1_classical_test(SMINUS).kind is ClassicalityKind.NOT_CLASSICAL
        assert (
            km_rank1_classical_test(np.diag([1.0, 1j, -1.0])).kind
            is ClassicalityKind.CIRCLE
        )
