import numpy as np
import pytest

from qmskit import (
    DimensionMismatch,
    EuclideanTransform,
    GeneratorSpec,
    HEISENBERG,
    InvalidState,
    SlhTriple,
    center,
    complex_damping,
    concatenation,
    euclidean_transform,
    is_minimal,
    reduce_to_minimal,
    series_product,
    to_superoperator,
    validate,
)

from conftest import (
    SMINUS,
    SX,
    SY,
    SZ,
    random_complex,
    random_hermitian,
    random_unitary,
)


def dephasing_triple(gamma=1.0):
    return SlhTriple.from_parts((np.sqrt(gamma) * SZ,), np.zeros((2, 2)))


def superop(triple_or_spec):
    spec = (
        triple_or_spec.generator_spec()
        if isinstance(triple_or_spec, SlhTriple)
        else triple_or_spec
    )
    return to_superoperator(spec, HEISENBERG).matrix


def random_triple(rng, n, d):
    ls = tuple(random_complex(rng, (n, n)) for _ in range(d))
    s = np.linalg.qr(random_complex(rng, (d * n, d * n)))[0] if d else np.zeros((0, 0))
    return SlhTriple(s, ls, random_hermitian(rng, n))


def random_euclidean(rng, d):
    t = random_unitary(rng, d) if d else np.zeros((0, 0))
    beta = random_complex(rng, (d,))
    return EuclideanTransform(t, beta, float(rng.normal()))


class TestValidate:
    def test_dephasing_triple_passes(self):
        report = validate(dephasing_triple())
        assert report.passed
        assert report.scattering_unitarity_residual < 1e-12

    def test_non_hermitian_hamiltonian_fails(self):
        g = SlhTriple.from_parts((), SMINUS.conj().T)
        report = validate(g)
        assert not report.passed
        assert any("Hermitian" in f for f in report.failures)

    def test_non_unitary_scattering_fails(self):
        g = SlhTriple(2 * np.eye(2), (SZ,), np.zeros((2, 2)))
        report = validate(g)
        assert not report.passed
        assert any("unitary" in f for f in report.failures)


class TestSeriesProduct:
    def test_hamiltonians_add(self, rng):
        h1, h2 = random_hermitian(rng, 3), random_hermitian(rng, 3)
        a = SlhTriple.from_parts((), h1)
        b = SlhTriple.from_parts((), h2)
        out = series_product(a, b)
        assert np.allclose(out.hamiltonian, h1 + h2, atol=1e-14)

    def test_scalar_triple_matches_euclidean_transform(self, rng):
        g = random_triple(rng, 2, 2)
        e = random_euclidean(rng, 2)
        scalar = SlhTriple(
            np.kron(e.t, np.eye(2)),
            tuple(b * np.eye(2, dtype=complex) for b in e.beta),
            e.e * np.eye(2, dtype=complex),
        )
        via_series = series_product(g, scalar)
        via_transform = euclidean_transform(g, e)
        assert np.allclose(via_series.scattering, via_transform.scattering, atol=1e-12)
        for l1, l2 in zip(via_series.couplings, via_transform.couplings):
            assert np.allclose(l1, l2, atol=1e-12)
        assert np.allclose(via_series.hamiltonian, via_transform.hamiltonian, atol=1e-12)

    def test_associativity(self, rng):
        a, b, c = (random_triple(rng, 2, 2) for _ in range(3))
        left = series_product(series_product(a, b), c)
        right = series_product(a, series_product(b, c))
        assert np.linalg.norm(left.scattering - right.scattering) <= 1e-12
        assert np.linalg.norm(left.hamiltonian - right.hamiltonian) <= 1e-12
        for l1, l2 in zip(left.couplings, right.couplings):
            assert np.linalg.norm(l1 - l2) <= 1e-12

    def test_dimension_mismatch(self, rng):
        with pytest.raises(DimensionMismatch):
            series_product(random_triple(rng, 2, 1), random_triple(rng, 3, 1))


class TestConcatenation:
    def test_with_empty_triple_is_identity(self, rng):
        g = random_triple(rng, 2, 2)
        empty = SlhTriple.from_parts((), np.zeros((2, 2)))
        out = concatenation(g, empty)
        assert out.multiplicity == 2
        assert np.allclose(out.scattering, g.scattering)
        assert np.allclose(out.hamiltonian, g.hamiltonian)

    def test_generator_additivity(self, rng):
        a, b = random_triple(rng, 3, 1), random_triple(rng, 3, 2)
        lhs = superop(concatenation(a, b))
        rhs = superop(a) + superop(b)
        assert np.linalg.norm(lhs - rhs) <= 1e-12

    def test_depolarizing_as_three_channel_concatenation(self):
        gx, gy, gz = 0.3, 0.5, 0.7
        out = concatenation(
            concatenation(
                SlhTriple.from_parts((np.sqrt(gx) * SX,), np.zeros((2, 2))),
                SlhTriple.from_parts((np.sqrt(gy) * SY,), np.zeros((2, 2))),
            ),
            SlhTriple.from_parts((np.sqrt(gz) * SZ,), np.zeros((2, 2))),
        )
        direct = GeneratorSpec(
            (np.sqrt(gx) * SX, np.sqrt(gy) * SY, np.sqrt(gz) * SZ), np.zeros((2, 2))
        )
        assert np.linalg.norm(superop(out) - superop(direct)) <= 1e-13


class TestEuclideanTransform:
    def test_identity_transform_is_identity(self, rng):
        g = random_triple(rng, 2, 2)
        out = euclidean_transform(g, EuclideanTransform.identity(2))
        assert np.allclose(out.scattering, g.scattering)
        assert np.allclose(out.hamiltonian, g.hamiltonian)
        for l1, l2 in zip(out.couplings, g.couplings):
            assert np.allclose(l1, l2)

    def test_beta_shift_preserves_dephasing_generator(self):
        g = dephasing_triple(0.8)
        e = EuclideanTransform(np.eye(1), np.array([0.3 - 0.2j]), 0.0)
        out = euclidean_transform(g, e)
        assert np.allclose(out.couplings[0], g.couplings[0] + (0.3 - 0.2j) * np.eye(2))
        assert np.linalg.norm(superop(out) - superop(g)) <= 1e-12

    def test_generator_invariance_random(self, rng):
        for _ in range(20):
            n, d = int(rng.integers(2, 5)), int(rng.integers(1, 4))
            g = random_triple(rng, n, d)
            e = random_euclidean(rng, d)
            out = euclidean_transform(g, e)
            norm = np.linalg.norm(superop(g))
            assert np.linalg.norm(superop(out) - superop(g)) <= 1e-10 * max(1, norm)

    def test_damping_operator_transformation_law(self, rng):
        g = random_triple(rng, 3, 2)
        e = random_euclidean(rng, 2)
        out = euclidean_transform(g, e)
        k_before = complex_damping(g.generator_spec()).k
        k_after = complex_damping(out.generator_spec()).k
        mixed = sum(
            e.beta[j].conjugate() * e.t[j, l] * g.couplings[l]
            for j in range(2)
            for l in range(2)
        )
        expected = (
            k_before
            - mixed
            - (0.5 * np.sum(np.abs(e.beta) ** 2) + 1j * e.e) * np.eye(3)
        )
        assert np.linalg.norm(k_after - expected) <= 1e-12

    def test_scattering_never_enters_generator(self, rng):
        ls = (random_complex(rng, (2, 2)),)
        h = random_hermitian(rng, 2)
        g1 = SlhTriple.from_parts(ls, h)
        g2 = SlhTriple(random_unitary(rng, 2), ls, h)
        assert np.array_equal(superop(g1), superop(g2))


class TestComplexDamping:
    def test_dephasing_coupling(self):
        spec = GeneratorSpec((np.sqrt(0.5) * SZ,), np.zeros((2, 2)))
        assert np.allclose(complex_damping(spec).k, -0.25 * np.eye(2))

    def test_amplitude_damping_coupling(self):
        spec = GeneratorSpec((np.sqrt(2.0) * SMINUS,), np.zeros((2, 2)))
        expected = -1.0 * np.diag([1.0, 0.0])
        assert np.allclose(complex_damping(spec).k, expected)

    def test_hamiltonian_only(self, rng):
        h = random_hermitian(rng, 3)
        spec = GeneratorSpec((), h)
        assert np.allclose(complex_damping(spec).k, -1j * h)

    def test_invariant_k_plus_kdag(self, rng):
        spec = GeneratorSpec(
            tuple(random_complex(rng, (3, 3)) for _ in range(2)),
            random_hermitian(rng, 3),
        )
        k = complex_damping(spec).k
        total = sum(l.conj().T @ l for l in spec.couplings)
        assert np.linalg.norm(k + k.conj().T + total) <= 1e-12


class TestCenter:
    def test_already_centered_gives_identity_transform(self):
        g = dephasing_triple()
        rho = np.eye(2) / 2
        out, transform = center(g, rho)
        assert np.allclose(transform.beta, 0, atol=1e-12)
        assert transform.e == pytest.approx(0, abs=1e-12)
        assert np.allclose(out.couplings[0], g.couplings[0])

    def test_sigma_z_against_projector_state(self):
        g = SlhTriple.from_parts((SZ,), np.zeros((2, 2)))
        rho = np.diag([1.0, 0.0]).astype(complex)
        out, transform = center(g, rho)
        assert transform.beta[0] == pytest.approx(-1.0)
        assert np.allclose(out.couplings[0], SZ - np.eye(2))

    def test_centered_averages_vanish(self, rng):
        g = random_triple(rng, 3, 2)
        evals = rng.random(3)
        evals /= evals.sum()
        u = random_unitary(rng, 3)
        rho = u @ np.diag(evals.astype(complex)) @ u.conj().T
        out, _ = center(g, rho)
        for l in out.couplings:
            assert abs(np.trace(rho @ l)) <= 1e-12
        assert abs(np.trace(rho @ out.hamiltonian)) <= 1e-12
        assert np.linalg.norm(superop(out) - superop(g)) <= 1e-10

    def test_rejects_non_state(self):
        g = dephasing_triple()
        with pytest.raises(InvalidState):
            center(g, np.diag([2.0, 0.0]))


class TestMinimality:
    def test_dephasing_is_minimal(self):
        assert is_minimal(dephasing_triple())

    def test_dependent_couplings_not_minimal(self):
        g = SlhTriple.from_parts((SZ, 2 * SZ), np.zeros((2, 2)))
        assert not is_minimal(g)

    def test_qutrit_example_is_minimal(self):
        l1 = np.diag([1.0, 2.0, 1.0]).astype(complex)
        l2 = np.diag([2.0, 4.0, 0.0]).astype(complex)
        assert is_minimal(SlhTriple.from_parts((l1, l2), np.zeros((3, 3))))


class TestReduceToMinimal:
    def test_minimal_input_keeps_rank(self, rng):
        g = dephasing_triple()
        out, rank = reduce_to_minimal(g)
        assert rank == 1
        assert np.linalg.norm(superop(out) - superop(g)) <= 1e-12

    def test_duplicate_channel_compresses(self):
        l = SZ + 0.5 * SX
        g = SlhTriple.from_parts((l, l), np.zeros((2, 2)))
        out, rank = reduce_to_minimal(g)
        assert rank == 1
        assert np.linalg.norm(superop(out) - superop(g)) <= 1e-12
        coeff = out.couplings[0][0, 0] / l[0, 0]
        assert abs(abs(coeff) - np.sqrt(2)) <= 1e-12
        assert np.allclose(out.couplings[0], coeff * l, atol=1e-12)

    def test_identity_channel_drops_out(self):
        g = SlhTriple.from_parts(((2.0 + 1.0j) * np.eye(2),), np.zeros((2, 2)))
        out, rank = reduce_to_minimal(g)
        assert rank == 0
        assert np.linalg.norm(superop(out) - superop(g)) <= 1e-12
        assert np.allclose(out.hamiltonian, 0)

    def test_random_overcomplete_family(self, rng):
        base = [random_complex(rng, (3, 3)) for _ in range(2)]
        ls = tuple(base + [base[0] + 2 * base[1] + 0.5j * np.eye(3)])
        g = SlhTriple.from_parts(ls, random_hermitian(rng, 3))
        out, rank = reduce_to_minimal(g)
        assert rank == 2
        assert is_minimal(out)
        norm = np.linalg.norm(superop(g))
        assert np.linalg.norm(superop(out) - superop(g)) <= 1e-10 * max(1, norm)
