import numpy as np
import pytest

SX = np.array([[0, 1], [1, 0]], dtype=complex)
SY = np.array([[0, -1j], [1j, 0]], dtype=complex)
SZ = np.array([[1, 0], [0, -1]], dtype=complex)
# Lowering operator in the (excited, ground) ordering: population index 0 decays.
SMINUS = np.array([[0, 0], [1, 0]], dtype=complex)
SPLUS = SMINUS.conj().T


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)


def random_complex(rng, shape):
    return rng.normal(size=shape) + 1j * rng.normal(size=shape)


def random_hermitian(rng, n):
    a = random_complex(rng, (n, n))
    return (a + a.conj().T) / 2


def random_unitary(rng, n):
    q, r = np.linalg.qr(random_complex(rng, (n, n)))
    return q * (np.diag(r) / np.abs(np.diag(r)))


def random_spec(rng, n, d):
    """Generic generator data: d arbitrary couplings plus a Hamiltonian."""
    from qmskit import GeneratorSpec

    ls = tuple(random_complex(rng, (n, n)) for _ in range(d))
    return GeneratorSpec(ls, random_hermitian(rng, n))


def two_qubit_exchange_spec(j=1.0, gamma1=0.5, gamma2=0.8):
    """Heisenberg-exchange Hamiltonian with independent single-qubit dephasing."""
    from qmskit import GeneratorSpec

    eye = np.eye(2, dtype=complex)
    h = j * (np.kron(SX, SX) + np.kron(SY, SY) + np.kron(SZ, SZ))
    l1 = np.sqrt(gamma1) * np.kron(SZ, eye)
    l2 = np.sqrt(gamma2) * np.kron(eye, SZ)
    return GeneratorSpec((l1, l2), h)


def sz_sector_family():
    """Projectors onto total-sigma_z eigenvalues +2, 0, -2 of two qubits."""
    from qmskit import ProjectorFamily

    p1 = np.diag([1.0, 0, 0, 0]).astype(complex)
    p2 = np.diag([0, 1.0, 1.0, 0]).astype(complex)
    p3 = np.diag([0, 0, 0, 1.0]).astype(complex)
    return ProjectorFamily((p1, p2, p3))


def exchange_eigenbasis_family():
    """Rank-one projectors onto the exchange Hamiltonian's eigenbasis."""
    from qmskit import ProjectorFamily

    vecs = [
        np.array([1, 0, 0, 0], dtype=complex),
        np.array([0, 0, 0, 1], dtype=complex),
        np.array([0, 1, 1, 0], dtype=complex) / np.sqrt(2),
        np.array([0, 1, -1, 0], dtype=complex) / np.sqrt(2),
    ]
    return ProjectorFamily(tuple(np.outer(v, v.conj()) for v in vecs))


def obstructed_qutrit_spec():
    """Three diagonal couplings on a qutrit with obstruction Delta_123 = -5."""
    from qmskit import GeneratorSpec

    f = np.array([[1, 1j, 2], [0, 0, 0], [2j, 1, -1]], dtype=complex)
    ls = tuple(np.diag(f[k]) for k in range(3))
    return GeneratorSpec(ls, np.zeros((3, 3)))


def max_rank_qutrit_spec():
    """Two diagonal couplings on a qutrit with distinct columns, d = N - 1."""
    from qmskit import GeneratorSpec

    l1 = np.diag([1.0, 2.0, 1.0]).astype(complex)
    l2 = np.diag([2.0, 4.0, 0.0]).astype(complex)
    return GeneratorSpec((l1, l2), np.zeros((3, 3)))


def random_dephasing_spec(rng, n, d, complex_cols=True):
    """Maximally dephasing spec: joint eigenbasis with distinct F columns."""
    from qmskit import GeneratorSpec

    while True:
        if complex_cols:
            f = random_complex(rng, (d, n))
        else:
            f = rng.normal(size=(d, n)).astype(complex)
        cols = f.T
        dists = np.abs(cols[:, None, :] - cols[None, :, :]).sum(axis=2)
        np.fill_diagonal(dists, np.inf)
        if dists.min() > 0.3:
            break
    eps = rng.normal(size=n)
    u = random_unitary(rng, n)
    ls = tuple(u @ np.diag(f[k]) @ u.conj().T for k in range(d))
    h = u @ np.diag(eps.astype(complex)) @ u.conj().T
    return GeneratorSpec(ls, (h + h.conj().T) / 2)
