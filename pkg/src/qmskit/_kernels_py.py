"""Pure-numpy implementations of the trajectory hot kernels.

These carry the reference semantics; ``qmskit._kernels`` is the compiled
(Cython) version of the same functions and is preferred at import time
when present.  Both accumulate the same sums, so results agree to
floating-point reduction order.
"""

import numpy as np


def accumulate_conjugation_maps(v, out_sum, out_sumsq):
    """Accumulate Heisenberg conjugation maps over a batch of unitaries.

    Parameters
    ----------
    v : (C, T, N, N) complex128
        Per-trajectory, per-time unitaries.
    out_sum : (T, N^2, N^2) complex128
        Incremented by sum_c M_c, where the map of trajectory c at time t
        is ``M[i + N j, k + N l] = conj(V[k, i]) V[l, j]`` (column-stacked
        matrix of X -> V^dag X V).
    out_sumsq : (T, N^2, N^2) float64
        Incremented by sum_c |M_c|^2 entrywise.
    """
    c, t, n, _ = v.shape
    maps = np.einsum("ctki,ctlj->tjilk", v.conj(), v)
    out_sum += maps.reshape(t, n * n, n * n)
    w = v.real**2 + v.imag**2
    sq = np.einsum("ctki,ctlj->tjilk", w, w)
    out_sumsq += sq.reshape(t, n * n, n * n)


def trotter_advance(v, ham_step, jump_ops, kicks, diff_vecs, diff_vals, dws):
    """Advance a batch of unitaries through Trotter steps, in place.

    Per step s the update is

        V <- ham_step @ (prod_k U_k e^{-i d_k dW_{s,k}} U_k^dag)
                      @ (prod_j S_j^{kick_{s,j}}) @ V,

    jumps first (channel order), then diffusions (channel order), then
    the Hamiltonian factor.

    Parameters
    ----------
    v : (C, N, N) complex128, modified in place
    ham_step : (N, N) complex128, exp(-i H h)
    jump_ops : (J, N, N) complex128
    kicks : (C, S, J) uint8, 0/1 kick indicators
    diff_vecs : (K, N, N) complex128, eigenvectors of each diffusion op
    diff_vals : (K, N) float64, corresponding eigenvalues
    dws : (C, S, K) float64, Brownian increments
    """
    n_steps = kicks.shape[1]
    n_jumps = kicks.shape[2]
    n_diffs = diff_vals.shape[0]
    for s in range(n_steps):
        for j in range(n_jumps):
            mask = kicks[:, s, j].astype(bool)
            if mask.any():
                v[mask] = jump_ops[j] @ v[mask]
        for k in range(n_diffs):
            phase = np.exp(-1j * np.outer(dws[:, s, k], diff_vals[k]))
            e = np.einsum("ab,cb,db->cad", diff_vecs[k], phase, diff_vecs[k].conj())
            v[:] = e @ v
        v[:] = ham_step @ v
