# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled trajectory hot kernels.

Same contracts as ``qmskit._kernels_py``; that module is the reference
implementation and the import-time fallback.
"""

import numpy as np

cimport numpy as cnp
from libc.math cimport cos, sin


def accumulate_conjugation_maps(cnp.complex128_t[:, :, :, ::1] v,
                                cnp.complex128_t[:, :, ::1] out_sum,
                                double[:, :, ::1] out_sumsq):
    """Accumulate maps M[i+Nj, k+Nl] = conj(V[k,i]) V[l,j] and |M|^2."""
    cdef Py_ssize_t nc = v.shape[0], nt = v.shape[1], n = v.shape[2]
    cdef Py_ssize_t c, t, i, j, k, l, row, col
    cdef double complex m
    for c in range(nc):
        for t in range(nt):
            for j in range(n):
                for i in range(n):
                    row = j * n + i
                    for l in range(n):
                        for k in range(n):
                            col = l * n + k
                            m = v[c, t, k, i].conjugate() * v[c, t, l, j]
                            out_sum[t, row, col] += m
                            out_sumsq[t, row, col] += m.real * m.real + m.imag * m.imag


cdef inline void _lmul(cnp.complex128_t[:, ::1] a,
                       cnp.complex128_t[:, :, ::1] v, Py_ssize_t c,
                       cnp.complex128_t[:, ::1] tmp, Py_ssize_t n) noexcept:
    # tmp = a @ v[c]; v[c] = tmp
    cdef Py_ssize_t p, q, r
    cdef double complex acc
    for p in range(n):
        for q in range(n):
            acc = 0
            for r in range(n):
                acc += a[p, r] * v[c, r, q]
            tmp[p, q] = acc
    for p in range(n):
        for q in range(n):
            v[c, p, q] = tmp[p, q]


def trotter_advance(cnp.complex128_t[:, :, ::1] v,
                    cnp.complex128_t[:, ::1] ham_step,
                    cnp.complex128_t[:, :, ::1] jump_ops,
                    cnp.uint8_t[:, :, ::1] kicks,
                    cnp.complex128_t[:, :, ::1] diff_vecs,
                    double[:, ::1] diff_vals,
                    double[:, :, ::1] dws):
    """In-place Trotter stepping of a batch of unitaries."""
    cdef Py_ssize_t nc = v.shape[0], n = v.shape[1]
    cdef Py_ssize_t n_steps = kicks.shape[1], n_jumps = kicks.shape[2]
    cdef Py_ssize_t n_diffs = diff_vals.shape[0]
    cdef Py_ssize_t c, s, j, k, p, q, r
    cdef double ang
    cdef double complex acc, ph

    tmp_arr = np.empty((n, n), dtype=np.complex128)
    work_arr = np.empty((n, n), dtype=np.complex128)
    cdef cnp.complex128_t[:, ::1] tmp = tmp_arr
    cdef cnp.complex128_t[:, ::1] work = work_arr

    for c in range(nc):
        for s in range(n_steps):
            for j in range(n_jumps):
                if kicks[c, s, j]:
                    _lmul(jump_ops[j], v, c, tmp, n)
            for k in range(n_diffs):
                # work = U_k^dag @ v[c], rows scaled by e^{-i d_k[p] dW}
                for p in range(n):
                    ang = -diff_vals[k, p] * dws[c, s, k]
                    ph = cos(ang) + 1j * sin(ang)
                    for q in range(n):
                        acc = 0
                        for r in range(n):
                            acc += diff_vecs[k, r, p].conjugate() * v[c, r, q]
                        work[p, q] = ph * acc
                # v[c] = U_k @ work
                for p in range(n):
                    for q in range(n):
                        acc = 0
                        for r in range(n):
                            acc += diff_vecs[k, p, r] * work[r, q]
                        v[c, p, q] = acc
            _lmul(ham_step, v, c, tmp, n)
