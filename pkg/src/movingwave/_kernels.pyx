# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled three-level sweep (Thomas algorithm per step)."""
import numpy as np
from libc.math cimport fabs, isfinite


def three_level_sweep(double[:, :, ::1] new_tri, double[:, :, ::1] cur_tri,
                      double[:, :, ::1] old_tri, double[:, ::1] src,
                      double[:, ::1] out, double blowup):
    cdef Py_ssize_t nsteps = new_tri.shape[0]
    cdef Py_ssize_t m = new_tri.shape[2]
    cdef Py_ssize_t s, j
    cdef double[::1] rhs = np.empty(m)
    cdef double[::1] cp = np.empty(m)
    cdef double denom, v
    for s in range(nsteps):
        for j in range(m):
            v = cur_tri[s, 1, j] * out[s + 1, j] + old_tri[s, 1, j] * out[s, j] + src[s, j]
            if j > 0:
                v += cur_tri[s, 0, j] * out[s + 1, j - 1] + old_tri[s, 0, j] * out[s, j - 1]
            if j < m - 1:
                v += cur_tri[s, 2, j] * out[s + 1, j + 1] + old_tri[s, 2, j] * out[s, j + 1]
            rhs[j] = v
        # forward elimination
        denom = new_tri[s, 1, 0]
        cp[0] = new_tri[s, 2, 0] / denom
        rhs[0] = rhs[0] / denom
        for j in range(1, m):
            denom = new_tri[s, 1, j] - new_tri[s, 0, j] * cp[j - 1]
            cp[j] = new_tri[s, 2, j] / denom
            rhs[j] = (rhs[j] - new_tri[s, 0, j] * rhs[j - 1]) / denom
        out[s + 2, m - 1] = rhs[m - 1]
        for j in range(m - 2, -1, -1):
            out[s + 2, j] = rhs[j] - cp[j] * out[s + 2, j + 1]
        for j in range(m):
            v = out[s + 2, j]
            if not isfinite(v) or fabs(v) > blowup:
                return s
    return -1
