# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled fused threshold+pool kernel.

Single pass over the affinity matrix: entries below the threshold are
skipped instead of being materialized as an N x N weight matrix.
"""

import numpy as np

cimport cython


@cython.boundscheck(False)
@cython.wraparound(False)
def threshold_pool(double[:, ::1] affinity, double gamma, double[:, ::1] features):
    cdef Py_ssize_t n = affinity.shape[0]
    cdef Py_ssize_t d = features.shape[1]
    out_arr = np.zeros((n, d), dtype=np.float64)
    sums_arr = np.zeros(n, dtype=np.float64)
    cdef double[:, ::1] out = out_arr
    cdef double[::1] sums = sums_arr
    cdef Py_ssize_t p, q, k
    cdef double a, total

    with nogil:
        for p in range(n):
            total = 0.0
            for q in range(n):
                a = affinity[p, q]
                if a >= gamma or q == p:
                    total += a
                    for k in range(d):
                        out[p, k] += a * features[q, k]
            sums[p] = total
            if total != 0.0:
                for k in range(d):
                    out[p, k] /= total
    return out_arr, sums_arr
