# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled inner loops for log-partition evaluation.

Mirrors ``gencap._pykernels`` function by function; the two must agree to
floating-point rounding.
"""

import numpy as np
cimport numpy as cnp
from libc.math cimport exp, log, INFINITY

cnp.import_array()


def logsumexp_grid(const double[::1] costs, const double[::1] betas,
                   const double[::1] offsets=None):
    """``log sum_j exp(-beta * costs[j] + offsets[j])`` for every beta.

    Two passes per beta (max, then shifted sum), no temporaries.
    """
    cdef Py_ssize_t n = costs.shape[0]
    cdef Py_ssize_t nb = betas.shape[0]
    cdef Py_ssize_t i, j
    cdef double beta, a, amax, acc
    cdef bint has_off = offsets is not None
    out = np.empty(nb, dtype=np.float64)
    cdef double[::1] res = out
    if n == 0:
        raise ValueError("empty input")
    if has_off and offsets.shape[0] != n:
        raise ValueError("offsets length mismatch")
    with nogil:
        for i in range(nb):
            beta = betas[i]
            amax = -INFINITY
            for j in range(n):
                a = -beta * costs[j]
                if has_off:
                    a = a + offsets[j]
                if a > amax:
                    amax = a
            if amax == INFINITY or amax == -INFINITY:
                res[i] = amax
                continue
            acc = 0.0
            for j in range(n):
                a = -beta * costs[j]
                if has_off:
                    a = a + offsets[j]
                acc = acc + exp(a - amax)
            res[i] = amax + log(acc)
    return out


def support_sums(const double[::1] coef, const cnp.int64_t[:, ::1] support):
    """Row sums ``coef[support[i]].sum()`` for k-sparse hypotheses."""
    cdef Py_ssize_t n = support.shape[0]
    cdef Py_ssize_t k = support.shape[1]
    cdef Py_ssize_t i, j
    cdef double acc
    out = np.empty(n, dtype=np.float64)
    cdef double[::1] res = out
    with nogil:
        for i in range(n):
            acc = 0.0
            for j in range(k):
                acc = acc + coef[support[i, j]]
            res[i] = acc
    return out
