# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled inner loops. Must stay numerically equivalent to ``_pykernels``."""

import numpy as np
cimport numpy as cnp
from libc.math cimport exp, fabs, sqrt, M_PI

cnp.import_array()

cdef double INV_SQRT_2PI = 1.0 / sqrt(2.0 * M_PI)


def soft_threshold(a, double tau):
    cdef cnp.ndarray[cnp.float64_t, ndim=1] flat = np.ascontiguousarray(a, dtype=np.float64).ravel()
    cdef cnp.ndarray[cnp.float64_t, ndim=1] out = np.empty_like(flat)
    cdef const double[::1] src = flat
    cdef double[::1] dst = out
    cdef Py_ssize_t i, n = flat.shape[0]
    cdef double v
    for i in range(n):
        v = src[i]
        if v > tau:
            dst[i] = v - tau
        elif v < -tau:
            dst[i] = v + tau
        else:
            dst[i] = 0.0
    return out.reshape(np.shape(a))


def gaussian_kde(points, xs, double h):
    cdef const double[::1] p = np.ascontiguousarray(points, dtype=np.float64).ravel()
    cdef const double[::1] x = np.ascontiguousarray(xs, dtype=np.float64).ravel()
    cdef Py_ssize_t n = p.shape[0], m = x.shape[0], i, j
    cdef cnp.ndarray[cnp.float64_t, ndim=1] out = np.empty(m, dtype=np.float64)
    cdef double[::1] dst = out
    cdef double acc, u, norm = INV_SQRT_2PI / (n * h)
    for j in range(m):
        acc = 0.0
        for i in range(n):
            u = (x[j] - p[i]) / h
            acc += exp(-0.5 * u * u)
        dst[j] = acc * norm
    return out


def gaussian_kde_loo(points, double h):
    cdef const double[::1] p = np.ascontiguousarray(points, dtype=np.float64).ravel()
    cdef Py_ssize_t n = p.shape[0], i, j
    cdef cnp.ndarray[cnp.float64_t, ndim=1] out = np.zeros(n, dtype=np.float64)
    cdef double[::1] dst = out
    cdef double u, k, norm = INV_SQRT_2PI / ((n - 1) * h)
    # symmetric kernel: each pair evaluated once
    for i in range(n):
        for j in range(i + 1, n):
            u = (p[i] - p[j]) / h
            k = exp(-0.5 * u * u)
            dst[i] += k
            dst[j] += k
    for i in range(n):
        dst[i] *= norm
    return out
