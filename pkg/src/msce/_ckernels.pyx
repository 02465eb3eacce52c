# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled inner loops; see ``_pykernels`` for the reference versions."""
import numpy as np
cimport numpy as cnp
from libc.math cimport exp, pow, fabs, sqrt, INFINITY

cnp.import_array()


def corr_cross(double[:, ::1] a, double[:, ::1] b, double[::1] theta, double[::1] power):
    cdef Py_ssize_t n = a.shape[0], m = b.shape[0], d = a.shape[1]
    cdef Py_ssize_t i, j, k
    cdef double s, diff
    out = np.empty((n, m), dtype=np.float64)
    cdef double[:, ::1] r = out
    for i in range(n):
        for j in range(m):
            s = 0.0
            for k in range(d):
                diff = fabs(a[i, k] - b[j, k])
                if diff > 0.0:
                    s += theta[k] * pow(diff, power[k])
            r[i, j] = exp(-s)
    return out


def corr_self(double[:, ::1] a, double[::1] theta, double[::1] power):
    cdef Py_ssize_t n = a.shape[0], d = a.shape[1]
    cdef Py_ssize_t i, j, k
    cdef double s, diff, v
    out = np.empty((n, n), dtype=np.float64)
    cdef double[:, ::1] r = out
    for i in range(n):
        r[i, i] = 1.0
        for j in range(i + 1, n):
            s = 0.0
            for k in range(d):
                diff = fabs(a[i, k] - a[j, k])
                if diff > 0.0:
                    s += theta[k] * pow(diff, power[k])
            v = exp(-s)
            r[i, j] = v
            r[j, i] = v
    return out


def maxpro_sum(double[:, ::1] x):
    cdef Py_ssize_t n = x.shape[0], d = x.shape[1]
    cdef Py_ssize_t i, j, k
    cdef double total = 0.0, prod, diff
    for i in range(n):
        for j in range(i + 1, n):
            prod = 1.0
            for k in range(d):
                diff = x[i, k] - x[j, k]
                prod *= diff * diff
            if prod == 0.0:
                return INFINITY
            total += 1.0 / prod
    return total


def min_distance(double[:, ::1] x):
    cdef Py_ssize_t n = x.shape[0], d = x.shape[1]
    cdef Py_ssize_t i, j, k
    cdef double best = INFINITY, s, diff
    for i in range(n):
        for j in range(i + 1, n):
            s = 0.0
            for k in range(d):
                diff = x[i, k] - x[j, k]
                s += diff * diff
            if s < best:
                best = s
    return sqrt(best)
