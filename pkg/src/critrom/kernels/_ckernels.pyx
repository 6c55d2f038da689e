# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled kernels for the sweep-heavy inner loops.

Same contracts as ``_pykernels``; see that module for documentation.
"""

from libc.math cimport fabs, sqrt

import numpy as np

cimport numpy as cnp

cnp.import_array()


def gs_banded_sweep(double[::1] diag, long long[::1] offsets,
                    double[:, ::1] bands, double[::1] rhs, double[::1] x):
    cdef Py_ssize_t n = x.shape[0]
    cdef Py_ssize_t nb = offsets.shape[0]
    cdef Py_ssize_t i, b
    cdef long long j
    cdef double s
    for i in range(n):
        s = rhs[i]
        for b in range(nb):
            j = i + offsets[b]
            if 0 <= j < n:
                s -= bands[b, i] * x[j]
        x[i] = s / diag[i]
    for i in range(n - 1, -1, -1):
        s = rhs[i]
        for b in range(nb):
            j = i + offsets[b]
            if 0 <= j < n:
                s -= bands[b, i] * x[j]
        x[i] = s / diag[i]


def gs_dense_sweep(double[:, ::1] a, double[::1] rhs, double[::1] x):
    cdef Py_ssize_t n = x.shape[0]
    cdef Py_ssize_t i, j
    cdef double s
    for i in range(n):
        s = rhs[i]
        for j in range(n):
            if j != i:
                s -= a[i, j] * x[j]
        x[i] = s / a[i, i]
    for i in range(n - 1, -1, -1):
        s = rhs[i]
        for j in range(n):
            if j != i:
                s -= a[i, j] * x[j]
        x[i] = s / a[i, i]


def stencil_matvec(double[::1] diag, long long[::1] offsets,
                   double[:, ::1] bands, double[::1] x, double[::1] out):
    cdef Py_ssize_t n = x.shape[0]
    cdef Py_ssize_t nb = offsets.shape[0]
    cdef Py_ssize_t i, b
    cdef long long j
    cdef double s
    for i in range(n):
        s = diag[i] * x[i]
        for b in range(nb):
            j = i + offsets[b]
            if 0 <= j < n:
                s += bands[b, i] * x[j]
        out[i] = s


def jacobi_sweep(double[:, ::1] a, double[:, ::1] v, double threshold):
    cdef Py_ssize_t n = a.shape[0]
    cdef Py_ssize_t p, q, k
    cdef double apq, tau, t, c, s, akp, akq
    cdef long rotations = 0
    for p in range(n - 1):
        for q in range(p + 1, n):
            apq = a[p, q]
            if fabs(apq) <= threshold:
                continue
            tau = (a[q, q] - a[p, p]) / (2.0 * apq)
            if tau >= 0.0:
                t = 1.0 / (tau + sqrt(1.0 + tau * tau))
            else:
                t = -1.0 / (-tau + sqrt(1.0 + tau * tau))
            c = 1.0 / sqrt(1.0 + t * t)
            s = t * c
            for k in range(n):
                akp = a[k, p]
                akq = a[k, q]
                a[k, p] = c * akp - s * akq
                a[k, q] = s * akp + c * akq
            for k in range(n):
                akp = a[p, k]
                akq = a[q, k]
                a[p, k] = c * akp - s * akq
                a[q, k] = s * akp + c * akq
            a[p, q] = 0.0
            a[q, p] = 0.0
            for k in range(n):
                akp = v[k, p]
                akq = v[k, q]
                v[k, p] = c * akp - s * akq
                v[k, q] = s * akp + c * akq
            rotations += 1
    return rotations
