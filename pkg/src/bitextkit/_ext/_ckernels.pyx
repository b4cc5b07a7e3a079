# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled hot loops; must agree with bitextkit._pykernels."""
from libc.math cimport fabs

import numpy as np


def class_histogram(str text, const unsigned char[::1] table, Py_ssize_t n_classes=32):
    cdef Py_ssize_t[32] counts
    cdef Py_ssize_t i
    cdef Py_UCS4 ch
    if n_classes > 32:
        raise ValueError("at most 32 classes")
    for i in range(32):
        counts[i] = 0
    for ch in text:
        counts[table[ch]] += 1
    return [counts[i] for i in range(n_classes)]


def sinkhorn_scale(double[:, ::1] P, const double[::1] row_target, const double[::1] col_target,
                   double tol, Py_ssize_t max_iter):
    """Alternate row and column scaling of P in place.

    Returns (iterations, row_error) where row_error is the worst row-sum
    deviation after the last column pass. Zero entries stay exactly zero.
    """
    cdef Py_ssize_t n = P.shape[0], m = P.shape[1]
    cdef Py_ssize_t i, j, it = 0
    cdef double s, f, err, d
    cdef double[::1] col = np.zeros(m)
    cdef double[::1] row = np.zeros(n)

    for i in range(n):
        s = 0.0
        for j in range(m):
            s += P[i, j]
        row[i] = s
    err = 0.0
    for i in range(n):
        d = fabs(row[i] - row_target[i])
        if d > err:
            err = d
    # balanced input still needs its columns checked
    if err < tol:
        for j in range(m):
            col[j] = 0.0
        for i in range(n):
            for j in range(m):
                col[j] += P[i, j]
        for j in range(m):
            if fabs(col[j] - col_target[j]) >= tol:
                err = tol
                break
        if err < tol:
            return 0, err

    while it < max_iter:
        it += 1
        for i in range(n):
            f = row_target[i] / row[i] if row[i] > 0.0 else 0.0
            for j in range(m):
                P[i, j] *= f
        for j in range(m):
            col[j] = 0.0
        for i in range(n):
            for j in range(m):
                col[j] += P[i, j]
        for j in range(m):
            col[j] = col_target[j] / col[j] if col[j] > 0.0 else 0.0
        err = 0.0
        for i in range(n):
            s = 0.0
            for j in range(m):
                P[i, j] *= col[j]
                s += P[i, j]
            row[i] = s
            d = fabs(s - row_target[i])
            if d > err:
                err = d
        if err < tol:
            break
    return it, err

