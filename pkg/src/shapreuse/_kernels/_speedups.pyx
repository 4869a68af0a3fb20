# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled vote kernels for the weighted-KNN and kernel model families."""

import numpy as np

cimport numpy as cnp
from libc.math cimport exp, sqrt

cnp.import_array()

cdef double DISTANCE_GUARD = 1e-12


def wknn_votes(const double[:, ::1] coal_x, const cnp.int64_t[::1] coal_y,
               const double[:, ::1] test_x, const cnp.uint8_t[:, ::1] mask,
               int k, int num_classes):
    """Inverse-distance class votes from the k nearest unmasked members."""
    cdef Py_ssize_t T = test_x.shape[0]
    cdef Py_ssize_t m = coal_x.shape[0]
    cdef Py_ssize_t d = test_x.shape[1]
    votes_arr = np.zeros((T, num_classes))
    cdef double[:, ::1] votes = votes_arr
    if m == 0 or k <= 0:
        return votes_arr
    best_d_arr = np.empty(k)
    best_j_arr = np.empty(k, dtype=np.intp)
    cdef double[::1] best_d = best_d_arr
    cdef Py_ssize_t[::1] best_j = best_j_arr
    cdef Py_ssize_t i, j, q, cnt, pos
    cdef double s, diff, dist, w
    for i in range(T):
        cnt = 0
        for j in range(m):
            if not mask[i, j]:
                continue
            s = 0.0
            for q in range(d):
                diff = coal_x[j, q] - test_x[i, q]
                s += diff * diff
            dist = sqrt(s)
            if cnt < k:
                pos = cnt
                while pos > 0 and best_d[pos - 1] > dist:
                    best_d[pos] = best_d[pos - 1]
                    best_j[pos] = best_j[pos - 1]
                    pos -= 1
                best_d[pos] = dist
                best_j[pos] = j
                cnt += 1
            elif dist < best_d[k - 1]:
                pos = k - 1
                while pos > 0 and best_d[pos - 1] > dist:
                    best_d[pos] = best_d[pos - 1]
                    best_j[pos] = best_j[pos - 1]
                    pos -= 1
                best_d[pos] = dist
                best_j[pos] = j
        for pos in range(cnt):
            w = 1.0 / (best_d[pos] + DISTANCE_GUARD)
            votes[i, coal_y[best_j[pos]]] += w
    return votes_arr


def kernel_votes(const double[:, ::1] coal_x, const cnp.int64_t[::1] coal_y,
                 const double[:, ::1] test_x, double gamma, double tau,
                 int num_classes):
    """Gaussian-kernel class votes with a hard weight threshold."""
    cdef Py_ssize_t T = test_x.shape[0]
    cdef Py_ssize_t m = coal_x.shape[0]
    cdef Py_ssize_t d = test_x.shape[1]
    votes_arr = np.zeros((T, num_classes))
    cdef double[:, ::1] votes = votes_arr
    if m == 0:
        return votes_arr
    cdef Py_ssize_t i, j, q
    cdef double s, diff, w
    for i in range(T):
        for j in range(m):
            s = 0.0
            for q in range(d):
                diff = coal_x[j, q] - test_x[i, q]
                s += diff * diff
            w = exp(-gamma * s)
            if w >= tau:
                votes[i, coal_y[j]] += w
    return votes_arr
