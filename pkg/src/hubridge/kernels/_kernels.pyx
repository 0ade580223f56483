# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled inner loops for distance computation and stable top-k selection.

All functions take objects as rows (C-contiguous float64) and mirror the
signatures in ``_fallback.py`` exactly.
"""
import numpy as np

cimport numpy as cnp
from libc.math cimport sqrt

cnp.import_array()


def pairwise_euclidean(const double[:, ::1] queries, const double[:, ::1] targets):
    cdef Py_ssize_t n = queries.shape[0]
    cdef Py_ssize_t m = targets.shape[0]
    cdef Py_ssize_t dim = queries.shape[1]
    cdef Py_ssize_t i, j, t
    cdef double acc, diff
    out = np.empty((n, m), dtype=np.float64)
    cdef double[:, ::1] res = out
    with nogil:
        for i in range(n):
            for j in range(m):
                acc = 0.0
                for t in range(dim):
                    diff = queries[i, t] - targets[j, t]
                    acc = acc + diff * diff
                res[i, j] = sqrt(acc)
    return out


cdef inline void _select_row(const double[:, ::1] dist, Py_ssize_t i, Py_ssize_t k,
                             double* vals, cnp.int64_t* idx) noexcept nogil:
    # Insertion into a sorted buffer of length k; strict comparison keeps the
    # lower index on ties.
    cdef Py_ssize_t m = dist.shape[1]
    cdef Py_ssize_t j, pos, filled = 0
    cdef double v
    for j in range(m):
        v = dist[i, j]
        if filled == k and not (v < vals[k - 1]):
            continue
        pos = filled if filled < k else k - 1
        while pos > 0 and vals[pos - 1] > v:
            vals[pos] = vals[pos - 1]
            idx[pos] = idx[pos - 1]
            pos -= 1
        vals[pos] = v
        idx[pos] = j
        if filled < k:
            filled += 1


def smallest_k(const double[:, ::1] dist, Py_ssize_t k):
    cdef Py_ssize_t n = dist.shape[0]
    cdef Py_ssize_t i
    out = np.empty((n, k), dtype=np.int64)
    cdef cnp.int64_t[:, ::1] res = out
    cdef double[::1] vals = np.empty(k, dtype=np.float64)
    with nogil:
        for i in range(n):
            _select_row(dist, i, k, &vals[0], &res[i, 0])
    return out


def k_smallest_mean(const double[:, ::1] dist, Py_ssize_t k):
    cdef Py_ssize_t n = dist.shape[0]
    cdef Py_ssize_t i, t
    cdef double acc
    out = np.empty(n, dtype=np.float64)
    cdef double[::1] res = out
    cdef double[::1] vals = np.empty(k, dtype=np.float64)
    cdef cnp.int64_t[::1] idx = np.empty(k, dtype=np.int64)
    with nogil:
        for i in range(n):
            _select_row(dist, i, k, &vals[0], &idx[0])
            acc = 0.0
            for t in range(k):
                acc = acc + vals[t]
            res[i] = acc / k
    return out


def topk_counts(const double[:, ::1] dist, Py_ssize_t k):
    cdef Py_ssize_t n = dist.shape[0]
    cdef Py_ssize_t m = dist.shape[1]
    cdef Py_ssize_t i, t
    out = np.zeros(m, dtype=np.int64)
    cdef cnp.int64_t[::1] res = out
    cdef double[::1] vals = np.empty(k, dtype=np.float64)
    cdef cnp.int64_t[::1] idx = np.empty(k, dtype=np.int64)
    with nogil:
        for i in range(n):
            _select_row(dist, i, k, &vals[0], &idx[0])
            for t in range(k):
                res[idx[t]] += 1
    return out
