# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled inner loops. Signatures mirror :mod:`crgscore._pykernels`."""

from libc.stdlib cimport malloc, free

import numpy as np


def confusion_counts(const unsigned char[:, :] pred,
                     const unsigned char[:, :] ref,
                     const unsigned char[:, :] mask=None):
    """Per-label ``[tp, fn, fp, tn]`` table of shape (n_labels, 4)."""
    cdef Py_ssize_t n = pred.shape[0], m = pred.shape[1], i, j
    cdef bint use_mask = mask is not None
    out = np.zeros((m, 4), dtype=np.int64)
    cdef long long[:, ::1] o = out
    cdef int p, r
    # column index: tp=0, fn=1, fp=2, tn=3
    if use_mask:
        for i in range(n):
            for j in range(m):
                if mask[i, j]:
                    p = pred[i, j] != 0
                    r = ref[i, j] != 0
                    o[j, 3 - 2 * r - p] += 1
    else:
        for i in range(n):
            for j in range(m):
                p = pred[i, j] != 0
                r = ref[i, j] != 0
                o[j, 3 - 2 * r - p] += 1
    return out


def lcs_length(const long long[:] a, const long long[:] b):
    """Length of the longest common subsequence of two integer sequences."""
    cdef Py_ssize_t n = a.shape[0], m = b.shape[0], i, j
    if n == 0 or m == 0:
        return 0
    if m > n:
        a, b = b, a
        n, m = m, n
    cdef long *prev = <long *> malloc((m + 1) * sizeof(long))
    cdef long *cur = <long *> malloc((m + 1) * sizeof(long))
    cdef long *tmp
    cdef long result
    if prev == NULL or cur == NULL:
        free(prev)
        free(cur)
        raise MemoryError()
    try:
        for j in range(m + 1):
            prev[j] = 0
        cur[0] = 0
        for i in range(n):
            for j in range(m):
                if a[i] == b[j]:
                    cur[j + 1] = prev[j] + 1
                elif prev[j + 1] >= cur[j]:
                    cur[j + 1] = prev[j + 1]
                else:
                    cur[j + 1] = cur[j]
            tmp = prev
            prev = cur
            cur = tmp
        result = prev[m]
    finally:
        free(prev)
        free(cur)
    return result
