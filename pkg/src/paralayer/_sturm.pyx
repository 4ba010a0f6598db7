# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled Sturm-sequence kernels for symmetric tridiagonal matrices.

The matrix is given by its diagonal ``diag`` (length n) and the squares of
its off-diagonal entries ``off2`` (length n - 1).
"""

import numpy as np
cimport numpy as cnp

cnp.import_array()


cdef long _count(const double[::1] diag, const double[::1] off2, double x) noexcept nogil:
    cdef Py_ssize_t n = diag.shape[0]
    cdef Py_ssize_t i
    cdef long neg = 0
    cdef double d = diag[0] - x
    if d == 0.0:
        return -1
    if d < 0.0:
        neg += 1
    for i in range(1, n):
        d = (diag[i] - x) - off2[i - 1] / d
        if d == 0.0:
            return -1
        if d < 0.0:
            neg += 1
    return neg


def sturm_count(const double[::1] diag, const double[::1] off2, double x):
    """Number of eigenvalues below ``x``; -1 when a pivot is exactly zero."""
    cdef long res
    with nogil:
        res = _count(diag, off2, x)
    return res


def sturm_count_many(const double[::1] diag, const double[::1] off2, const double[::1] xs):
    cdef Py_ssize_t m = xs.shape[0]
    cdef Py_ssize_t j
    out = np.empty(m, dtype=np.int64)
    cdef long long[::1] view = out
    with nogil:
        for j in range(m):
            view[j] = _count(diag, off2, xs[j])
    return out


def bisect_kth(const double[::1] diag, const double[::1] off2, long k,
               double lo, double hi, double tol, long max_iter):
    """Bisect for the k-th eigenvalue (1-based) inside ``[lo, hi]``.

    Returns ``(lo, hi)`` with ``count(lo) < k <= count(hi)``.  Exact pivot
    ties are resolved by nudging the midpoint.
    """
    cdef double mid
    cdef long c
    cdef long it = 0
    with nogil:
        while hi - lo > tol and it < max_iter:
            mid = 0.5 * (lo + hi)
            c = _count(diag, off2, mid)
            if c < 0:
                mid = mid + 1e-13 * (1.0 + (mid if mid > 0 else -mid))
                c = _count(diag, off2, mid)
            if c >= k:
                hi = mid
            else:
                lo = mid
            it += 1
    return lo, hi
