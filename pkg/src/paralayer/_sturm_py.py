"""Pure-Python Sturm-sequence kernels (fallback for the compiled module).

Same signatures and return conventions as ``paralayer._sturm``.
"""

import numpy as np


def _count(diag, off2, x):
    neg = 0
    d = diag[0] - x
    if d == 0.0:
        return -1
    if d < 0.0:
        neg += 1
    for a, b2 in zip(diag[1:], off2):
        d = (a - x) - b2 / d
        if d == 0.0:
            return -1
        if d < 0.0:
            neg += 1
    return neg


def sturm_count(diag, off2, x):
    """Number of eigenvalues below ``x``; -1 when a pivot is exactly zero."""
    return _count(np.asarray(diag).tolist(), np.asarray(off2).tolist(), float(x))


def sturm_count_many(diag, off2, xs):
    d = np.asarray(diag).tolist()
    o = np.asarray(off2).tolist()
    return np.array([_count(d, o, float(x)) for x in xs], dtype=np.int64)


def bisect_kth(diag, off2, k, lo, hi, tol, max_iter):
    d = np.asarray(diag).tolist()
    o = np.asarray(off2).tolist()
    it = 0
    while hi - lo > tol and it < max_iter:
        mid = 0.5 * (lo + hi)
        c = _count(d, o, mid)
        if c < 0:
            mid = mid + 1e-13 * (1.0 + abs(mid))
            c = _count(d, o, mid)
        if c >= k:
            hi = mid
        else:
            lo = mid
        it += 1
    return lo, hi
