import numpy as np
import pytest

from paralayer import geometry


@pytest.fixture(scope="session")
def ref_profile():
    return geometry.LayerProfile(2.0, 1.0)


@pytest.fixture(scope="session")
def ref_curv(ref_profile):
    """alpha = 2, k = 1 tables out to s = 2e4."""
    return geometry.build(ref_profile, 2e4, n=4000)


@pytest.fixture(scope="session")
def flat_curv():
    return geometry.build(geometry.FlatProfile(), 200.0, n=500)


def arc_length_x2(x):
    """Closed-form arc length of y = x^2 from the apex."""
    x = np.asarray(x, float)
    return 0.5 * x * np.sqrt(1 + 4 * x * x) + 0.25 * np.arcsinh(2 * x)


def invert_x2(s, lo=0.0, hi=None, tol=1e-14):
    """Bisection inverse of :func:`arc_length_x2`."""
    hi = hi if hi is not None else max(1.0, s)
    while hi - lo > tol * max(1.0, hi):
        mid = 0.5 * (lo + hi)
        if arc_length_x2(mid) < s:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)
