import numpy as np
import pytest

from cogmac import ChannelInstance

# documented seed for every randomized suite in the tests
SUITE_SEED = 20260824


@pytest.fixture
def unit_k1():
    """Single user, everything 1: feasible ratio is (sqrt(3)-1)/2."""
    return ChannelInstance(
        h=[1.0], g=[1.0], p=[1.0], h_p=1.0, p_p=1.0, sigma_p2=1.0, sigma_c2=1.0
    )


@pytest.fixture
def k2_reference():
    """Two-user instance used throughout: h=(1,.8), g=(.4,.2), P=(5,5)."""
    return ChannelInstance(
        h=[1.0, 0.8],
        g=[0.4, 0.2],
        p=[5.0, 5.0],
        h_p=1.0,
        p_p=10.0,
        sigma_p2=1.0,
        sigma_c2=1.0,
    )


@pytest.fixture
def k2_no_interference():
    return ChannelInstance(
        h=[1.0, 1.0], g=[0.0, 0.0], p=[1.0, 1.0], h_p=1.0, p_p=1.0,
        sigma_p2=1.0, sigma_c2=1.0,
    )


def bisect_root(func, lo, hi, iters=200):
    """Plain bisection; independent oracle for root-finding assertions."""
    f_lo = func(lo)
    f_hi = func(hi)
    assert f_lo * f_hi <= 0, "no sign change in bracket"
    for _ in range(iters):
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        if func(mid) * f_lo <= 0:
            hi = mid
        else:
            lo, f_lo = mid, func(mid)
    return 0.5 * (lo + hi)
