import numpy as np
import pytest

from carousel import backends
from carousel.central_config import binary_config, lagrange_config
from carousel.carousel import make_family, plan_rational
from carousel.core import Alpha


@pytest.fixture(scope="session", autouse=True)
def warm_kernels():
    """Compile the numba kernels once so timed tests measure compute."""
    backends.accel(np.array([[0.0, 0.0], [1.0, 0.0]]), np.array([1.0, 1.0]), 2.0)
    backends.min_pair_dist(np.array([[0.0, 0.0], [1.0, 0.0]]))
    backends.s_all(8, 2.0)
    lo, hi = backends.s_all_iv(8, 2.0)
    backends.grav_block_margins(lo, hi)


@pytest.fixture(scope="session")
def cabled_lagrange():
    """The reference instance: Lagrange (1, 2, 3) with body 1 replaced by an
    equal-mass pair, alpha = 3/2, p_1 = 1."""
    alpha = Alpha.parse("3/2")
    base = lagrange_config(1.0, 2.0, 3.0, alpha)
    cluster = binary_config(0.5, 0.5, alpha)
    return make_family(base, [cluster])


@pytest.fixture(scope="session")
def plan_eps_001(cabled_lagrange):
    """Rational plan with eps ~ 0.01 for the reference instance
    (q = 1, nu = 315, so eps = 316^(-4/5) = 0.010006)."""
    return plan_rational([1], 315, 1, cabled_lagrange.alpha)
