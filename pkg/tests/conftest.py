import math

import numpy as np
import pytest
from hypothesis import settings

from l1lap import BpInstance, random_instance

settings.register_profile("default", deadline=None, max_examples=40)
settings.load_profile("default")


def tiny_instance(seed, m_range=(3, 10), density=0.5):
    """Random Gaussian instance with n = ceil(m/2), small enough for the oracle."""
    rng = np.random.default_rng(seed)
    m = int(rng.integers(m_range[0], m_range[1] + 1))
    return random_instance(m, math.ceil(m / 2), density, seed)


def dense_pair(seed, m_max=10):
    """(instance, x) with a fully random b and x drawn from [0.5, 2]^m."""
    rng = np.random.default_rng(seed)
    m = int(rng.integers(1, m_max + 1))
    n = int(rng.integers(1, m + 1))
    inst = BpInstance(rng.standard_normal((n, m)), rng.standard_normal(n))
    return inst, rng.uniform(0.5, 2.0, m)


@pytest.fixture
def pair11():
    return BpInstance([[1.0, 1.0]], [1.0])


@pytest.fixture
def scalar():
    return BpInstance([[1.0]], [1.0])
