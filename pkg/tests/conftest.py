import math

import numpy as np
import pytest
from hypothesis import settings

from fraclap.grid import PeriodicField

settings.register_profile("repro", derandomize=True)
settings.load_profile("repro")


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def random_field(rng, dims, box=None, mean_zero=False, real=True):
    box = box or tuple(2 * math.pi for _ in dims)
    vals = rng.standard_normal(dims)
    if not real:
        vals = vals + 1j * rng.standard_normal(dims)
    if mean_zero:
        vals = vals - vals.mean()
    return PeriodicField(tuple(dims), tuple(box), vals)
