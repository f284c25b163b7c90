import os
import sys

import numpy as np
import pytest
from hypothesis import HealthCheck, settings
from hypothesis import strategies as st

sys.path.insert(0, os.path.dirname(__file__))

from sjball import ModelParams  # noqa: E402
from sjball.core import random_point  # noqa: E402

settings.register_profile(
    "default",
    max_examples=25,
    deadline=None,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))

seeds = st.integers(min_value=0, max_value=2**32 - 1)
dims = st.integers(min_value=1, max_value=3)
weights = st.floats(min_value=0.5, max_value=6.0)


@pytest.fixture
def rng():
    return np.random.default_rng(20240607)


@pytest.fixture(params=[1, 2, 3], ids=lambda n: f"n{n}")
def n(request):
    return request.param


@pytest.fixture
def params(n):
    return ModelParams(n, 3.0, 1.5)


@pytest.fixture
def point(n, rng):
    return random_point(n, rng)
