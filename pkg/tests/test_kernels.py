import os
import subprocess
import sys

import numpy as np
import pytest
from hypothesis import given

from conftest import dims, seeds
from sjball import ModelParams, kernels
from sjball.connection import christoffel
from sjball.core import aux_matrices, ordered_pairs, random_point
from sjball.metric import metric_matrix

pytestmark = pytest.mark.skipif(not kernels.HAVE_NUMBA, reason="numba not installed")


@given(seeds, dims)
def test_metric_blocks_agree(seed, n):
    p = ModelParams(n, 2.5, 0.7)
    aux = aux_matrices(p, random_point(n, seed))
    pairs = ordered_pairs(n)
    a = kernels.get_backend("numpy").metric_blocks(aux.M, aux.eta, p.k, p.mu, pairs)
    b = kernels.get_backend("numba").metric_blocks(aux.M, aux.eta, p.k, p.mu, pairs)
    for x, y in zip(a, b):
        assert np.max(np.abs(x - y)) < 1e-12 * max(1, np.max(np.abs(x)))


@given(seeds, dims)
def test_christoffel_agree(seed, n):
    p = ModelParams(n, 2.5, 0.7)
    aux = aux_matrices(p, random_point(n, seed))
    pairs = ordered_pairs(n)
    a = kernels.get_backend("numpy").christoffel(aux.X, aux.eta, p.epsilon, pairs)
    b = kernels.get_backend("numba").christoffel(aux.X, aux.eta, p.epsilon, pairs)
    assert np.max(np.abs(a - b)) < 1e-12 * max(1, np.max(np.abs(a)))


def test_public_api_backends(rng):
    p = ModelParams(3, 3.0, 1.5)
    pt = random_point(3, rng)
    assert np.allclose(metric_matrix(p, pt, "numpy").assembled, metric_matrix(p, pt, "numba").assembled, atol=1e-13)
    assert np.allclose(christoffel(p, pt, "numpy").flat, christoffel(p, pt, "numba").flat, atol=1e-12)


def test_unknown_backend():
    with pytest.raises(ValueError):
        kernels.get_backend("fortran")


@pytest.mark.parametrize("value, expected", [("0", "numpy"), ("off", "numpy"), ("1", "numba"), (None, "numba")])
def test_env_flag(value, expected):
    env = dict(os.environ)
    env.pop("SJB_NUMBA", None)
    if value is not None:
        env["SJB_NUMBA"] = value
    out = subprocess.run(
        [sys.executable, "-c", "import sjball; print(sjball.backend_name())"],
        env=env, capture_output=True, text=True, check=True,
    )
    assert out.stdout.strip() == expected
