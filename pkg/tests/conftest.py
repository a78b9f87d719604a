import numpy as np
import pytest

from polyot.manifold import make_manifold
from polyot.sinkhorn import SinkhornConfig
from polyot.utils import sample_simplex

TIGHT = SinkhornConfig(tol=1e-13, max_iter=200000)


@pytest.fixture
def rng():
    return np.random.default_rng(20241019)


@pytest.fixture
def uniform_2x2():
    return make_manifold([0.5, 0.5], [0.5, 0.5])


@pytest.fixture
def manifold_4x5(rng):
    return make_manifold(sample_simplex(rng, 4), sample_simplex(rng, 5), TIGHT)


@pytest.fixture
def quarter():
    return np.full((2, 2), 0.25)


@pytest.fixture
def checker():
    return np.array([[1.0, -1.0], [-1.0, 1.0]])
