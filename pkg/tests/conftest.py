import numpy as np
import pytest

from fraclap.core import FractionalOrder, Interval
from fraclap.dirichlet import build_dirichlet_model


@pytest.fixture(scope="session")
def model_factory():
    cache = {}

    def make(a=0.75, alpha=-1.0, beta=1.0, N=120):
        key = (a, alpha, beta, N)
        if key not in cache:
            cache[key] = build_dirichlet_model(Interval(alpha, beta), FractionalOrder(a), N)
        return cache[key]

    return make


@pytest.fixture(scope="session")
def model(model_factory):
    return model_factory()


@pytest.fixture
def rng():
    return np.random.default_rng(20261015)
