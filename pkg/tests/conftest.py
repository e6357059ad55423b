import random
import warnings

import pytest

from true2f import harness


@pytest.fixture
def rng():
    return random.Random(1234)


@pytest.fixture
def deployment():
    """An initialized honest deployment with one account at each of two sites."""
    dep = harness.Deployment(seed=7, n_origins=2)
    dep.initialize()
    for rp in dep.sites:
        dep.register(rp)
    return dep


@pytest.fixture
def quiet():
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        yield
