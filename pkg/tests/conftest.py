import numpy as np
import pytest

from spincd import ModelParams, Schedule


@pytest.fixture
def quintic():
    return Schedule(t_f=1.0, kind="quintic")


@pytest.fixture
def headline_params():
    return ModelParams(coupling=1.0, field_h=1e-3, n_spins=1000)


@pytest.fixture
def rng():
    return np.random.default_rng(20260814)
