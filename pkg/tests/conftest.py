import numpy as np
import pytest

from aivip.graph import MixedGraph, directed
from aivip.simulation import true_dag


@pytest.fixture
def iv_dag():
    return MixedGraph(["S", "W", "Y", "U"], directed(("S", "W"), ("W", "Y"), ("U", "W"), ("U", "Y")))


@pytest.fixture
def iv_mag():
    return MixedGraph(["S", "W", "Y"], directed(("S", "W"), ("S", "Y"), ("W", "Y")))


@pytest.fixture
def group1_core():
    return true_dag("I", "consistent", noise_covariates=0)


@pytest.fixture
def group2_core():
    return true_dag("II", "consistent", noise_covariates=0)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)
