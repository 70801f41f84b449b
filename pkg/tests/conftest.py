import numpy as np
import pytest

from resolvent_workbench.fock import RepConfig, build_rep
from resolvent_workbench.space_model import build_canonical_pairs, build_lightray_hermite


@pytest.fixture(scope="session")
def canonical():
    return build_canonical_pairs(1)


@pytest.fixture(scope="session")
def hermite4():
    return build_lightray_hermite(4)


@pytest.fixture(scope="session")
def rep_canonical(canonical):
    return build_rep(canonical, RepConfig(boson_cutoff=16))


@pytest.fixture(scope="session")
def rep_hermite(hermite4):
    return build_rep(hermite4, RepConfig(boson_cutoff=12))


@pytest.fixture
def rng():
    return np.random.default_rng(1234)
