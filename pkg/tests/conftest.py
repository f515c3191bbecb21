import os

import numpy as np
import pytest

from beam.timoshenko import BeamModel
from dirac import fixtures
from dirac.models import make_bvp

FIXTURES_DIR = os.path.join(os.path.dirname(os.path.dirname(os.path.abspath(__file__))), "data", "fixtures")


@pytest.fixture
def fixtures_dir():
    return FIXTURES_DIR


@pytest.fixture
def periodic():
    return fixtures.periodic()


@pytest.fixture
def dirichlet():
    return fixtures.dirichlet_type()


@pytest.fixture
def degenerate():
    return fixtures.first_component_dirichlet()


@pytest.fixture
def triangular():
    return fixtures.triangular_family(np.pi / 2)


@pytest.fixture
def reflection():
    return fixtures.reflection()


@pytest.fixture
def scalar_periodic():
    return make_bvp((1.0,), [[1.0]], [[-1.0]])


@pytest.fixture
def scalar_volterra():
    return fixtures.initial_value()


@pytest.fixture
def jordan_block():
    """Equal weights with a nilpotent potential: Delta = (1 - e^{i lambda})^2, one chain of length 2 at 0"""
    Q = np.array([[0.0, 1.0], [0.0, 0.0]])
    return make_bvp((1.0, 1.0), np.eye(2), -np.eye(2), Q)


@pytest.fixture
def ln3_beam():
    return BeamModel.uniform(length=1.0, rho=1.0, I_rho=4.0, K=1.0, EI=1.0,
                             alpha1=2.5, alpha2=13.0 / 12.0)
