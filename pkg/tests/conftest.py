import numpy as np
import pytest

from hamspec import ContinuousSystem, DiscreteSystem, dirichlet, make_problem, periodic

from oracles import P_HARMONIC, W_HARMONIC


@pytest.fixture(scope="session")
def harmonic_spec():
    return ContinuousSystem(1, (0.0, np.pi), P_HARMONIC, W_HARMONIC)


@pytest.fixture(scope="session")
def harmonic_periodic_spec():
    return ContinuousSystem(1, (0.0, 2 * np.pi), P_HARMONIC, W_HARMONIC)


@pytest.fixture(scope="session")
def chain_spec():
    return DiscreteSystem(1, (0, 4), 0, 1, 0, 1, 0)


@pytest.fixture(scope="session")
def dirichlet_problem(harmonic_spec):
    return make_problem(harmonic_spec, dirichlet(1))


@pytest.fixture(scope="session")
def periodic_problem(harmonic_periodic_spec):
    return make_problem(harmonic_periodic_spec, periodic(1))


@pytest.fixture(scope="session")
def chain_problem(chain_spec):
    return make_problem(chain_spec, dirichlet(1))
