import numpy as np
import pytest

from src.config.parser import DEFAULT_CONFIG
from src.config.run_config import RunConfig
from src.nonlinearity.nonlinearity import make_exponential, make_power
from src.phase_plane.shooting import solve_large_solution
from src.picard.fixed_point import fixed_point


@pytest.fixture
def rng():
    return np.random.default_rng(RunConfig.from_dict(DEFAULT_CONFIG).seed)


@pytest.fixture(scope="session")
def square():
    return make_power(2)


@pytest.fixture(scope="session")
def cubic():
    return make_power(3)


@pytest.fixture(scope="session")
def quintic():
    return make_power(5)


@pytest.fixture(scope="session")
def exponential():
    return make_exponential()


@pytest.fixture(scope="session")
def square_solution(square):
    return solve_large_solution(square, 3)


@pytest.fixture(scope="session")
def cubic_solution(cubic):
    return solve_large_solution(cubic, 3)


@pytest.fixture(scope="session")
def quintic_solution(quintic):
    return solve_large_solution(quintic, 3)


@pytest.fixture(scope="session")
def square_picard(square):
    return fixed_point(square, 3)


@pytest.fixture(scope="session")
def cubic_picard(cubic):
    return fixed_point(cubic, 3)


@pytest.fixture(scope="session")
def quintic_picard(quintic):
    return fixed_point(quintic, 3)
