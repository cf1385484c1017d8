import pytest
from hypothesis import settings

from tripledeck.profiles import couette, example1, example2

settings.register_profile("default", deadline=None, max_examples=30, derandomize=True)
settings.load_profile("default")

MU_INF_EXAMPLE2 = complex(2.6200379348926957, 0.6767105386017798)  # frozen; mpmath |Phi| ~ 2e-12


@pytest.fixture(scope="session")
def ex1():
    return example1()


@pytest.fixture(scope="session")
def ex2():
    return example2()


@pytest.fixture(scope="session")
def flat():
    return couette()


@pytest.fixture(scope="session")
def mu_inf():
    return MU_INF_EXAMPLE2
