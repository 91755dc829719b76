import pytest

from fixtures_machines import fourth_power, ndup, squarer


@pytest.fixture
def sq():
    return squarer()


@pytest.fixture
def nd():
    return ndup()


@pytest.fixture
def f4():
    return fourth_power()
