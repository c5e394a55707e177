import random
from pathlib import Path

import pytest

from confapprox.synthetic import running_example_log, running_example_net

FIXTURES = Path(__file__).parent / "fixtures"


@pytest.fixture
def fixtures():
    return FIXTURES


@pytest.fixture(scope="session")
def net():
    return running_example_net()


@pytest.fixture(scope="session")
def log():
    return running_example_log()


@pytest.fixture
def rng():
    return random.Random(20240601)
