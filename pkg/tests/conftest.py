import random

import pytest

from rlcc.gf import Field


@pytest.fixture(scope="session")
def gf4():
    return Field(2, 2)


@pytest.fixture(scope="session")
def gf8():
    return Field(2, 3)


@pytest.fixture(scope="session")
def gf27():
    return Field(3, 3)


@pytest.fixture
def rng():
    return random.Random(0xC0DE)
