import pytest

from hutchfrac import corpus


@pytest.fixture(scope="session")
def fg():
    return corpus.load_example("fg_interval").system


@pytest.fixture(scope="session")
def sierpinski():
    return corpus.load_example("sierpinski").system


@pytest.fixture(scope="session")
def cantor():
    return corpus.load_example("cantor").system
