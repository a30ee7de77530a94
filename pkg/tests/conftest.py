import numpy as np
import pytest

import gradlab as g


@pytest.fixture(scope="session")
def interval16():
    return g.build_basis("interval", 16)


@pytest.fixture(scope="session")
def square64():
    return g.build_basis("square", 64)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
