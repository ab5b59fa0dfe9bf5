import numpy as np
import pytest
from hypothesis import settings

from quasitaub import kernels as K

settings.register_profile("numeric", deadline=None, max_examples=50, derandomize=True)
settings.load_profile("numeric")


@pytest.fixture(scope="session")
def gauss():
    return K.make_kernel("gaussian")


@pytest.fixture(scope="session")
def heat():
    return K.make_kernel("heat")


@pytest.fixture(scope="session")
def lizorkin():
    return K.make_kernel("paper_lizorkin")


@pytest.fixture(scope="session")
def mixed():
    return K.make_kernel("paper_mixed", 2)


@pytest.fixture(scope="session")
def degenerate():
    return K.make_kernel("degenerate_demo", 2)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)
