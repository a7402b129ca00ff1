import numpy as np
import pytest

from lagmech import instantiate, standard_samples
from lagmech.phase import PhasePoint


@pytest.fixture(scope="session")
def sys_a():
    return instantiate("SYS-A", {"c": 0.1})


@pytest.fixture(scope="session")
def sys_a_free():
    return instantiate("SYS-A", {"c": 0.0})


@pytest.fixture(scope="session")
def sys_b():
    return instantiate("SYS-B")


@pytest.fixture(scope="session")
def sys_c():
    return instantiate("SYS-C")


@pytest.fixture(scope="session")
def sys_d():
    return instantiate("SYS-D", {"e": -0.5})


@pytest.fixture(scope="session")
def sys_e_euclid():
    return instantiate("SYS-E", {"e": -1.0, "base": "EUCLID"})


@pytest.fixture(scope="session")
def sys_e_finsler():
    return instantiate("SYS-E", {"e": -1.0, "base": "SYS-C"})


@pytest.fixture(scope="session")
def euclid():
    return instantiate("EUCLID", {"n": 2})


def _samples(builtin, params=None, count=40):
    return standard_samples(builtin, params, count=count)


@pytest.fixture(scope="session")
def samples_a():
    return _samples("SYS-A", {"c": 0.1})


@pytest.fixture(scope="session")
def samples_b():
    return _samples("SYS-B")


@pytest.fixture(scope="session")
def samples_c():
    return _samples("SYS-C")


@pytest.fixture(scope="session")
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def p_oscillator():
    return PhasePoint((1.0,), (2.0,))
