import numpy as np
import pytest

from igopca.orientation import OrientationImage

_ACCEPTANCE = []


def random_angles(rng, shape):
    return rng.uniform(0.0, 2 * np.pi, size=shape)


def random_phi(rng, shape=(8, 8)):
    return OrientationImage.from_angles(random_angles(rng, shape))


def random_complex(rng, *shape):
    return rng.normal(size=shape) + 1j * rng.normal(size=shape)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture
def acceptance_log():
    return _ACCEPTANCE


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for line in _ACCEPTANCE:
        terminalreporter.write_line(line)
