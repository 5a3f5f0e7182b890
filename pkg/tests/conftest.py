import numpy as np
import pytest

from pframe.sphere import Configuration


def random_configuration(rng, d, n):
    return Configuration(rng.standard_normal((n, d)))


def random_orthogonal(rng, d):
    q, r = np.linalg.qr(rng.standard_normal((d, d)))
    return q * np.sign(np.diag(r))


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture
def onb2():
    return Configuration(np.eye(2))


@pytest.fixture
def mercedes():
    from pframe.sphere import mercedes_frame

    return mercedes_frame()


@pytest.fixture
def onb_plus_repeat():
    return Configuration([[1.0, 0.0], [0.0, 1.0], [1.0, 0.0]])
