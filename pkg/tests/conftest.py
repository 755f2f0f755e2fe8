import numpy as np
import pytest

from seqwit.quantum_model import StateKind, named_state
from seqwit.utils import set_quiet


@pytest.fixture(autouse=True)
def quiet_logs():
    set_quiet(True)
    yield
    set_quiet(False)


@pytest.fixture
def rng():
    return np.random.default_rng(2020)


@pytest.fixture
def ghz():
    return named_state(StateKind.GHZ)


@pytest.fixture
def w_state():
    return named_state(StateKind.W)
