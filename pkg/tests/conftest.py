import numpy as np
import pytest

from rcusaddle import ChannelModel, builtin_bsc


def random_channel(rows, cols, seed):
    rng = np.random.default_rng(seed)
    W = rng.dirichlet(np.ones(cols), size=rows)
    Q = rng.dirichlet(np.ones(rows))
    return ChannelModel(W=W, Q=Q)


@pytest.fixture(scope="session")
def bsc():
    return builtin_bsc(0.15)


@pytest.fixture(scope="session")
def nonlattice():
    # 2x3 with incommensurate information-density values
    return ChannelModel(W=[[0.7, 0.2, 0.1], [0.1, 0.3, 0.6]], Q=[0.5, 0.5])


@pytest.fixture(scope="session")
def random34():
    return random_channel(3, 4, seed=7)


@pytest.fixture(scope="session")
def identical_rows():
    return ChannelModel(W=[[0.3, 0.7], [0.3, 0.7]], Q=[0.5, 0.5])


@pytest.fixture(scope="session")
def noiseless3():
    return ChannelModel(W=np.eye(3), Q=np.ones(3) / 3)


@pytest.fixture(scope="session")
def bec():
    return ChannelModel(W=[[0.8, 0.2, 0.0], [0.0, 0.2, 0.8]], Q=[0.5, 0.5])


ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
