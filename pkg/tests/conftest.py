import numpy as np
import pytest

from abphase import PhaseGrid


@pytest.fixture(scope="session")
def grid128():
    # conjugate grid with dq = dp, so q and p span the same range
    return PhaseGrid.symmetric(np.sqrt(128 * np.pi / 2), 128)


@pytest.fixture(scope="session")
def grid256():
    return PhaseGrid.symmetric(np.sqrt(256 * np.pi / 2), 256)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import RESULTS
    except ImportError:
        return
    if RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in RESULTS:
            terminalreporter.write_line(line)
