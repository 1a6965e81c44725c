import numpy as np
import pytest

from rnmf import datagen

ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture(scope="session")
def small_clean():
    """Noiseless 5 x 10 instance with 3 rays."""
    return datagen.generate(5, 10, 3, seed=0)
