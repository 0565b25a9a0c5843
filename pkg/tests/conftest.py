import numpy as np
import pytest

from slenderloop.geometry import build_frame, circle, perturbed_circle
from slenderloop.ntd import multiplier_table

ACCEPTANCE_LINES = []


@pytest.fixture(scope="session")
def circle128():
    return circle(128)


@pytest.fixture(scope="session")
def wobbly128():
    return perturbed_circle(128, mode=3, amplitude=1e-2, lift=0.05)


@pytest.fixture(scope="session")
def table128():
    return multiplier_table(1e-2, 128)


@pytest.fixture(scope="session")
def wobbly_frame(wobbly128):
    return build_frame(wobbly128)


@pytest.fixture
def rng():
    return np.random.default_rng(0)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line[1])
