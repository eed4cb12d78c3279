import math

import numpy as np
import pytest

from pergrowth.phase import Composition, IntegrableTwist, Translation

# one line per acceptance criterion, filled by tests/test_acceptance.py
CRITERIA: dict = {}


def twist_map(theta=1.0 / 3.0, slope=1.0):
    """(x, y) -> (x + theta + slope * y, y)."""
    return Composition((IntegrableTwist(slope), Translation(theta)))


@pytest.fixture
def twist_third():
    return twist_map()


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def golden_height():
    """Height of the golden circle of the example map: sin(2 pi c) = golden mean."""
    return math.asin((math.sqrt(5.0) - 1.0) / 2.0) / (2.0 * math.pi)


def pytest_terminal_summary(terminalreporter):
    if not CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(CRITERIA):
        terminalreporter.write_line(CRITERIA[key])
