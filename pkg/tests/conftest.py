import datetime as dt

import numpy as np
import pytest

from elspot.fou import FouParams
from elspot.series import PriceSeries
from elspot.simulate import REFERENCE_JUMP, synthetic_price_series


@pytest.fixture(scope="session")
def synthetic_730():
    """730-day synthetic price series with known components."""
    return synthetic_price_series(FouParams(0.1, 6.0, 0.5), REFERENCE_JUMP, 730, seed=11)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def make_series(values, start=dt.date(2009, 1, 5)):
    return PriceSeries(start, np.asarray(values, dtype=float))


# one line per acceptance criterion, shown at the end of every run
ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
