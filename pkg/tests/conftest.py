import numpy as np
import pytest

from dptrack.event_gen import DetectorGeometry, EventGenConfig, generate_event
from dptrack.ising import IsingProblem


def random_ising(rng: np.random.Generator, n: int, low: float = -1.0, high: float = 1.0):
    return IsingProblem(rng.uniform(low, high, n), np.triu(rng.uniform(low, high, (n, n)), 1))


@pytest.fixture
def rng():
    return np.random.default_rng(20261018)


@pytest.fixture(scope="session")
def noiseless_5x6():
    geo = DetectorGeometry.uniform(6)
    cfg = EventGenConfig(n_tracks=5, curvature_range=(-0.05, 0.05), smear=False, seed=11)
    return generate_event(cfg, geo)


ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
