import numpy as np
import pytest

from ris_lab.channel import NomaConfig, SystemConfig, fit_cascade
from ris_lab.montecarlo import block_rng, sample_cascade

# lines recorded by the acceptance suite, echoed in the terminal summary
ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


def ecdf_sup_gap(samples, cdf, points):
    """max |F_emp(x) - F(x)| over the given evaluation points."""
    s = np.sort(np.asarray(samples))
    emp = np.searchsorted(s, points, side="right") / s.size
    return float(np.max(np.abs(emp - cdf(points))))


@pytest.fixture(scope="session")
def cfg():
    return SystemConfig()


@pytest.fixture(scope="session")
def noma():
    return NomaConfig()


@pytest.fixture(scope="session")
def fit(cfg):
    return fit_cascade(cfg)


@pytest.fixture(scope="session")
def cascade_samples(cfg):
    """10^6 draws of the cascade amplitude X for the default configuration."""
    parts = [sample_cascade(cfg, block_rng(2024, b), 20_000) for b in range(50)]
    return np.concatenate(parts)
