import numpy as np
import pytest

from iplt.audit import monte_carlo_audit

ACCEPTANCE_LINES: list[str] = []

_MC_CACHE: dict = {}


def monte_carlo_report(K, D, L, trials, seed=20240611):
    """Audit reports are expensive; share them between test modules."""
    key = (K, D, L, trials, seed)
    if key not in _MC_CACHE:
        _MC_CACHE[key] = monte_carlo_audit(K, D, L, trials, np.random.default_rng(seed))
    return _MC_CACHE[key]


@pytest.fixture
def mc_report():
    return monte_carlo_report


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
