import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from lhvmc.cli import DEFAULT_SEED  # noqa: E402
from lhvmc.estimators import DEFAULT_GRID, DEFAULT_TRIALS, run_sweep  # noqa: E402

ACCEPTANCE_LINES = []


@pytest.fixture(scope="session")
def default_sweep():
    """The full default sweep: 28 points of 2^20 trials each."""
    return run_sweep(DEFAULT_SEED, DEFAULT_TRIALS, DEFAULT_GRID)


@pytest.fixture
def criterion():
    """Record one PASS/FAIL line and assert on it."""

    def check(name, ok, detail=""):
        line = f"{'PASS' if ok else 'FAIL'}  {name}" + (f"  [{detail}]" if detail else "")
        ACCEPTANCE_LINES.append(line)
        assert ok, line

    return check


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
