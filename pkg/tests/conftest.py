from __future__ import annotations

import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from coarse_scope.presentation import load  # noqa: E402

PRESETS = [
    "bs(1,3)",
    "bs(1,2)",
    "bs(2,3)",
    "f2xZ",
    "f2xZ^2",
    "zxz",
    "leary-minasyan",
    "zn-semidirect(2,1,1,1)",
    "z^2",
]


@pytest.fixture(scope="session")
def bs13():
    return load("bs(1,3)")


@pytest.fixture(scope="session")
def f2z():
    return load("f2xZ")


@pytest.fixture(scope="session")
def lm():
    return load("leary-minasyan")


# one line per acceptance criterion, printed after the run
ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
