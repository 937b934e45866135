from __future__ import annotations

import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from opacsynth.oracle import load_fixture  # noqa: E402

ACCEPTANCE_LINES: list[str] = []


@pytest.fixture(scope="session")
def fig1():
    return load_fixture("fig1_G")


@pytest.fixture(scope="session")
def fig1_g1():
    return load_fixture("fig1_G1")


@pytest.fixture(scope="session")
def fig5():
    return load_fixture("fig5_G")


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
