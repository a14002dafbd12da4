import numpy as np
import pytest

from geoflow import Grid


@pytest.fixture
def grid2():
    return Grid.from_box((-2.0, -2.0), (2.0, 2.0), 0.04)


@pytest.fixture
def grid3():
    return Grid.from_box((-1.6, -1.6, -1.6), (1.6, 1.6, 1.6), 0.08)


# lines recorded by the acceptance module, echoed after the run
ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split(".", 1)[0])):
            terminalreporter.write_line(line)
