import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from deliverydp import StateGrid, solve_horizon, table1  # noqa: E402

ACCEPTANCE_LOG: list[str] = []


@pytest.fixture(scope="session")
def inst():
    return table1()


@pytest.fixture(scope="session")
def grid(inst):
    return StateGrid.for_instance(inst)


@pytest.fixture(scope="session")
def trajectory(inst, grid):
    return solve_horizon(inst, grid)


@pytest.fixture(scope="session")
def small_inst():
    """The built-in instance on a 3x3 lattice."""
    return table1(capacity=[[2, 2]])


@pytest.fixture(scope="session")
def small_grid(small_inst):
    return StateGrid.for_instance(small_inst)


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    if call.when == "call":
        item.rep_call = outcome.get_result()


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LOG:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LOG:
            terminalreporter.write_line(line)
