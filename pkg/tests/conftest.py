import pytest

from edgecalc.cylinder import make_cylinder_grid

ACCEPTANCE_LINES = []


@pytest.fixture(scope="session")
def small_grid():
    """A coarse cylinder grid (L = 8, n_r = 64, 4 modes) for fast operator tests."""
    return make_cylinder_grid(8.0, 64, 4)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)
