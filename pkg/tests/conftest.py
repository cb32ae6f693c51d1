import pytest

from mixfrac.scenarios import build_scenario, get_scenario
from mixfrac.spectral import GridSpec


@pytest.fixture(scope="session")
def grid32():
    return GridSpec(32, 20.0)


@pytest.fixture(scope="session")
def gauss_quadratic():
    return build_scenario(get_scenario("gauss-quadratic"))


@pytest.fixture(scope="session")
def regime_b():
    return build_scenario(get_scenario("regime-b-linear"))


def pytest_terminal_summary(terminalreporter):
    from test_acceptance import ACCEPTANCE_LINES

    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
