import pytest
from hypothesis import HealthCheck, settings

from crancomp import ComplexityModelParams, make_equally_spaced_table

settings.register_profile("default", deadline=None, max_examples=60,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")

# PASS/FAIL lines collected by the acceptance module
ACCEPTANCE_LINES: list = []


@pytest.fixture(scope="session")
def params():
    return ComplexityModelParams()


@pytest.fixture(scope="session")
def table10():
    return make_equally_spaced_table(10)


@pytest.fixture(scope="session")
def table27():
    return make_equally_spaced_table(27)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
