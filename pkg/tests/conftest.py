import pytest

from couplematch.model import validate_instance
from couplematch.theorems import build_closing_example, build_example_1, build_example_2

ACCEPTANCE_LINES = []


@pytest.fixture(scope="session")
def example2():
    return build_example_2()


@pytest.fixture(scope="session")
def example1_family():
    return build_example_1()


@pytest.fixture(scope="session")
def example1(example1_family):
    return example1_family.base


@pytest.fixture(scope="session")
def closing():
    return build_closing_example()


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
