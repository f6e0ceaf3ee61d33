import math

import pytest

from weylbec.presets import get_preset

PI = math.pi


@pytest.fixture(scope="session")
def ex1():
    return get_preset("example1")


@pytest.fixture(scope="session")
def ex2():
    return get_preset("example2")


@pytest.fixture(scope="session")
def ex3():
    return get_preset("example3")


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    results = getattr(config, "_acceptance_results", None)
    if not results:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(results):
        terminalreporter.write_line(results[number])
