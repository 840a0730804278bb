import numpy as np
import pytest

from measchain import examples, scenario

ACCEPTANCE_LINES: list[str] = []


@pytest.fixture
def rng():
    return np.random.default_rng(20071115)


@pytest.fixture(params=examples.NAMES)
def shipped(request):
    return request.param, scenario.load(examples.path(request.param))


def load_shipped(name):
    return scenario.load(examples.path(name)).scenario


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
