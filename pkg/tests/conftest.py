import numpy as np
import pytest
from hypothesis import settings

from peakinterp import catalog

settings.register_profile("default", max_examples=40, deadline=None)
settings.load_profile("default")

# lines printed by the acceptance module, echoed in the terminal summary
ACCEPTANCE_LINES: list = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


@pytest.fixture(scope="session")
def ball2():
    return catalog.ball(2)


@pytest.fixture(scope="session")
def ball3():
    return catalog.ball(3)


@pytest.fixture(scope="session")
def egg2():
    return catalog.egg(2)


@pytest.fixture(scope="session")
def hopf():
    return catalog.hopf()


@pytest.fixture(scope="session")
def torus():
    return catalog.torus3()


@pytest.fixture(scope="session")
def egg_curve():
    return catalog.egg_curve()


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)
