import numpy as np
import pytest

from lqgame.fixtures import example_game
from lqgame.stationary import iterate_to_limit

_acceptance = {}


def pytest_runtest_logreport(report):
    if "test_acceptance.py" not in report.nodeid:
        return
    if report.when == "call" or (report.when == "setup" and report.outcome != "passed"):
        name = report.nodeid.split("::")[-1]
        _acceptance[name] = report.outcome


def pytest_terminal_summary(terminalreporter):
    if not _acceptance:
        return
    terminalreporter.section("acceptance criteria")
    for name in sorted(_acceptance, key=lambda s: int(s.split("_")[1][1:]) if s.split("_")[1][1:].isdigit() else 99):
        status = "PASS" if _acceptance[name] == "passed" else "FAIL"
        terminalreporter.write_line(f"{status}  {name}")


@pytest.fixture(scope="session")
def example_spec():
    return example_game()


@pytest.fixture(scope="session")
def example_sol(example_spec):
    return iterate_to_limit(example_spec)


@pytest.fixture(scope="session")
def zero_spec(example_spec):
    return example_spec.with_zero_refs()


@pytest.fixture(scope="session")
def zero_sol(zero_spec):
    return iterate_to_limit(zero_spec)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
