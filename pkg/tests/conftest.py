import os

import pytest

from causalfuse.cli import fixture_dir
from causalfuse.inference import CauseQueryOptions
from causalfuse.model import load_model

FIXTURES = fixture_dir()
DATA = os.path.join(os.path.dirname(__file__), "data")

# the integrated model has 29 endogenous variables, above the default cap
WIDE = CauseQueryOptions(max_model_size=32)


def fixture(name):
    return os.path.join(FIXTURES, name)


def data(name):
    return os.path.join(DATA, name)


@pytest.fixture
def rock():
    return load_model(fixture("rock.json"))


@pytest.fixture(scope="session")
def integrated():
    return load_model(fixture("integrated.json"))


_criteria = {}


def pytest_runtest_logreport(report):
    if report.when != "call" and not (report.when == "setup" and report.failed):
        return
    marker = getattr(report, "criterion", None)
    if marker is None:
        return
    num, title = marker
    prev = _criteria.get(num, (title, True))
    _criteria[num] = (title, prev[1] and report.passed)


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    m = item.get_closest_marker("criterion")
    if m is not None:
        rep.criterion = (m.args[0], m.args[1])


def pytest_terminal_summary(terminalreporter):
    if not _criteria:
        return
    terminalreporter.section("acceptance criteria")
    for num in sorted(_criteria):
        title, ok = _criteria[num]
        terminalreporter.write_line(f"criterion {num}: {'PASS' if ok else 'FAIL'}  {title}")
