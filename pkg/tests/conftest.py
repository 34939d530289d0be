import math
from importlib import resources

import pytest

from smallbias.setfile import read_set

SQRT_02 = math.sqrt(0.2)

_criteria = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(num, title): acceptance criterion")


def pytest_runtest_logreport(report):
    if report.when != "call" and not (report.when == "setup" and report.outcome != "passed"):
        return
    marker = getattr(report, "criterion", None)
    if marker is not None:
        _criteria.setdefault(marker, []).append(report.outcome)


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    mark = item.get_closest_marker("criterion")
    if mark is not None:
        rep.criterion = mark.args


def pytest_terminal_summary(terminalreporter):
    if not _criteria:
        return
    terminalreporter.section("acceptance criteria")
    for (num, title), outcomes in sorted(_criteria.items()):
        status = "PASS" if all(o == "passed" for o in outcomes) else "FAIL"
        terminalreporter.write_line(f"criterion {num}: {status}  {title}")


def fixture_path(p):
    return resources.files("smallbias") / "fixtures" / f"table1_p{p:03d}.txt"


@pytest.fixture
def table1():
    return lambda p: read_set(fixture_path(p))
