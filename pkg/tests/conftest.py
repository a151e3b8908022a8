import os
from pathlib import Path

import pytest

from termmodal.scenario import fixture_dir

os.environ.setdefault("TERMMODAL_EVENT_CAP", str(2 ** 16))

_criteria = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(n): acceptance criterion number")


def pytest_runtest_logreport(report):
    if report.when != "call" and not (report.when == "setup" and report.failed):
        return
    for n in getattr(report, "criteria", ()):
        _criteria[n] = _criteria.get(n, True) and report.passed


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    rep.criteria = [m.args[0] for m in item.iter_markers("criterion")]


def pytest_terminal_summary(terminalreporter):
    if not _criteria:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(_criteria):
        terminalreporter.write_line(f"criterion {n:2d}: {'PASS' if _criteria[n] else 'FAIL'}")


@pytest.fixture
def fixtures() -> Path:
    return fixture_dir()
