"""Shared fixtures and the per-criterion summary printed after the run."""

from __future__ import annotations

import numpy as np
import pytest

from oceanqso import ModelParameters

# criterion number -> list of (nodeid, passed)
_CRITERIA: dict[int, list[tuple[str, bool]]] = {}
_TITLES: dict[int, str] = {}


def pytest_configure(config):
    config.addinivalue_line(
        "markers", "criterion(number, title): acceptance criterion covered by the test"
    )


def pytest_collection_modifyitems(items):
    for item in items:
        mark = item.get_closest_marker("criterion")
        if mark is not None:
            number, title = mark.args
            _TITLES[number] = title
            _CRITERIA.setdefault(number, [])


def pytest_runtest_logreport(report):
    if report.when != "call" and not (report.when == "setup" and report.outcome != "passed"):
        return
    for key, value in report.user_properties:
        if key == "criterion":
            _CRITERIA.setdefault(value, []).append((report.nodeid, report.passed))


@pytest.hookimpl(tryfirst=True)
def pytest_runtest_setup(item):
    mark = item.get_closest_marker("criterion")
    if mark is not None:
        item.user_properties.append(("criterion", mark.args[0]))


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    tr = terminalreporter
    tr.section("acceptance criteria")
    for number in sorted(_CRITERIA):
        outcomes = _CRITERIA[number]
        if not outcomes:
            status = "NOT RUN"
        elif all(ok for _, ok in outcomes):
            status = "PASS"
        else:
            status = "FAIL"
        tr.write_line(f"criterion {number}: {status}  {_TITLES.get(number, '')} ({len(outcomes)} checks)")


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture
def case_31():
    return ModelParameters(0.25, 0.5, 1.0, 0.75)


@pytest.fixture
def case_32():
    return ModelParameters.from_strings("1/6", "1/3", "4/3", "2/3")
