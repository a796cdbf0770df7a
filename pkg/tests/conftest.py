import os
import sys

import pytest

sys.path.insert(0, os.path.dirname(__file__))

# criterion number -> outcomes of its tests, and test node id -> criterion number
_criteria: dict[int, list[str]] = {}
_criterion_of: dict[str, int] = {}


def pytest_runtest_logreport(report):
    if report.when != "call" and not (report.when == "setup" and report.outcome != "passed"):
        return
    n = _criterion_of.get(report.nodeid)
    if n is not None:
        _criteria.setdefault(n, []).append(report.outcome)


def pytest_collection_modifyitems(items):
    for item in items:
        m = item.get_closest_marker("acceptance")
        if m is not None:
            _criterion_of[item.nodeid] = int(m.args[0])


def pytest_terminal_summary(terminalreporter):
    if not _criteria:
        return
    tr = terminalreporter
    tr.section("acceptance criteria")
    for n in sorted(_criteria):
        outcomes = _criteria[n]
        ok = all(o == "passed" for o in outcomes)
        tr.write_line(f"criterion {n:2d}: {'PASS' if ok else 'FAIL'} ({len(outcomes)} check(s))")


@pytest.fixture(scope="session")
def universities():
    from lstab.fixtures import load_fixture

    return load_fixture("universities")


@pytest.fixture(scope="session")
def csrankings():
    from lstab.fixtures import load_fixture

    return load_fixture("csrankings")
