import os
from collections import OrderedDict
from functools import lru_cache

import pytest
from hypothesis import settings

from rotablue.pattern import ModelParams, parse_pattern
from rotablue.recurrence import solve_recurrence

settings.register_profile("default", max_examples=40, deadline=None)
settings.register_profile("stress", max_examples=1000, deadline=None)
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))

# (pattern, rho) of the four worked examples
PATTERSON = ("111111", 0.9)
TWO_GAPS = ("1101101", 0.5)
SZARKOWSKI = ("110011", 0.7)
CPS = ("1111000000001111", 0.9)
GOLDEN = [PATTERSON, TWO_GAPS, SZARKOWSKI, CPS]


@lru_cache(maxsize=None)
def solved(text: str, rho: float):
    return solve_recurrence(ModelParams(rho, parse_pattern(text)))


@pytest.fixture(scope="session")
def solve():
    return solved


# one summary line per acceptance criterion

_criteria: "OrderedDict[int, dict]" = OrderedDict()


def pytest_collection_modifyitems(items):
    for item in items:
        mark = item.get_closest_marker("acceptance")
        if mark is not None:
            number, title = mark.args
            entry = _criteria.setdefault(number, {"title": title, "outcomes": []})
            entry.setdefault("nodes", set()).add(item.nodeid)


def pytest_runtest_logreport(report):
    for entry in _criteria.values():
        if report.nodeid in entry.get("nodes", ()):
            if report.when == "call" or report.outcome != "passed":
                entry["outcomes"].append(report.outcome)


def pytest_terminal_summary(terminalreporter):
    if not _criteria:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_criteria):
        entry = _criteria[number]
        outcomes = entry["outcomes"]
        if not outcomes:
            status = "NOT RUN"
        elif all(o == "passed" for o in outcomes):
            status = "PASS"
        elif any(o == "failed" for o in outcomes):
            status = "FAIL"
        else:
            status = "SKIPPED"
        terminalreporter.write_line(f"criterion {number}: {status}  {entry['title']}")
