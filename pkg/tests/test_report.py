import csv
import io
import json

import numpy as np
import pytest
from hypothesis import given

from rotablue.diagnostics import Decision
from rotablue.report import (
    complex_from_json,
    complex_to_json,
    dumps,
    rows_csv,
    solution_csv,
    solution_from_dict,
    solution_pretty,
    solution_to_dict,
    solutions_equal,
)

from .conftest import GOLDEN, solved
from .strategies import patterns, rhos


@pytest.mark.parametrize("text, rho", GOLDEN)
def test_json_round_trip(text, rho):
    sol = solved(text, rho)
    data = json.loads(dumps(solution_to_dict(sol)))
    assert solutions_equal(solution_from_dict(data), sol)
    assert {"pattern", "rho", "p", "roots", "ds", "a", "r", "variance", "assumption1", "assumption2", "residuals"} <= set(data)
    assert data["assumption1"] == "pass" and data["assumption2"] == "pass"


@given(patterns(max_n=10, uniform_gaps=True), rhos)
def test_json_round_trip_property(text, rho):
    sol = solved(text, rho)
    assert solutions_equal(solution_from_dict(json.loads(dumps(solution_to_dict(sol)))), sol)


def test_complex_codec():
    z = np.array([[1 + 2j, -0.5j], [3.0, 1e-300 + 0j]])
    assert np.array_equal(complex_from_json(json.loads(json.dumps(complex_to_json(z)))), z)


def test_decision_round_trip():
    d = Decision("AssumptionI", False, "x", offenders=(0.5 + 0j, 2.0), metrics={"min_separation": 1.5})
    assert Decision.from_dict(json.loads(json.dumps(d.to_dict()))) == d


def test_csv_layout():
    sol = solved("1101101", 0.5)
    rows = list(csv.DictReader(io.StringIO(solution_csv(sol))))
    r_rows = [r for r in rows if r["quantity"] == "r"]
    assert len(r_rows) == (sol.p + 1) * sol.pattern.N
    assert {int(r["slot"]) for r in r_rows} == set(range(1, 8))
    first = next(r for r in r_rows if r["index"] == "0" and r["slot"] == "1")
    assert float(first["value"]) == sol.r[0, 0]


def test_pretty_layout():
    text = solution_pretty(solved("111111", 0.9))
    assert "a_1 = 0.794192" in text
    assert "0.176487" in text and "-0.158838" in text
    header = next(line for line in text.splitlines() if line.strip().startswith("slot"))
    assert header.split() == ["slot", "r_0", "r_1"]


def test_rows_csv_union_header():
    out = rows_csv([{"rho": 0.1, "ok": True}, {"rho": 0.2, "extra": 1.5}])
    assert out.splitlines()[0] == "rho,ok,extra"
    assert out.splitlines()[1] == "0.1,pass,"
