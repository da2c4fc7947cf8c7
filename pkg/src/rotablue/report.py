"""Serialization of solutions and reports (JSON, CSV, pretty text)."""

from __future__ import annotations

import csv
import io
import json
from typing import Any, Iterable

import numpy as np

from .diagnostics import Decision
from .pattern import ModelParams, parse_pattern
from .recurrence import RecurrenceSolution
from .roots import RootSpectrum

__all__ = [
    "complex_to_json",
    "complex_from_json",
    "solution_to_dict",
    "solution_from_dict",
    "solutions_equal",
    "partial_to_dict",
    "dumps",
    "solution_csv",
    "solution_pretty",
    "rows_csv",
    "rows_pretty",
]


def complex_to_json(z) -> Any:
    """Complex scalars/arrays as {"re", "im"} objects (nested lists for arrays)."""
    z = np.asarray(z)
    if z.ndim == 0:
        v = complex(z)
        return {"re": v.real, "im": v.imag}
    return [complex_to_json(x) for x in z]


def complex_from_json(obj) -> np.ndarray:
    if isinstance(obj, dict):
        return np.complex128(complex(obj["re"], obj["im"]))
    return np.array([complex_from_json(x) for x in obj], dtype=complex)


def solution_to_dict(sol: RecurrenceSolution) -> dict[str, Any]:
    pat = sol.pattern
    return {
        "status": "ok",
        "pattern": pat.text,
        "rho": sol.rho,
        "N": pat.N,
        "n": pat.n,
        "h": pat.h,
        "gap_positions": list(pat.H),
        "gap_sizes": list(pat.gaps),
        "p": sol.p,
        "roots": complex_to_json(sol.xs),
        "ds": complex_to_json(sol.ds),
        "a": sol.a.tolist(),
        "r": sol.r.tolist(),
        "c": complex_to_json(sol.c),
        "variance": sol.variance,
        "assumption1": sol.assumption1.label,
        "assumption2": sol.assumption2.label,
        "assumption1_detail": sol.assumption1.to_dict(),
        "assumption2_detail": sol.assumption2.to_dict(),
        "residuals": dict(sol.residuals),
    }


def solution_from_dict(data: dict[str, Any]) -> RecurrenceSolution:
    params = ModelParams(float(data["rho"]), parse_pattern(data["pattern"]))
    spectrum = RootSpectrum(xs=complex_from_json(data["roots"]), ds=complex_from_json(data["ds"]))
    c = complex_from_json(data["c"]).reshape(params.pattern.h + 1, -1)
    return RecurrenceSolution(
        params=params,
        spectrum=spectrum,
        a=np.array(data["a"], dtype=float),
        r=np.array(data["r"], dtype=float).reshape(-1, params.pattern.N),
        c=c,
        variance=float(data["variance"]),
        assumption1=Decision.from_dict(data["assumption1_detail"]),
        assumption2=Decision.from_dict(data["assumption2_detail"]),
        residuals={k: float(v) for k, v in data["residuals"].items()},
    )


def solutions_equal(x: RecurrenceSolution, y: RecurrenceSolution) -> bool:
    """Exact equality of every stored field."""
    arrays = ("a", "r", "c", "xs", "ds")
    return (
        x.pattern == y.pattern
        and x.rho == y.rho
        and all(np.array_equal(getattr(x, k), getattr(y, k)) for k in arrays)
        and x.spectrum.pairing == y.spectrum.pairing
        and x.variance == y.variance
        and x.assumption1 == y.assumption1
        and x.assumption2 == y.assumption2
        and x.residuals == y.residuals
    )


def partial_to_dict(partial: dict[str, Any], status: str) -> dict[str, Any]:
    """Values computed before an assumption failure, JSON-ready."""
    out: dict[str, Any] = {"status": status}
    for key, value in partial.items():
        if isinstance(value, Decision):
            out[key] = value.label
            out[key + "_detail"] = value.to_dict()
        elif isinstance(value, np.ndarray):
            out[key] = complex_to_json(value) if np.iscomplexobj(value) else value.tolist()
        else:
            out[key] = value
    return out


def dumps(obj: Any) -> str:
    return json.dumps(obj, indent=2) + "\n"


def _g(x: float) -> str:
    return f"{x:.6g}"


def _gc(z: complex) -> str:
    z = complex(z)
    if z.imag == 0:
        return _g(z.real)
    sign = "+" if z.imag >= 0 else "-"
    return f"{_g(z.real)}{sign}{_g(abs(z.imag))}i"


def solution_csv(sol: RecurrenceSolution) -> str:
    """Long format: one row per scalar (quantity, index, slot, value); slots are 1-based."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["quantity", "index", "slot", "value"])
    for k, a in enumerate(sol.a, start=1):
        w.writerow(["a", k, "", repr(float(a))])
    for i, r in enumerate(sol.r):
        for j, v in enumerate(r, start=1):
            w.writerow(["r", i, j, repr(float(v))])
    w.writerow(["variance", "", "", repr(sol.variance)])
    return buf.getvalue()


def solution_pretty(sol: RecurrenceSolution) -> str:
    """a coefficients, then the r vectors as columns, 6 significant digits."""
    pat = sol.pattern
    lines = [
        f"pattern {pat.text}  N={pat.N} n={pat.n} h={pat.h} p={sol.p}  rho={_g(sol.rho)}",
        f"ASSUMPTION I:  {sol.assumption1.label.upper()}  ({sol.assumption1.detail})",
        f"ASSUMPTION II: {sol.assumption2.label.upper()}  ({sol.assumption2.detail})",
        "",
        "roots of Q_p and d = d_-(x):",
    ]
    for m, (x, d) in enumerate(zip(sol.xs, sol.ds), start=1):
        lines.append(f"  x_{m} = {_gc(x):<24} d_{m} = {_gc(d)}")
    lines.append("")
    lines.append("recursion coefficients:")
    for k, a in enumerate(sol.a, start=1):
        lines.append(f"  a_{k} = {_g(a)}")
    lines.append("")
    header = ["slot"] + [f"r_{i}" for i in range(sol.p + 1)]
    table = [[str(j + 1)] + [_g(sol.r[i, j]) for i in range(sol.p + 1)] for j in range(pat.N)]
    lines.extend(_table(header, table))
    lines.append("")
    lines.append(f"variance = {_g(sol.variance)}")
    return "\n".join(lines) + "\n"


def _table(header: list[str], rows: list[list[str]]) -> list[str]:
    widths = [max(len(h), *(len(r[k]) for r in rows)) if rows else len(h) for k, h in enumerate(header)]
    fmt = "  ".join(f"{{:>{w}}}" for w in widths)
    return [fmt.format(*header)] + [fmt.format(*r) for r in rows]


def _cell(v, pretty: bool) -> str:
    if isinstance(v, bool):
        return "pass" if v else "fail"
    if isinstance(v, float):
        return _g(v) if pretty else repr(v)
    return "" if v is None else str(v)


def rows_csv(rows: Iterable[dict[str, Any]]) -> str:
    rows = list(rows)
    header = _header(rows)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow([_cell(r.get(k), False) for k in header])
    return buf.getvalue()


def rows_pretty(rows: Iterable[dict[str, Any]]) -> str:
    rows = list(rows)
    header = _header(rows)
    return "\n".join(_table(header, [[_cell(r.get(k), True) for k in header] for r in rows])) + "\n"


def _header(rows: list[dict[str, Any]]) -> list[str]:
    header: list[str] = []
    for r in rows:
        header.extend(k for k in r if k not in header)
    return header
