"""Command-line front end: analyze, verify, simulate, sweep.

Exit codes:
  0  success
  1  usage or input error (bad pattern, rho, grid, or option)
  2  ASSUMPTION I failed (roots not distinct or on [-1, 1])
  3  ASSUMPTION II failed (S rank deficient)
  4  numerical failure (residual exceeded, no convergence, ...)
  5  verification or simulation FAIL
"""

from __future__ import annotations

import argparse
import json
import sys
from concurrent.futures import ThreadPoolExecutor
from typing import Any

import numpy as np

from .checks import run_invariant_suite
from .diagnostics import AssumptionViolation, NumericalError, RotaBlueError
from .oracle import compare_oracle_vs_recursion, default_horizon
from .pattern import ModelParams, parse_pattern, parse_scheme
from .recurrence import RANK_CUTOFF, solve_recurrence
from .report import (
    dumps,
    partial_to_dict,
    rows_csv,
    rows_pretty,
    solution_csv,
    solution_pretty,
    solution_to_dict,
)
from .roots import CRITICAL_TOL
from .simulate import PanelConfig, default_occasions, empirical_variance, thread_cap

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_ASSUMPTION_I = 2
EXIT_ASSUMPTION_II = 3
EXIT_NUMERICAL = 4
EXIT_FAIL = 5

_ASSUMPTION_EXIT = {"AssumptionI": EXIT_ASSUMPTION_I, "AssumptionII": EXIT_ASSUMPTION_II}


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def parse_rho_grid(text: str) -> list[float]:
    """``start:stop:step`` (inclusive of stop) or a comma-separated list."""
    text = text.strip()
    try:
        if ":" in text:
            parts = [float(x) for x in text.split(":")]
            if len(parts) != 3:
                raise ValueError
            start, stop, step = parts
            if step == 0 or (stop - start) * step < 0:
                raise UsageError(f"rho grid {text!r} has a step that never reaches the stop value")
            count = int(np.floor((stop - start) / step + 1e-9)) + 1
            grid = [round(start + k * step, 12) for k in range(count)]
        else:
            grid = [float(x) for x in text.split(",") if x.strip()]
    except ValueError as exc:
        raise UsageError(f"cannot parse rho grid {text!r}; use start:stop:step or a comma list") from exc
    if not grid:
        raise UsageError("rho grid is empty")
    for rho in grid:
        if rho == 0 or not abs(rho) < 1:
            raise UsageError(f"rho grid contains {rho:g}; every value must satisfy 0 < |rho| < 1")
    return grid


def _pattern(args):
    if args.scheme is not None:
        return parse_scheme(args.scheme)
    return parse_pattern(args.pattern)


def _solve(args, rho: float):
    return solve_recurrence(ModelParams(rho, _pattern(args)), tol_root=args.tol_root, tol_rank=args.tol_rank)


def _emit(args, text: str) -> None:
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _emit_record(args, record: dict[str, Any]) -> None:
    if args.format == "json":
        _emit(args, dumps(record))
    elif args.format == "csv":
        _emit(args, rows_csv([_flat(record)]))
    else:
        _emit(args, rows_pretty([_flat(record)]))


def _flat(record: dict[str, Any]) -> dict[str, Any]:
    return {k: v for k, v in record.items() if not isinstance(v, (dict, list))}


def cmd_analyze(args) -> int:
    try:
        sol = _solve(args, args.rho)
    except AssumptionViolation as exc:
        _emit_record(args, partial_to_dict(exc.partial, status=exc.code))
        return _ASSUMPTION_EXIT[exc.decision.name]
    if args.format == "json":
        _emit(args, dumps(solution_to_dict(sol)))
    elif args.format == "csv":
        _emit(args, solution_csv(sol))
    else:
        _emit(args, solution_pretty(sol))
    return EXIT_OK


def cmd_verify(args) -> int:
    try:
        sol = _solve(args, args.rho)
    except AssumptionViolation as exc:
        _emit_record(args, partial_to_dict(exc.partial, status=exc.code))
        return _ASSUMPTION_EXIT[exc.decision.name]
    if args.perturb_a1:
        a = sol.a.copy()
        a[0] += args.perturb_a1
        sol = sol.with_a(a)
    T = args.horizon or default_horizon(sol)
    oracle = compare_oracle_vs_recursion(sol.params, T, sol=sol)
    checks = run_invariant_suite(sol)
    passed = oracle.passed and all(c.passed for c in checks)
    record = {
        "pattern": sol.pattern.text,
        "rho": sol.rho,
        "pass": passed,
        "oracle": oracle.to_dict(),
        "invariants": [c.to_dict() for c in checks],
    }
    if args.format == "json":
        _emit(args, dumps(record))
    else:
        rows = [{"check": "oracle_weights", "value": oracle.max_weight_gap, "tol": 1e-6, "pass": oracle.max_weight_gap <= 1e-6},
                {"check": "oracle_variance", "value": oracle.variance_gap, "tol": 1e-8, "pass": oracle.variance_gap <= 1e-8}]
        rows += [{"check": c.name, "value": float(c.value), "tol": c.tol, "pass": c.passed} for c in checks]
        rows.append({"check": "overall", "value": None, "tol": None, "pass": passed})
        _emit(args, (rows_csv if args.format == "csv" else rows_pretty)(rows))
    return EXIT_OK if passed else EXIT_FAIL


def cmd_simulate(args) -> int:
    try:
        sol = _solve(args, args.rho)
    except AssumptionViolation as exc:
        _emit_record(args, partial_to_dict(exc.partial, status=exc.code))
        return _ASSUMPTION_EXIT[exc.decision.name]
    occasions = args.horizon or default_occasions(sol)
    cfg = PanelConfig(sol.params, occasions=occasions, replications=args.reps, seed=args.seed)
    report = empirical_variance(cfg, sol)
    _emit_record(args, report.to_dict())
    return EXIT_OK if report.passed else EXIT_FAIL


def _sweep_row(args, rho: float) -> dict[str, Any]:
    row: dict[str, Any] = {"rho": rho}
    try:
        sol = _solve(args, rho)
    except AssumptionViolation as exc:
        row.update(assumption1=exc.partial.get("assumption1", exc.decision).label)
        dec2 = exc.partial.get("assumption2")
        row.update(assumption2=dec2.label if dec2 is not None else "n/a", status=exc.code)
        return row
    except NumericalError as exc:
        row.update(assumption1="n/a", assumption2="n/a", status=exc.code)
        return row
    ok = 0 < sol.variance <= 1
    row.update(assumption1=sol.assumption1.label, assumption2=sol.assumption2.label)
    row.update(status="ok" if ok else "VarianceOutOfRange", variance=sol.variance)
    row.update({f"a_{k}": float(a) for k, a in enumerate(sol.a, start=1)})
    return row


def cmd_sweep(args) -> int:
    grid = parse_rho_grid(args.rho_grid)
    pattern = _pattern(args)
    workers = min(thread_cap(), len(grid))
    if workers <= 1:
        rows = [_sweep_row(args, rho) for rho in grid]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(lambda rho: _sweep_row(args, rho), grid))
    if args.format == "json":
        _emit(args, dumps({"pattern": pattern.text, "rows": rows}))
    else:
        _emit(args, (rows_csv if args.format == "csv" else rows_pretty)(rows))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(
        prog="rotablue",
        description="Stationary BLUE recursion for cascade rotation sampling with gaps.",
        epilog=(
            "Exit codes: 0 ok, 1 usage/input error, 2 ASSUMPTION I failed, "
            "3 ASSUMPTION II failed, 4 numerical failure, 5 verify/simulate FAIL. "
            "ROTABLUE_THREADS caps the worker threads used by sweep and simulate."
        ),
    )
    sub = parser.add_subparsers(dest="command", metavar="COMMAND", parser_class=_Parser)
    sub.required = True

    def common(p: argparse.ArgumentParser, rho_required: bool = True) -> None:
        g = p.add_mutually_exclusive_group(required=True)
        g.add_argument("--pattern", help="cascade pattern as a 0/1 string, e.g. 1101101")
        g.add_argument("--scheme", help="run-length alias a-b-c..., e.g. 4-8-4 for 1111000000001111")
        if rho_required:
            p.add_argument("--rho", type=float, required=True, help="serial correlation, 0 < |rho| < 1")
        p.add_argument("--format", choices=("json", "csv", "pretty"), default="json", help="output format (default json)")
        p.add_argument("--out", help="write output to this file instead of stdout")
        p.add_argument("--tol-root", type=float, default=CRITICAL_TOL,
                       help=f"minimum distance of a root from [-1, 1] (default {CRITICAL_TOL:g})")
        p.add_argument("--tol-rank", type=float, default=RANK_CUTOFF,
                       help=f"relative singular-value cutoff for the rank of S (default {RANK_CUTOFF:g})")

    p = sub.add_parser("analyze", help="solve for the recursion coefficients, weight vectors and variance")
    common(p)
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("verify", help="compare with the finite-horizon oracle and run the invariant suite")
    common(p)
    p.add_argument("--horizon", type=int, help="oracle horizon T (default max(50, 4 ceil(1/(1-max|d|))))")
    p.add_argument("--perturb-a1", type=float, default=0.0, help="add this to a_1 before checking (harness self-test)")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("simulate", help="Monte Carlo check of the estimator variance and bias")
    common(p)
    p.add_argument("--horizon", type=int, help="occasions per replication (default burn-in + truncation length)")
    p.add_argument("--reps", type=int, default=10000, help="replications (default 10000, minimum 100)")
    p.add_argument("--seed", type=int, default=0, help="64-bit RNG seed (default 0)")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("sweep", help="assumption checks, a vector and variance over a grid of rho")
    common(p, rho_required=False)
    p.add_argument("--rho-grid", required=True, help="start:stop:step (stop inclusive) or comma list; 0 not allowed")
    p.set_defaults(func=cmd_sweep)
    return parser


def _fail(code: int, payload: dict[str, Any]) -> int:
    sys.stderr.write(json.dumps({"exit": code, **payload}) + "\n")
    return code


def _glue_grid(argv: list[str]) -> list[str]:
    # a grid such as -0.9:-0.1:0.1 would otherwise be taken for an option
    out: list[str] = []
    it = iter(argv)
    for tok in it:
        if tok == "--rho-grid":
            nxt = next(it, None)
            out.append(tok if nxt is None else f"{tok}={nxt}")
        else:
            out.append(tok)
    return out


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    argv = _glue_grid(list(sys.argv[1:] if argv is None else argv))
    try:
        args = parser.parse_args(argv)
        for name in ("horizon", "reps"):
            value = getattr(args, name, None)
            if value is not None and value < 1:
                raise UsageError(f"--{name} must be a positive integer")
        return args.func(args)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        return _fail(EXIT_USAGE, {"code": "Usage", "message": str(exc)})
    except NumericalError as exc:
        return _fail(EXIT_NUMERICAL, exc.to_dict())
    except RotaBlueError as exc:
        return _fail(EXIT_USAGE, exc.to_dict())
    except OSError as exc:
        return _fail(EXIT_USAGE, {"code": "IOError", "message": str(exc)})


if __name__ == "__main__":
    sys.exit(main())
