"""Numerical certificates for a computed recursion.

Each check returns a :class:`CheckResult` carrying the measured quantity and
the tolerance it was held to, so reports show how close a pass was.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .oracle import variance_form
from .pattern import covariance_matrix
from .qpoly import build_qp, r_matrix, trace_polynomial
from .recurrence import (
    RecurrenceSolution,
    basis_matrix,
    closed_form_weights,
    g_bar,
    h_matrix,
    truncation_length,
    unroll_weights,
)
from .roots import x_of_d

__all__ = ["CheckResult", "run_invariant_suite"]


@dataclass(frozen=True)
class CheckResult:
    name: str
    value: float
    tol: float

    @property
    def passed(self) -> bool:
        return bool(np.isfinite(self.value) and self.value <= self.tol)

    def to_dict(self) -> dict:
        return {"name": self.name, "value": self.value, "tol": self.tol, "pass": self.passed}


def _unbiasedness(sol, W):
    sums = W.sum(axis=1)
    return max(abs(sums[0] - 1.0), float(np.max(np.abs(sums[1:]))) if len(sums) > 1 else 0.0)


def _gap_weights(sol, n_lags=40):
    H = sol.pattern.gap_index
    if not len(H):
        return 0.0
    worst = 0.0
    for i in range(n_lags + 1):
        w = closed_form_weights(sol.pattern, sol.rho, sol.ds, sol.c, i)
        worst = max(worst, float(np.max(np.abs(w[H]))))
    return worst


def _closed_form_vs_unrolled(sol, W, n_lags=40):
    worst = 0.0
    for i in range(min(n_lags + 1, len(W))):
        w = closed_form_weights(sol.pattern, sol.rho, sol.ds, sol.c, i)
        worst = max(worst, float(np.max(np.abs(w - W[i]))))
    return worst


def _trace_identity(sol):
    worst = 0.0
    for m in sorted(set(sol.pattern.gaps)):
        tp = trace_polynomial(m, sol.rho)
        for d in sol.ds:
            direct = np.ones(m) @ np.linalg.solve(h_matrix(m, sol.rho, d), np.ones(m))
            worst = max(worst, abs(tp(x_of_d(d)) - direct) / max(1.0, abs(direct)))
    return worst


def _h_decomposition(sol):
    worst = 0.0
    for m in sorted(set(sol.pattern.gaps)):
        R = r_matrix(m, sol.rho)
        for d in sol.ds:
            D = np.diag(d ** np.arange(m))
            rebuilt = np.linalg.solve(D, R @ D)
            worst = max(worst, float(np.max(np.abs(rebuilt - h_matrix(m, sol.rho, d)))))
    return worst


def _q_at_roots(sol):
    q = build_qp(sol.params)
    return float(np.max(np.abs(q(x_of_d(sol.ds)))) / q.scale)


def _gbar_determinant(sol):
    """|det G_bar(d_m)| relative to a Hadamard bound free of cancellation.

    The top-left entry is a sum of terms that cancel at a root, so its
    magnitude in the bound is the sum of the terms' magnitudes.
    """
    N, rho = sol.pattern.N, sol.rho
    worst = 0.0
    for d in sol.ds:
        G = g_bar(sol.pattern, rho, d)
        bound = np.abs(G)
        alpha = abs((1 - rho * d) * (1 - rho / d))
        bound[0, 0] = abs(d) / (1 - rho**2) * ((N - 1) * alpha + 1 - rho**2)
        hadamard = float(np.prod(np.linalg.norm(bound, axis=1)))
        worst = max(worst, abs(np.linalg.det(G)) / max(hadamard, 1e-300))
    return worst


def _lagrange_support(sol, W, n_lags=30):
    """max over i of || cov(mu_hat, X_{t-i}) - sum_j lambda_{j,i} e_j ||_inf.

    The left side is w_i + sum_k C^k w_{i+k} + sum_k (C^T)^k w_{i-k}; the
    right side uses lambda_{j,i} = sum_m c_{j,m} d_m^i.
    """
    C = covariance_matrix(sol.params)
    N = C.shape[0]
    E = basis_matrix(sol.pattern)
    powers = [np.eye(N)]
    for _ in range(1, N):
        powers.append(powers[-1] @ C)
    worst = 0.0
    for i in range(n_lags + 1):
        lhs = W[i].copy()
        for k in range(1, N):
            lhs += powers[k] @ W[i + k]
            if k <= i:
                lhs += powers[k].T @ W[i - k]
        lam = (sol.c * sol.ds[None, :] ** i).sum(axis=1)
        rhs = E @ lam
        worst = max(worst, float(np.max(np.abs(lhs - rhs))))
    return worst


def _variance_consistency(sol):
    L = truncation_length(sol, 1e-12) + sol.pattern.N
    W = unroll_weights(sol, L)
    return abs(variance_form(W, covariance_matrix(sol.params)) - sol.variance)


def run_invariant_suite(sol: RecurrenceSolution) -> list[CheckResult]:
    """All structural invariants of the recursion at their pinned tolerances."""
    L = max(41, 31 + sol.pattern.N)
    W = unroll_weights(sol, L)
    res = sol.residuals
    return [
        CheckResult("unbiasedness", _unbiasedness(sol, W), 1e-9),
        CheckResult("gap_constraints", _gap_weights(sol), 1e-8),
        CheckResult("closed_form_vs_unrolled", _closed_form_vs_unrolled(sol, W), 1e-9),
        CheckResult("chebyshev_trace_identity", _trace_identity(sol), 1e-9),
        CheckResult("h_decomposition", _h_decomposition(sol), 1e-10),
        CheckResult("q_at_roots", _q_at_roots(sol), 1e-8),
        CheckResult("gbar_determinant", _gbar_determinant(sol), 1e-8),
        CheckResult("lagrange_support", _lagrange_support(sol, W), 1e-8),
        CheckResult("variance_consistency", _variance_consistency(sol), 1e-8),
        CheckResult("s_system_residual", res.get("s_system", np.nan), 1e-8),
        CheckResult("imaginary_residue", max(res.get("imag_a", 0), res.get("imag_r", 0), res.get("imag_variance", 0)), 1e-8),
    ]
