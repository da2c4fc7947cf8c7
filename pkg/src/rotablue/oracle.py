"""Finite-horizon BLUE by direct constrained minimisation.

Independent of the root/recursion machinery: the weights u_0..u_{T-1} minimise

    sum_i u_i'u_i + 2 sum_i sum_{k>=1} u_i' C^k u_{i+k}

subject to 1'u_0 = 1, 1'u_i = 0 (i >= 1) and zero weight on gap slots.
Gap-slot variables are eliminated up front, leaving T n unknowns and T
multipliers.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .diagnostics import SingularKKT
from .pattern import ModelParams, covariance_matrix
from .recurrence import RecurrenceSolution, solve_recurrence, unroll_weights

__all__ = [
    "OracleSolution",
    "OracleReport",
    "variance_form",
    "stacked_covariance",
    "solve_finite_blue",
    "compare_oracle_vs_recursion",
    "default_horizon",
]


@dataclass(frozen=True, eq=False)
class OracleSolution:
    horizon: int
    weights: np.ndarray  # (T, N), zeros at gap slots
    variance: float
    kkt_residual: float
    multipliers: np.ndarray  # (T,), unbiasedness multipliers; multipliers[0] == variance


def variance_form(weights, C: np.ndarray) -> float:
    """Variance of sum_i u_i' X_{t-i} for weights stacked as rows."""
    U = np.asarray(weights, dtype=float)
    total = float(np.sum(U * U))
    N = C.shape[0]
    Ck = np.eye(N)
    for k in range(1, N):
        Ck = Ck @ C
        if k >= len(U):
            break
        total += 2.0 * float(np.sum(U[:-k] * (U[k:] @ Ck.T)))
    return total


def stacked_covariance(params: ModelParams, T: int) -> np.ndarray:
    """Covariance of (X_t, X_{t-1}, ..., X_{t-T+1}) as a T N x T N matrix."""
    C = covariance_matrix(params)
    N = C.shape[0]
    powers = [np.eye(N)]
    for _ in range(1, min(T, N)):
        powers.append(powers[-1] @ C)
    out = np.zeros((T * N, T * N))
    for i in range(T):
        out[i * N : (i + 1) * N, i * N : (i + 1) * N] = powers[0]
        for k in range(1, min(N, T - i)):
            out[i * N : (i + 1) * N, (i + k) * N : (i + k + 1) * N] = powers[k]
            out[(i + k) * N : (i + k + 1) * N, i * N : (i + 1) * N] = powers[k].T
    return out


def solve_finite_blue(params: ModelParams, T: int) -> OracleSolution:
    if T < 1:
        raise ValueError("horizon T must be >= 1")
    pattern = params.pattern
    N, n = pattern.N, pattern.n
    obs = pattern.observed
    idx = (np.arange(T)[:, None] * N + obs[None, :]).ravel()
    Q = stacked_covariance(params, T)[np.ix_(idx, idx)]
    A = np.kron(np.eye(T), np.ones((1, n)))
    b = np.zeros(T)
    b[0] = 1.0
    K = np.block([[Q, A.T], [A, np.zeros((T, T))]])
    rhs = np.concatenate([np.zeros(T * n), b])
    # Q u = A' lam, A u = b
    try:
        sol = scipy.linalg.solve(K, rhs, assume_a="sym")
    except (np.linalg.LinAlgError, scipy.linalg.LinAlgError) as exc:
        raise SingularKKT(f"KKT system singular at T={T}") from exc
    resid = float(np.linalg.norm(K @ sol - rhs) / max(1.0, np.linalg.norm(K, np.inf)))
    u = sol[: T * n]
    lam = -sol[T * n :]
    W = np.zeros((T, N))
    W[:, obs] = u.reshape(T, n)
    return OracleSolution(
        horizon=T,
        weights=W,
        variance=float(u @ Q @ u),
        kkt_residual=resid,
        multipliers=lam,
    )


def default_horizon(sol: RecurrenceSolution) -> int:
    return max(50, 4 * math.ceil(1 / (1 - sol.spectrum.max_modulus)))


@dataclass(frozen=True)
class OracleReport:
    T: int
    variance: float
    theoretical_variance: float
    variance_gap: float
    max_weight_gap: float
    compared_lags: int
    passed: bool

    def to_dict(self) -> dict:
        return {
            "T": self.T,
            "variance": self.variance,
            "theoretical_variance": self.theoretical_variance,
            "variance_gap": self.variance_gap,
            "max_weight_gap": self.max_weight_gap,
            "compared_lags": self.compared_lags,
            "pass": self.passed,
        }


def compare_oracle_vs_recursion(
    params: ModelParams,
    T: int,
    sol: RecurrenceSolution | None = None,
    *,
    weight_tol: float = 1e-6,
    variance_tol: float = 1e-8,
) -> OracleReport:
    """Entrywise weight gap over lags i < T - 2p, and the variance gap."""
    sol = sol or solve_recurrence(params)
    oracle = solve_finite_blue(params, T)
    lags = max(1, T - 2 * sol.p)
    W = unroll_weights(sol, T)
    weight_gap = float(np.max(np.abs(W[:lags] - oracle.weights[:lags])))
    var_gap = abs(oracle.variance - sol.variance)
    return OracleReport(
        T=T,
        variance=oracle.variance,
        theoretical_variance=sol.variance,
        variance_gap=var_gap,
        max_weight_gap=weight_gap,
        compared_lags=lags,
        passed=weight_gap <= weight_tol and var_gap <= variance_tol,
    )
