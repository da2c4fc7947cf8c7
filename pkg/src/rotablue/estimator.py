"""Running the recursion over a stream of occasions."""

from __future__ import annotations

from collections import deque

import numpy as np

from .diagnostics import InsufficientHistory
from .pattern import CascadePattern
from .recurrence import RecurrenceSolution, truncation_length, unroll_weights

__all__ = ["RecursiveEstimator", "estimate_series", "direct_estimates", "as_maximal"]


def as_maximal(pattern: CascadePattern, x) -> np.ndarray:
    """Lift observations to full N-slot vectors with zeros at gap slots.

    Accepts either maximal vectors (last axis N; gap entries are ignored and
    may be NaN) or effective samples (last axis n).
    """
    x = np.asarray(x, dtype=float)
    if x.shape[-1] == pattern.N:
        out = x.copy()
        out[..., pattern.gap_index] = 0.0
        return out
    if x.shape[-1] == pattern.n:
        out = np.zeros(x.shape[:-1] + (pattern.N,))
        out[..., pattern.observed] = x
        return out
    raise ValueError(f"last axis has length {x.shape[-1]}, expected N={pattern.N} or n={pattern.n}")


class RecursiveEstimator:
    """Stateful BLUE over successive occasions.

    The first ``p`` estimates are bootstrapped by direct weighting with the
    unrolled weights (truncated at ``truncation`` lags); from then on each
    estimate comes from the order-p recursion. Inputs may carry leading batch
    axes, e.g. one row per Monte Carlo replication.
    """

    def __init__(self, sol: RecurrenceSolution, truncation: int | None = None):
        self.sol = sol
        self.bootstrap = sol.p
        self.truncation = truncation or truncation_length(sol)
        self._w = unroll_weights(sol, max(1, min(self.truncation, self.bootstrap)))
        self._obs: deque = deque(maxlen=sol.p + 1)
        self._est: deque = deque(maxlen=sol.p)
        self.t = 0

    def update(self, x):
        x = as_maximal(self.sol.pattern, x)
        self._obs.appendleft(x)
        if self.t < self.bootstrap:
            lags = min(self.t + 1, len(self._w))
            est = sum(self._obs[i] @ self._w[i] for i in range(lags))
        else:
            est = sum(self.sol.a[k - 1] * self._est[k - 1] for k in range(1, self.sol.p + 1))
            est = est + sum(self._obs[k] @ self.sol.r[k] for k in range(self.sol.p + 1))
        self._est.appendleft(est)
        self.t += 1
        return est


def estimate_series(sol: RecurrenceSolution, data, *, truncation: int | None = None) -> np.ndarray:
    """Estimates for every occasion of ``data`` shaped ``(..., T, N)`` or ``(..., T, n)``."""
    data = np.asarray(data, dtype=float)
    T = data.shape[-2]
    if T < sol.p:
        raise InsufficientHistory(f"need at least {sol.p} occasions to bootstrap, got {T}")
    est = RecursiveEstimator(sol, truncation)
    out = np.empty(data.shape[:-1])
    for t in range(T):
        out[..., t] = est.update(data[..., t, :])
    return out


def direct_estimates(sol: RecurrenceSolution, data, L: int) -> np.ndarray:
    """Estimates by explicit weighting with the first L unrolled weights (no recursion)."""
    data = as_maximal(sol.pattern, data)
    T = data.shape[-2]
    W = unroll_weights(sol, L)
    out = np.zeros(data.shape[:-1])
    for i in range(min(L, T)):
        out[..., i:] += data[..., : T - i, :] @ W[i]
    return out
