"""Monte Carlo rotation panels and empirical checks of the estimator variance.

Each unit follows a stationary unit-variance AR(1) over the N occasions it
spends in the panel. The unit in slot N-1 has just entered; the unit in
slot 0 leaves after the current occasion. Each replication draws from its
own PCG64 stream keyed by ``(seed, replication)``, so results do not depend
on how replications are split across threads.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .diagnostics import ConfigError
from .estimator import estimate_series
from .pattern import ModelParams
from .recurrence import RecurrenceSolution, truncation_length

__all__ = [
    "PanelConfig",
    "SimulationReport",
    "default_mu",
    "burn_in",
    "default_occasions",
    "generate_panel",
    "empirical_variance",
    "thread_cap",
    "final_errors",
]

MIN_REPLICATIONS = 100
CHUNK = 1000


def thread_cap() -> int:
    """Worker limit from ROTABLUE_THREADS (default: CPU count)."""
    raw = os.environ.get("ROTABLUE_THREADS")
    if raw:
        try:
            n = int(raw)
        except ValueError as exc:
            raise ConfigError(f"ROTABLUE_THREADS must be a positive integer, got {raw!r}") from exc
        if n < 1:
            raise ConfigError(f"ROTABLUE_THREADS must be a positive integer, got {raw!r}")
        return n
    return os.cpu_count() or 1


def default_mu(occasions: int) -> np.ndarray:
    return np.sin(np.arange(occasions) / 5.0)


def burn_in(params: ModelParams) -> int:
    return max(params.pattern.N, params.pattern.p, 20)


def default_occasions(sol: RecurrenceSolution) -> int:
    """Burn-in plus enough occasions for start-up effects to decay below 1e-12."""
    return burn_in(sol.params) + truncation_length(sol)


@dataclass(frozen=True, eq=False)
class PanelConfig:
    params: ModelParams
    occasions: int
    replications: int
    seed: int = 0
    mu: np.ndarray | None = None
    innovation_scale: float = 1.0

    def __post_init__(self):
        p = self.params.pattern.p
        if self.occasions < p + 10:
            raise ConfigError(f"occasions must be >= p + 10 = {p + 10}, got {self.occasions}")
        if self.replications < MIN_REPLICATIONS:
            raise ConfigError(f"replications must be >= {MIN_REPLICATIONS}, got {self.replications}")
        if not 0 <= self.seed < 2**64:
            raise ConfigError(f"seed must be a 64-bit unsigned integer, got {self.seed}")
        if self.innovation_scale < 0:
            raise ConfigError("innovation_scale must be non-negative")
        mu = default_mu(self.occasions) if self.mu is None else np.asarray(self.mu, dtype=float)
        if mu.shape != (self.occasions,):
            raise ConfigError(f"mu must have length {self.occasions}, got shape {mu.shape}")
        object.__setattr__(self, "mu", mu)


def _unit_paths(rng: np.random.Generator, units: int, N: int, rho: float, scale: float) -> np.ndarray:
    """(units, N) AR(1) paths; column s is the unit's value s occasions after entry."""
    eps = rng.standard_normal((units, N))
    z = np.empty_like(eps)
    z[:, 0] = eps[:, 0]
    innov = math.sqrt(1 - rho**2)
    for s in range(1, N):
        z[:, s] = rho * z[:, s - 1] + innov * eps[:, s]
    return scale * z


def _replication(cfg: PanelConfig, rep: int) -> np.ndarray:
    N = cfg.params.pattern.N
    O = cfg.occasions
    rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence(cfg.seed, spawn_key=(rep,))))
    Z = _unit_paths(rng, O + N - 1, N, cfg.params.rho, cfg.innovation_scale)
    # occasion t, slot k holds unit t + k (entered in slot N-1), at age N-1-k
    t = np.arange(O)[:, None]
    k = np.arange(N)[None, :]
    return Z[t + k, N - 1 - k]


def generate_panel(cfg: PanelConfig, reps: range | None = None) -> np.ndarray:
    """Maximal samples shaped (replications, occasions, N), gap slots set to NaN."""
    reps = range(cfg.replications) if reps is None else reps
    X = np.stack([_replication(cfg, r) for r in reps]) + cfg.mu[None, :, None]
    X[..., cfg.params.pattern.gap_index] = np.nan
    return X


@dataclass(frozen=True)
class SimulationReport:
    replications: int
    occasions: int
    theoretical_variance: float
    empirical_variance: float
    stderr: float
    bias: float
    bias_stderr: float
    seed: int

    @property
    def variance_pass(self) -> bool:
        return abs(self.empirical_variance - self.theoretical_variance) < 3 * self.stderr

    @property
    def bias_pass(self) -> bool:
        return abs(self.bias) < 3 * self.bias_stderr or (self.bias_stderr == 0 and self.bias == 0)

    @property
    def passed(self) -> bool:
        return self.variance_pass and self.bias_pass

    def to_dict(self) -> dict:
        return {
            "replications": self.replications,
            "occasions": self.occasions,
            "theoretical_variance": self.theoretical_variance,
            "empirical_variance": self.empirical_variance,
            "stderr": self.stderr,
            "bias": self.bias,
            "bias_stderr": self.bias_stderr,
            "pass": self.passed,
            "seed": self.seed,
        }


def final_errors(cfg: PanelConfig, sol: RecurrenceSolution) -> np.ndarray:
    """mu_hat - mu at the last occasion, one entry per replication."""
    if cfg.occasions <= burn_in(cfg.params):
        raise ConfigError(f"occasions must exceed the burn-in of {burn_in(cfg.params)}")

    def chunk(start: int) -> np.ndarray:
        reps = range(start, min(start + CHUNK, cfg.replications))
        est = estimate_series(sol, generate_panel(cfg, reps))
        return est[:, -1] - cfg.mu[-1]

    starts = range(0, cfg.replications, CHUNK)
    workers = min(thread_cap(), len(starts))
    if workers <= 1:
        parts = [chunk(s) for s in starts]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(chunk, starts))
    return np.concatenate(parts)


def empirical_variance(cfg: PanelConfig, sol: RecurrenceSolution) -> SimulationReport:
    """Sample variance of the final-occasion error against sum_m c_{0,m}.

    The variance standard error is sqrt(var((e - e_bar)^2) / R), which makes
    no normality assumption.
    """
    e = final_errors(cfg, sol)
    R = len(e)
    centred = e - e.mean()
    var = float(np.var(e, ddof=1))
    se = float(np.sqrt(np.var(centred**2, ddof=1) / R))
    return SimulationReport(
        replications=R,
        occasions=cfg.occasions,
        theoretical_variance=sol.variance,
        empirical_variance=var,
        stderr=se,
        bias=float(e.mean()),
        bias_stderr=float(np.sqrt(var / R)),
        seed=cfg.seed,
    )
