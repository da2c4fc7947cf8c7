"""Stationary BLUE recursion for cascade rotation sampling with gaps."""

from .diagnostics import (
    AssumptionViolation,
    ConfigError,
    Decision,
    NumericalError,
    PatternError,
    RhoError,
    RotaBlueError,
)
from .estimator import RecursiveEstimator, estimate_series
from .oracle import compare_oracle_vs_recursion, solve_finite_blue
from .pattern import CascadePattern, ModelParams, parse_pattern, parse_scheme
from .qpoly import RealPolynomial, build_qp
from .recurrence import RecurrenceSolution, solve_recurrence, unroll_weights
from .roots import find_roots
from .simulate import PanelConfig, empirical_variance, generate_panel

__version__ = "0.1.0"

__all__ = [
    "AssumptionViolation",
    "CascadePattern",
    "ConfigError",
    "Decision",
    "ModelParams",
    "NumericalError",
    "PanelConfig",
    "PatternError",
    "RealPolynomial",
    "RecurrenceSolution",
    "RecursiveEstimator",
    "RhoError",
    "RotaBlueError",
    "build_qp",
    "compare_oracle_vs_recursion",
    "empirical_variance",
    "estimate_series",
    "find_roots",
    "generate_panel",
    "parse_pattern",
    "parse_scheme",
    "solve_finite_blue",
    "solve_recurrence",
    "unroll_weights",
]
