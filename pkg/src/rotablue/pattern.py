"""Cascade rotation patterns and the one-step covariance matrix.

A pattern is a 0/1 vector ``eps`` of length ``N`` marking which of the ``N``
rotation-group slots are observed on every occasion. Slot positions are
1-based in everything this module exposes.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .diagnostics import PatternError, RhoError

__all__ = [
    "CascadePattern",
    "ModelParams",
    "parse_pattern",
    "parse_scheme",
    "covariance_matrix",
]

_SCHEME_RE = re.compile(r"^\d+(-\d+)*$")


@dataclass(frozen=True)
class CascadePattern:
    eps: tuple[int, ...]

    def __post_init__(self):
        eps = tuple(int(e) for e in self.eps)
        object.__setattr__(self, "eps", eps)
        if len(eps) < 2:
            raise PatternError("pattern must have at least 2 slots", code="EmptyOrShort")
        for i, e in enumerate(eps):
            if e not in (0, 1):
                raise PatternError(f"slot {i + 1} is {e!r}, expected 0 or 1", code="BadChar", index=i + 1)
        if eps[0] != 1:
            raise PatternError("first slot must be in-sample", code="EndpointZero", index=1)
        if eps[-1] != 1:
            raise PatternError("last slot must be in-sample", code="EndpointZero", index=len(eps))

    @property
    def N(self) -> int:
        return len(self.eps)

    @property
    def n(self) -> int:
        return sum(self.eps)

    @property
    def h(self) -> int:
        return self.N - self.n

    @cached_property
    def H(self) -> tuple[int, ...]:
        """Sorted 1-based gap positions."""
        return tuple(j + 1 for j, e in enumerate(self.eps) if e == 0)

    @cached_property
    def gaps(self) -> tuple[int, ...]:
        """Sizes of the maximal zero runs, left to right."""
        return tuple(len(run) for run in self.text.split("1") if run)

    @property
    def s(self) -> int:
        return len(self.gaps)

    @property
    def p(self) -> int:
        return 1 + max(self.gaps, default=0)

    @cached_property
    def observed(self) -> np.ndarray:
        """0-based indices of in-sample slots."""
        return np.flatnonzero(np.asarray(self.eps))

    @cached_property
    def gap_index(self) -> np.ndarray:
        """0-based indices of gap slots."""
        return np.flatnonzero(np.asarray(self.eps) == 0)

    @property
    def text(self) -> str:
        return "".join(str(e) for e in self.eps)

    @classmethod
    def from_gaps(cls, N: int, H) -> "CascadePattern":
        eps = [1] * N
        for j in H:
            eps[j - 1] = 0
        return cls(tuple(eps))

    def __str__(self) -> str:
        return self.text


@dataclass(frozen=True)
class ModelParams:
    rho: float
    pattern: CascadePattern

    def __post_init__(self):
        rho = float(self.rho)
        object.__setattr__(self, "rho", rho)
        if not math.isfinite(rho) or abs(rho) >= 1.0:
            raise RhoError(f"rho={self.rho!r} must satisfy |rho| < 1", code="RhoOutOfRange")
        if rho == 0.0:
            raise RhoError("rho=0 is excluded: past occasions carry no information", code="RhoZero")


def parse_scheme(text: str) -> CascadePattern:
    """Expand an ``a-b-c`` alias into a bit pattern.

    Parts alternate in-sample and out-of-sample run lengths, starting and
    ending in-sample, so ``"2-2-2"`` is ``110011``.
    """
    text = text.strip()
    if not _SCHEME_RE.match(text):
        raise PatternError(f"scheme {text!r} is not of the form a-b-c", code="BadScheme")
    parts = [int(x) for x in text.split("-")]
    if len(parts) % 2 == 0:
        raise PatternError("scheme must have an odd number of runs (start and end in-sample)", code="BadScheme")
    for k, size in enumerate(parts):
        if size < 1:
            raise PatternError(f"run {k + 1} has length 0", code="BadScheme", index=k + 1)
    bits = []
    for k, size in enumerate(parts):
        bits.extend([1 - k % 2] * size)
    return CascadePattern(tuple(bits))


def parse_pattern(text: str) -> CascadePattern:
    """Parse a pattern given either as a bit string (``"110011"``) or a scheme alias (``"2-2-2"``)."""
    text = text.strip()
    if "-" in text:
        return parse_scheme(text)
    if len(text) < 2:
        raise PatternError(f"pattern {text!r} is shorter than 2 slots", code="EmptyOrShort")
    for i, ch in enumerate(text):
        if ch not in "01":
            raise PatternError(f"unexpected character {ch!r} at slot {i + 1}", code="BadChar", index=i + 1)
    return CascadePattern(tuple(int(ch) for ch in text))


def covariance_matrix(params: ModelParams) -> np.ndarray:
    """N x N matrix with rho on the superdiagonal; cov(X_j, X_{j-k}) = C^k."""
    N = params.pattern.N
    return np.diag(np.full(N - 1, params.rho), 1)
