"""Chebyshev building blocks and the characteristic polynomial Q_p.

All polynomials are held in the monomial basis with ascending coefficients,
matching ``numpy.polynomial.polynomial``.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from numpy.polynomial import polynomial as npoly
from scipy.linalg import LinAlgError, solve_banded

from .diagnostics import SingularR
from .pattern import ModelParams

__all__ = [
    "RealPolynomial",
    "chebyshev_T",
    "r_matrix",
    "r_inverse",
    "trace_polynomial",
    "build_qp",
]

TRIM_RTOL = 1e-12


@dataclass(frozen=True, eq=False)
class RealPolynomial:
    coeffs: np.ndarray

    def __post_init__(self):
        c = np.atleast_1d(np.asarray(self.coeffs, dtype=float))
        scale = np.max(np.abs(c)) if c.size else 0.0
        if scale > 0:
            nz = np.flatnonzero(np.abs(c) > TRIM_RTOL * scale)
            c = c[: nz[-1] + 1]
        else:
            c = np.zeros(1)
        c.setflags(write=False)
        object.__setattr__(self, "coeffs", c)

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    @property
    def scale(self) -> float:
        return float(np.max(np.abs(self.coeffs)))

    def __call__(self, x):
        return npoly.polyval(x, self.coeffs)

    def __eq__(self, other):
        if not isinstance(other, RealPolynomial):
            return NotImplemented
        return np.array_equal(self.coeffs, other.coeffs)

    def __repr__(self):
        return f"RealPolynomial({self.coeffs.tolist()})"


@lru_cache(maxsize=None)
def _chebyshev_coeffs(k: int) -> tuple[float, ...]:
    prev, cur = np.array([1.0]), np.array([0.0, 1.0])
    if k == 0:
        return tuple(prev)
    for _ in range(k - 1):
        prev, cur = cur, npoly.polysub(2 * npoly.polymulx(cur), prev)
    return tuple(cur)


def chebyshev_T(k: int) -> RealPolynomial:
    """T_k in monomial coefficients, from T_{k+1} = 2x T_k - T_{k-1}."""
    if k < 0:
        raise ValueError(f"Chebyshev index must be non-negative, got {k}")
    return RealPolynomial(np.array(_chebyshev_coeffs(k)))


def r_matrix(m: int, rho: float) -> np.ndarray:
    """Symmetric tridiagonal R_m: 1 + rho^2 on the diagonal, -rho beside it."""
    return (
        np.diag(np.full(m, 1 + rho**2))
        + np.diag(np.full(m - 1, -rho), 1)
        + np.diag(np.full(m - 1, -rho), -1)
    )


def r_inverse(m: int, rho: float) -> np.ndarray:
    # one banded solve per unit vector
    ab = np.zeros((3, m))
    ab[0, 1:] = -rho
    ab[1, :] = 1 + rho**2
    ab[2, :-1] = -rho
    try:
        inv = solve_banded((1, 1), ab, np.eye(m))
    except (LinAlgError, ValueError) as exc:
        raise SingularR(f"R_{m} is singular for rho={rho}") from exc
    if not np.all(np.isfinite(inv)):
        raise SingularR(f"R_{m} is singular for rho={rho}")
    return inv


def trace_polynomial(m: int, rho: float) -> RealPolynomial:
    """x -> tr(T_m(x) R_m^{-1}), a polynomial of degree m - 1.

    T_m(x) is the symmetric Toeplitz matrix with entries T_{|i-j|}(x), so the
    trace collapses to sum_k w_k T_k(x) where w_k adds up the k-th
    off-diagonals of R_m^{-1}.
    """
    if m < 1:
        raise ValueError(f"gap size must be >= 1, got {m}")
    inv = r_inverse(m, rho)
    weights = [np.trace(inv)] + [2.0 * np.trace(inv, offset=k) for k in range(1, m)]
    out = np.zeros(m)
    for k, w in enumerate(weights):
        c = chebyshev_T(k).coeffs
        out[: len(c)] += w * c
    return RealPolynomial(out)


def build_qp(params: ModelParams) -> RealPolynomial:
    """Q_p(x) = (N-1)(1+rho^2-2 rho x) + 1 - rho^2 - (1+rho^2-2 rho x)^2 sum_j tr(T_{m_j}(x) R_{m_j}^{-1})."""
    rho = params.rho
    pat = params.pattern
    lin = np.array([1 + rho**2, -2 * rho])
    q = npoly.polyadd((pat.N - 1) * lin, [1 - rho**2])
    if pat.gaps:
        traces = np.zeros(1)
        for m in pat.gaps:
            traces = npoly.polyadd(traces, trace_polynomial(m, rho).coeffs)
        q = npoly.polysub(q, npoly.polymul(npoly.polymul(lin, lin), traces))
    return RealPolynomial(q)
