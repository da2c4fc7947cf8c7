"""Roots of Q_p, their unit-disk parameters d, and the ASSUMPTION I check."""

from __future__ import annotations

import cmath
from dataclasses import dataclass, field

import numpy as np

from .diagnostics import Decision, NoConvergence, OnCriticalInterval
from .qpoly import RealPolynomial

__all__ = [
    "RootSpectrum",
    "find_roots",
    "d_minus",
    "d_plus",
    "x_of_d",
    "interval_distance",
    "check_assumption_one",
    "root_spectrum",
]

RESIDUAL_RTOL = 1e-8
CRITICAL_TOL = 1e-10
MAX_ITER = 500
POLISH_STEPS = 5


def _horner(coeffs_desc: np.ndarray, z: np.ndarray):
    """Value and derivative of a polynomial (descending coefficients) at z."""
    p = np.full_like(z, coeffs_desc[0])
    dp = np.zeros_like(z)
    for c in coeffs_desc[1:]:
        dp = dp * z + p
        p = p * z + c
    return p, dp


def _initial_guesses(desc: np.ndarray) -> np.ndarray:
    n = len(desc) - 1
    monic = desc / desc[0]
    center = -monic[1] / n
    # Fujiwara bound on root moduli, shrunk around the centroid
    bound = 2 * max(abs(monic[k]) ** (1.0 / k) for k in range(1, n + 1))
    radius = max(0.5 * bound, 1e-3)
    angles = 2 * np.pi * np.arange(n) / n + 0.4
    return center + radius * np.exp(1j * angles)


def _conjugate_cleanup(z: np.ndarray, tol: float) -> np.ndarray:
    """Snap near-real roots to the axis and make complex roots exact conjugate pairs.

    Roots of a real polynomial come in conjugate pairs; the iteration only
    reproduces this to rounding, so we restore it explicitly.
    """
    z = z.copy()
    unpaired = list(np.argsort(z.imag))
    while unpaired:
        i = unpaired.pop()
        if abs(z[i].imag) <= tol * (1 + abs(z[i])):
            z[i] = z[i].real
            continue
        if z[i].imag < 0:
            continue  # partner already consumed or genuinely unpaired
        candidates = [j for j in unpaired if z[j].imag < 0]
        if not candidates:
            continue
        j = min(candidates, key=lambda k: abs(z[k] - np.conj(z[i])))
        if abs(z[j] - np.conj(z[i])) > 1e-6 * (1 + abs(z[i])):
            continue
        unpaired.remove(j)
        mid = 0.5 * (z[i] + np.conj(z[j]))
        z[i], z[j] = mid, np.conj(mid)
    return z


def find_roots(q: RealPolynomial, *, max_iter: int = MAX_ITER) -> np.ndarray:
    """All complex roots of ``q`` by Aberth-Ehrlich simultaneous iteration.

    Converged roots are Newton-polished (at most 5 steps each), conjugate
    symmetry is restored, and each root must satisfy
    ``|q(x)| <= 1e-8 * max|coeff|``. Output is sorted by real part, then
    imaginary part.
    """
    if q.degree < 1:
        raise ValueError("cannot find roots of a constant polynomial")
    desc = q.coeffs[::-1].astype(complex)
    n = q.degree
    if n == 1:
        z = np.array([-desc[1] / desc[0]])
    else:
        z = _initial_guesses(desc)
        absdesc = np.abs(desc)
        active = np.ones(n, dtype=bool)
        for _ in range(max_iter):
            p, dp = _horner(desc, z)
            # backward-error test: |q(z)| at the rounding level of its terms
            bound, _ = _horner(absdesc, np.abs(z))
            active &= np.abs(p) > 4 * np.finfo(float).eps * bound.real
            if not active.any():
                break
            with np.errstate(divide="ignore", invalid="ignore"):
                ratio = np.where(dp != 0, p / dp, p)
                diff = z[:, None] - z[None, :]
                np.fill_diagonal(diff, 1.0)
                inv = 1.0 / diff
                np.fill_diagonal(inv, 0.0)
                step = ratio / (1 - ratio * inv.sum(axis=1))
            step = np.where(active, step, 0)
            if not np.all(np.isfinite(step)):
                raise NoConvergence("Aberth iteration produced a non-finite step")
            z = z - step
            if np.max(np.abs(step) / (1 + np.abs(z))) < 1e-15:
                break
        else:
            raise NoConvergence(f"Aberth iteration did not converge in {max_iter} steps")
        for _ in range(POLISH_STEPS):
            p, dp = _horner(desc, z)
            safe = dp != 0
            newton = np.where(safe, p / np.where(safe, dp, 1), 0)
            z = z - newton
            if np.max(np.abs(newton) / (1 + np.abs(z))) < 1e-16:
                break
    z = _conjugate_cleanup(z, 1e-9)
    resid = np.abs(q(z))
    if np.any(resid > RESIDUAL_RTOL * q.scale):
        raise NoConvergence(f"root residual {resid.max():.3e} exceeds bound {RESIDUAL_RTOL * q.scale:.3e}")
    order = np.lexsort((z.imag, z.real))
    return z[order]


def interval_distance(x: complex) -> float:
    """Euclidean distance from x to the real segment [-1, 1]."""
    x = complex(x)
    re = abs(x.real)
    if re <= 1:
        return abs(x.imag)
    return float(np.hypot(re - 1, x.imag))


def d_plus(x: complex, *, tol: float = CRITICAL_TOL) -> complex:
    """Root of d^2 - 2xd + 1 = 0 outside the closed unit disk."""
    x = complex(x)
    if interval_distance(x) <= tol:
        raise OnCriticalInterval(f"x={x} lies on [-1, 1]; d(x) has modulus 1")
    s = cmath.sqrt(x * x - 1)
    a, b = x + s, x - s
    big = a if abs(a) >= abs(b) else b
    if x.imag == 0:
        big = complex(big.real, 0.0)
    return big


def d_minus(x: complex, *, tol: float = CRITICAL_TOL) -> complex:
    """Root of d^2 - 2xd + 1 = 0 strictly inside the unit disk.

    Taken as the reciprocal of the larger root, which avoids cancellation in
    ``x -/+ sqrt(x^2 - 1)``. Real ``x`` with ``|x| > 1`` gives a real result.
    """
    return 1.0 / d_plus(x, tol=tol)


def x_of_d(d) -> complex:
    return 0.5 * (d + 1.0 / d)


def check_assumption_one(xs, *, tol: float = CRITICAL_TOL, sep_rtol: float = 1e-8) -> Decision:
    """Distinct roots, none on [-1, 1]."""
    xs = np.asarray(xs, dtype=complex)
    offenders = []
    reasons = []
    scale = 1 + (np.max(np.abs(xs)) if xs.size else 0.0)
    min_sep = np.inf
    for i in range(len(xs)):
        for j in range(i + 1, len(xs)):
            dist = abs(xs[i] - xs[j])
            min_sep = min(min_sep, dist)
            if dist <= sep_rtol * scale:
                offenders.extend([complex(xs[i]), complex(xs[j])])
                reasons.append(f"roots {xs[i]:.6g} and {xs[j]:.6g} coincide")
    min_dist = np.inf
    for x in xs:
        dist = interval_distance(x)
        min_dist = min(min_dist, dist)
        if dist <= tol:
            offenders.append(complex(x))
            reasons.append(f"root {x:.6g} lies within {tol:g} of [-1, 1]")
    return Decision(
        name="AssumptionI",
        passed=not reasons,
        detail="; ".join(reasons) if reasons else "distinct roots off [-1, 1]",
        offenders=tuple(offenders),
        metrics={"min_separation": float(min_sep), "min_interval_distance": float(min_dist)},
    )


@dataclass(frozen=True, eq=False)
class RootSpectrum:
    """Roots x_m of Q_p with d_m = d_-(x_m).

    ``pairing[m]`` is -1 for a real root, else the index of its conjugate.
    """

    xs: np.ndarray
    ds: np.ndarray
    pairing: tuple[int, ...] = field(default=())

    def __post_init__(self):
        if not self.pairing:
            object.__setattr__(self, "pairing", _pairing(self.xs))

    @property
    def p(self) -> int:
        return len(self.xs)

    @property
    def max_modulus(self) -> float:
        return float(np.max(np.abs(self.ds)))


def _pairing(values: np.ndarray) -> tuple[int, ...]:
    out = [-1] * len(values)
    for i, v in enumerate(values):
        if v.imag == 0 or out[i] != -1:
            continue
        for j in range(len(values)):
            if j != i and out[j] == -1 and values[j] == np.conj(v):
                out[i], out[j] = j, i
                break
    return tuple(out)


def root_spectrum(q: RealPolynomial, *, tol: float = CRITICAL_TOL) -> tuple[RootSpectrum | None, Decision, np.ndarray]:
    """Roots, ASSUMPTION I decision, and (if it passes) the d-parameters."""
    xs = find_roots(q)
    decision = check_assumption_one(xs, tol=tol)
    if not decision.passed:
        return None, decision, xs
    ds = np.array([d_minus(x, tol=tol) for x in xs])
    pairing = _pairing(xs)
    for i, j in enumerate(pairing):
        if j > i:
            ds[j] = np.conj(ds[i])
    return RootSpectrum(xs=xs, ds=ds, pairing=pairing), decision, xs
