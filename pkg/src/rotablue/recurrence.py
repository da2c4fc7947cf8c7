"""The stationary order-p recursion for the BLUE of the current mean.

Given the d-parameters of the roots of Q_p, the multipliers ``c`` solve the
block system ``S c = e_1``; the recursion coefficients and the weight
vectors ``r_0..r_p`` follow in closed form:

    mu_hat[t] = sum_k a_k mu_hat[t-k] + sum_k r_k . X[t-k]

Indices of ``c`` are ``c[j, m]`` with ``j = 0`` for the all-ones direction
and ``j = 1..h`` for the gap positions in increasing order.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Any

import numpy as np

from .diagnostics import (
    AssumptionViolation,
    Decision,
    ImaginaryResidue,
    InconsistentSystem,
    NumericalError,
    RankDeficient,
    ZeroD,
)
from .pattern import CascadePattern, ModelParams
from .qpoly import build_qp
from .roots import CRITICAL_TOL, RootSpectrum, root_spectrum, x_of_d

__all__ = [
    "RecurrenceSolution",
    "h_matrix",
    "h_tilde",
    "g_tilde",
    "g_block",
    "g_bar",
    "m_matrix",
    "basis_matrix",
    "build_s",
    "check_assumption_two",
    "solve_c",
    "recurrence_coeffs",
    "v_poly",
    "r_vectors",
    "closed_form_weights",
    "unroll_weights",
    "truncation_length",
    "solve_recurrence",
]

IMAG_TOL = 1e-8
RANK_CUTOFF = 1e-10
SYSTEM_TOL = 1e-8


def _check_d(d: complex) -> complex:
    d = complex(d)
    if d == 0:
        raise ZeroD("d = 0 makes the -rho/d entries of H_m(d) undefined")
    return d


def h_tilde(m: int, rho: float, d: complex) -> np.ndarray:
    """Upper bidiagonal m x m: ones on the diagonal, -d rho above."""
    return np.eye(m, dtype=complex) + np.diag(np.full(m - 1, -d * rho, dtype=complex), 1)


def h_matrix(m: int, rho: float, d: complex) -> np.ndarray:
    """Tridiagonal m x m: 1 + rho^2 diagonal, -d rho above, -rho/d below."""
    d = _check_d(d)
    return (
        np.diag(np.full(m, 1 + rho**2, dtype=complex))
        + np.diag(np.full(m - 1, -d * rho, dtype=complex), 1)
        + np.diag(np.full(m - 1, -rho / d, dtype=complex), -1)
    )


def _block_diag(blocks: list[np.ndarray]) -> np.ndarray:
    size = sum(b.shape[0] for b in blocks)
    out = np.zeros((size, size), dtype=complex)
    k = 0
    for b in blocks:
        m = b.shape[0]
        out[k : k + m, k : k + m] = b
        k += m
    return out


def g_tilde(pattern: CascadePattern, rho: float, d: complex) -> np.ndarray:
    """(h+1) x (h+1) block of the top row of S."""
    h, N = pattern.h, pattern.N
    out = np.zeros((h + 1, h + 1), dtype=complex)
    out[0, 0] = (N - 1) * (1 - d * rho) + 1 - rho**2
    out[0, 1:] = 1 - d * rho
    out[1:, 0] = 1 - d * rho
    if h:
        out[1:, 1:] = _block_diag([h_tilde(m, rho, d) for m in pattern.gaps])
    return out / (1 - rho**2)


def g_block(pattern: CascadePattern, rho: float, d: complex) -> np.ndarray:
    """h x (h+1) diagonal block of S."""
    d = _check_d(d)
    h = pattern.h
    out = np.zeros((h, h + 1), dtype=complex)
    if h:
        out[:, 0] = (1 - d * rho) * (d - rho)
        out[:, 1:] = d * _block_diag([h_matrix(m, rho, d) for m in pattern.gaps])
    return out / (1 - rho**2)


def g_bar(pattern: CascadePattern, rho: float, d: complex) -> np.ndarray:
    """Full (h+1) x (h+1) matrix whose gap rows form ``g_block``; singular at every d_m."""
    d = _check_d(d)
    N, h = pattern.N, pattern.h
    alpha = (1 - rho * d) * (1 - rho / d)
    inner = np.zeros((h + 1, h + 1), dtype=complex)
    inner[0, 0] = (N - 1) * alpha + 1 - rho**2
    inner[0, 1:] = alpha
    inner[1:, 0] = alpha
    if h:
        inner[1:, 1:] = _block_diag([h_matrix(m, rho, d) for m in pattern.gaps])
    return d / (1 - rho**2) * inner


def basis_matrix(pattern: CascadePattern) -> np.ndarray:
    """N x (h+1) matrix with columns e_0 = 1 and e_j for each gap slot j."""
    E = np.zeros((pattern.N, pattern.h + 1))
    E[:, 0] = 1.0
    for k, j in enumerate(pattern.gap_index):
        E[j, k + 1] = 1.0
    return E


def m_matrix(N: int, rho: float, d: complex) -> np.ndarray:
    """M(d) = (I - C C^T)^{-1} (I - d C)."""
    info = np.full(N, 1.0 / (1 - rho**2))
    info[-1] = 1.0
    C = np.diag(np.full(N - 1, rho), 1)
    return info[:, None] * (np.eye(N) - d * C)


def build_s(pattern: CascadePattern, rho: float, ds) -> np.ndarray:
    """The (p h + h + 1) x p (h + 1) block matrix S(d_1, ..., d_p)."""
    ds = [_check_d(d) for d in ds]
    p, h = len(ds), pattern.h
    width = h + 1
    S = np.zeros((p * h + h + 1, p * width), dtype=complex)
    for m, d in enumerate(ds):
        cols = slice(m * width, (m + 1) * width)
        S[:width, cols] = g_tilde(pattern, rho, d)
        if h:
            S[width + m * h : width + (m + 1) * h, cols] = g_block(pattern, rho, d)
    return S


def check_assumption_two(s: np.ndarray, *, cutoff: float = RANK_CUTOFF) -> Decision:
    """Full column rank by singular values above ``cutoff * sigma_max``."""
    sv = np.linalg.svd(s, compute_uv=False)
    smax = sv[0] if sv.size else 0.0
    rank = int(np.sum(sv > cutoff * smax)) if smax > 0 else 0
    ncols = s.shape[1]
    passed = rank == ncols
    cond = float(smax / sv[-1]) if sv.size and sv[-1] > 0 else math.inf
    return Decision(
        name="AssumptionII",
        passed=passed,
        detail=f"rank {rank} of {ncols}" + ("" if passed else f" (deficiency {ncols - rank})"),
        metrics={"rank": rank, "columns": ncols, "condition": cond},
    )


def solve_c(s: np.ndarray, *, cutoff: float = RANK_CUTOFF, tol: float = SYSTEM_TOL) -> np.ndarray:
    """Least-squares solution of S c = e_1, reshaped to ``c[j, m]``.

    The system is overdetermined but consistent; a residual above ``tol``
    means the roots or the assembly are wrong.
    """
    decision = check_assumption_two(s, cutoff=cutoff)
    if not decision.passed:
        raise RankDeficient(f"S is rank deficient: {decision.detail}")
    rhs = np.zeros(s.shape[0], dtype=complex)
    rhs[0] = 1.0
    c, *_ = np.linalg.lstsq(s, rhs, rcond=None)
    resid = float(np.linalg.norm(s @ c - rhs))
    if resid > tol:
        raise InconsistentSystem(f"||S c - e1|| = {resid:.3e} exceeds {tol:g}")
    return c.reshape(_coverage_from_shape(s), -1).T


def _coverage_from_shape(s: np.ndarray) -> int:
    # rows = p h + h + 1 and cols = p (h + 1) give p^2 + (rows - cols) p - cols = 0
    rows, cols = s.shape
    k = rows - cols
    p = round((-k + math.sqrt(k * k + 4 * cols)) / 2)
    if p < 1 or p * (k + p) != cols:
        raise ValueError(f"S has inconsistent shape {s.shape}")
    return p


def _realize(z, what: str, tol: float = IMAG_TOL) -> tuple[np.ndarray, float]:
    z = np.asarray(z)
    residue = float(np.max(np.abs(z.imag))) if z.size else 0.0
    if residue > tol:
        raise ImaginaryResidue(f"{what} has imaginary residue {residue:.3e} > {tol:g}")
    return np.real(z).astype(float), residue


def _coeffs_with_residue(ds) -> tuple[np.ndarray, float]:
    poly = np.array([1.0 + 0j])
    for d in ds:
        poly = np.convolve(poly, [1.0, -complex(d)])
    return _realize(-poly[1:], "recursion coefficients")


def recurrence_coeffs(ds) -> np.ndarray:
    """a_k = (-1)^{k+1} e_k(d_1..d_p), i.e. prod (z - d_m) = z^p - a_1 z^{p-1} - ... - a_p."""
    return _coeffs_with_residue(ds)[0]


def v_poly(i: int, d, a) -> complex:
    """v_i(d) = d^i - sum_{l=1}^{i} a_l d^{i-l}, with v_0 = 1 and v_{-1} = 0."""
    if i < 0:
        return 0.0
    v = 1.0
    for l in range(1, i + 1):
        v = v * d - a[l - 1]
    return v


def _symmetrize_columns(c: np.ndarray, pairing) -> np.ndarray:
    c = c.copy()
    for m, n in enumerate(pairing):
        if n > m:
            avg = 0.5 * (c[:, m] + np.conj(c[:, n]))
            c[:, m], c[:, n] = avg, np.conj(avg)
    return c


def _r_vectors_complex(pattern, rho, ds, c, a) -> np.ndarray:
    N = pattern.N
    C = np.diag(np.full(N - 1, rho), 1)
    E = basis_matrix(pattern)
    p = len(ds)
    out = np.zeros((p + 1, N), dtype=complex)
    for m, d in enumerate(ds):
        base = m_matrix(N, rho, d) @ (E @ c[:, m])
        shifted = C.T @ base
        for i in range(p + 1):
            out[i] += v_poly(i, d, a) * base - v_poly(i - 1, d, a) * shifted
    return out


def r_vectors(pattern: CascadePattern, rho: float, ds, c, a) -> np.ndarray:
    """Weight vectors r_0..r_p as a (p + 1) x N real array with gap slots zeroed."""
    r, _ = _realize(_r_vectors_complex(pattern, rho, ds, c, a), "r vectors")
    r[:, pattern.gap_index] = 0.0
    return r


def closed_form_weights(pattern: CascadePattern, rho: float, ds, c, i: int) -> np.ndarray:
    """Optimal weight w_i directly from the multipliers, bypassing the recursion.

    w_0 = sum_m M(d_m) E c_m and w_i = sum_m d_m^{i-1} (d_m I - C^T) M(d_m) E c_m.
    """
    N = pattern.N
    C = np.diag(np.full(N - 1, rho), 1)
    E = basis_matrix(pattern)
    w = np.zeros(N, dtype=complex)
    for m, d in enumerate(ds):
        base = m_matrix(N, rho, d) @ (E @ c[:, m])
        if i == 0:
            w += base
        else:
            w += d ** (i - 1) * (d * base - C.T @ base)
    out, _ = _realize(w, f"closed-form w_{i}")
    return out


@dataclass(frozen=True, eq=False)
class RecurrenceSolution:
    params: ModelParams
    spectrum: RootSpectrum
    a: np.ndarray
    r: np.ndarray
    c: np.ndarray
    variance: float
    assumption1: Decision
    assumption2: Decision
    residuals: dict[str, float] = field(default_factory=dict)

    @property
    def pattern(self) -> CascadePattern:
        return self.params.pattern

    @property
    def rho(self) -> float:
        return self.params.rho

    @property
    def p(self) -> int:
        return len(self.a)

    @property
    def xs(self) -> np.ndarray:
        return self.spectrum.xs

    @property
    def ds(self) -> np.ndarray:
        return self.spectrum.ds

    def with_a(self, a) -> "RecurrenceSolution":
        """Copy with replaced recursion coefficients (used by harness self-tests)."""
        return replace(self, a=np.asarray(a, dtype=float))


def unroll_weights(sol: RecurrenceSolution, L: int) -> np.ndarray:
    """First L weights of the infinite expansion, w_i = r_i [i <= p] + sum_m a_m w_{i-m}."""
    if L < 1:
        raise ValueError("L must be >= 1")
    p, N = sol.p, sol.pattern.N
    W = np.zeros((L, N))
    for i in range(L):
        w = sol.r[i].copy() if i <= p else np.zeros(N)
        for m in range(1, min(i, p) + 1):
            w += sol.a[m - 1] * W[i - m]
        W[i] = w
    return W


def truncation_length(sol: RecurrenceSolution, eps: float = 1e-12) -> int:
    """Smallest L with max|d_m|^L below ``eps``."""
    q = sol.spectrum.max_modulus
    if q <= 0:
        return 1
    return max(1, math.ceil(math.log(eps) / math.log(q)))


def _partial(params, **kw) -> dict[str, Any]:
    out = {"pattern": params.pattern.text, "rho": params.rho, "p": params.pattern.p}
    out.update(kw)
    return out


def solve_recurrence(
    params: ModelParams,
    *,
    tol_root: float = CRITICAL_TOL,
    tol_rank: float = RANK_CUTOFF,
) -> RecurrenceSolution:
    """Run the whole chain pattern -> Q_p -> roots -> S -> c -> (a, r, variance).

    Raises ``AssumptionViolation`` (with everything computed so far attached)
    when ASSUMPTION I or II fails.
    """
    pattern, rho = params.pattern, params.rho
    q = build_qp(params)
    spectrum, dec1, xs = root_spectrum(q, tol=tol_root)
    if spectrum is None:
        raise AssumptionViolation(dec1, _partial(params, q=q.coeffs.tolist(), roots=xs, assumption1=dec1))
    ds = spectrum.ds
    S = build_s(pattern, rho, ds)
    dec2 = check_assumption_two(S, cutoff=tol_rank)
    if not dec2.passed:
        raise AssumptionViolation(
            dec2,
            _partial(params, q=q.coeffs.tolist(), roots=xs, ds=ds, assumption1=dec1, assumption2=dec2),
        )
    c_raw = solve_c(S, cutoff=tol_rank)
    s_resid = float(np.linalg.norm(S @ c_raw.T.reshape(-1) - np.eye(S.shape[0], 1).ravel()))
    c = _symmetrize_columns(c_raw, spectrum.pairing)
    a, a_imag = _coeffs_with_residue(ds)
    r_complex = _r_vectors_complex(pattern, rho, ds, c, a)
    r, r_imag = _realize(r_complex, "r vectors")
    gap_residue = float(np.max(np.abs(r[:, pattern.gap_index]))) if pattern.h else 0.0
    if gap_residue > IMAG_TOL:
        raise NumericalError(f"r vectors leak {gap_residue:.3e} into gap slots", code="GapLeak")
    r[:, pattern.gap_index] = 0.0
    var_c = complex(np.sum(c[0]))
    if abs(var_c.imag) > IMAG_TOL:
        raise ImaginaryResidue(f"variance has imaginary residue {abs(var_c.imag):.3e}")
    variance = var_c.real
    if not 0 < variance <= 1 + 1e-12:
        raise NumericalError(f"variance {variance:.6g} outside (0, 1]", code="VarianceOutOfRange")
    poly_a = np.concatenate([[1.0], -a])
    residuals = {
        "q_root": float(np.max(np.abs(q(xs))) / q.scale),
        "d_roundtrip": float(np.max(np.abs(x_of_d(ds) - xs))),
        "s_system": s_resid,
        "imag_a": a_imag,
        "imag_r": r_imag,
        "imag_variance": abs(var_c.imag),
        "gap_leak": gap_residue,
        "v_p_at_d": float(np.max(np.abs(np.polyval(poly_a, ds)))),
    }
    return RecurrenceSolution(
        params=params,
        spectrum=spectrum,
        a=a,
        r=r,
        c=c,
        variance=variance,
        assumption1=dec1,
        assumption2=dec2,
        residuals=residuals,
    )
