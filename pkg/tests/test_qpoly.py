import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from rotablue.pattern import ModelParams, parse_pattern
from rotablue.qpoly import RealPolynomial, build_qp, chebyshev_T, r_inverse, r_matrix, trace_polynomial
from rotablue.recurrence import h_matrix

from .strategies import patterns


def _cheb_value(k, x):
    """Independent evaluation of T_k through its trigonometric/hyperbolic form."""
    if abs(x) <= 1:
        return math.cos(k * math.acos(x))
    sign = 1 if x > 0 or k % 2 == 0 else -1
    return sign * math.cosh(k * math.acosh(abs(x)))


def _toeplitz_cheb(m, x):
    return np.array([[_cheb_value(abs(i - j), x) for j in range(m)] for i in range(m)])


def test_chebyshev_examples():
    np.testing.assert_array_equal(chebyshev_T(0).coeffs, [1])
    np.testing.assert_array_equal(chebyshev_T(1).coeffs, [0, 1])
    np.testing.assert_array_equal(chebyshev_T(3).coeffs, [0, -3, 0, 4])
    with pytest.raises(ValueError):
        chebyshev_T(-1)


@pytest.mark.parametrize("k", range(13))
@pytest.mark.parametrize("x", [-2, -1, 0, 0.3, 1, 2])
def test_chebyshev_closed_form(k, x):
    val = chebyshev_T(k)(x)
    ref = _cheb_value(k, x)
    assert abs(val - ref) <= 1e-10 * max(1.0, abs(ref))


def test_real_polynomial_trim():
    p = RealPolynomial([1.0, 2.0, 1e-14])
    assert p.degree == 1
    assert RealPolynomial([0.0, 0.0]).degree == 0
    assert RealPolynomial([1.0, 2.0]) == RealPolynomial([1.0, 2.0, 0.0])


def test_r_matrix_examples():
    np.testing.assert_array_equal(r_matrix(1, 0.5), [[1.25]])
    np.testing.assert_array_equal(r_matrix(2, 0.5), [[1.25, -0.5], [-0.5, 1.25]])
    for rho in (0.3, 0.7, -0.9):
        R = r_matrix(3, rho)
        det = (1 + rho**2 + rho**4) * (1 + rho**2) - rho**2 * (1 + rho**2)
        assert np.linalg.det(R) == pytest.approx(det, rel=1e-12)
        assert np.linalg.det(R) == pytest.approx(sum(rho ** (2 * k) for k in range(4)), rel=1e-12)


@pytest.mark.parametrize("m", [1, 2, 5, 8])
@pytest.mark.parametrize("rho", [0.3, -0.5, 0.9])
def test_r_inverse_matches_dense(m, rho):
    np.testing.assert_allclose(r_inverse(m, rho), np.linalg.inv(r_matrix(m, rho)), atol=1e-12)


@pytest.mark.parametrize("rho", [0.3, 0.5, 0.7, -0.9])
def test_trace_polynomial_small_gaps(rho):
    np.testing.assert_allclose(trace_polynomial(1, rho).coeffs, [1 / (1 + rho**2)], rtol=1e-14)
    den = 1 + rho**2 + rho**4
    np.testing.assert_allclose(trace_polynomial(2, rho).coeffs, [2 * (1 + rho**2) / den, 2 * rho / den], rtol=1e-13)


def test_trace_polynomial_against_matrix_trace():
    rho = 0.9
    tp = trace_polynomial(8, rho)
    assert tp.degree == 7
    Rinv = np.linalg.inv(r_matrix(8, rho))
    for x in np.linspace(-2, 2, 9):
        assert tp(x) == pytest.approx(np.trace(_toeplitz_cheb(8, x) @ Rinv), rel=1e-10, abs=1e-10)


@pytest.mark.parametrize("m", range(1, 9))
@pytest.mark.parametrize("rho", [0.3, 0.5, 0.9, -0.3, -0.5, -0.9])
@pytest.mark.parametrize("d", [0.2, -0.4, 0.1 + 0.3j])
def test_trace_identity_via_h(m, rho, d):
    x = (d + 1 / d) / 2
    direct = np.ones(m) @ np.linalg.solve(h_matrix(m, rho, d), np.ones(m))
    assert abs(trace_polynomial(m, rho)(x) - direct) <= 1e-9 * max(1, abs(direct))


def test_qp_examples():
    for N, rho in [(6, 0.9), (8, 0.5), (6, -0.4)]:
        q = build_qp(ModelParams(rho, parse_pattern("1" * N)))
        expected = [(N - 1) * (1 + rho**2) + 1 - rho**2, -2 * rho * (N - 1)]
        np.testing.assert_allclose(q.coeffs, expected, rtol=1e-14)
    q = build_qp(ModelParams(0.5, parse_pattern("1101101")))
    np.testing.assert_allclose(q.coeffs, [5.75, -2.0, -1.6], rtol=0, atol=1e-12)


def _q3_formula(N, h1, h2, rho):
    """Displayed form of Q for patterns whose gaps all have size 1 or 2."""
    lin = np.array([1 + rho**2, -2 * rho])
    bracket = np.array([h1 / (1 + rho**2) + h2 * 2 * (1 + rho**2) / (1 + rho**2 + rho**4),
                        h2 * 2 * rho / (1 + rho**2 + rho**4)])
    base = np.polynomial.polynomial.polyadd((N - 1) * lin, [1 - rho**2])
    sq = np.polynomial.polynomial.polymul(lin, lin)
    return np.polynomial.polynomial.polysub(base, np.polynomial.polynomial.polymul(sq, bracket))


@pytest.mark.parametrize("text", ["110011", "1101101", "1100110101", "10101", "1001001011"])
@pytest.mark.parametrize("rho", [0.7, -0.3, 0.95])
def test_qp_matches_small_gap_formula(text, rho):
    pat = parse_pattern(text)
    h1, h2 = pat.gaps.count(1), pat.gaps.count(2)
    q = build_qp(ModelParams(rho, pat))
    ref = _q3_formula(pat.N, h1, h2, rho)
    ref = ref[: q.degree + 1]
    np.testing.assert_allclose(q.coeffs, ref, rtol=0, atol=1e-12 * max(1, np.abs(ref).max()))


@given(patterns(max_n=14), st.sampled_from([0.3, 0.5, 0.9, -0.3, -0.5, -0.9, 0.1]))
def test_qp_degree_is_coverage(text, rho):
    params = ModelParams(rho, parse_pattern(text))
    assert build_qp(params).degree == params.pattern.p
