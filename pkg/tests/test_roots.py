import cmath

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from rotablue.diagnostics import NoConvergence, OnCriticalInterval
from rotablue.pattern import ModelParams, parse_pattern
from rotablue.qpoly import RealPolynomial, build_qp
from rotablue.roots import (
    check_assumption_one,
    d_minus,
    d_plus,
    find_roots,
    interval_distance,
    root_spectrum,
    x_of_d,
)

from .strategies import patterns, rhos


def _companion_roots(q: RealPolynomial) -> np.ndarray:
    r = np.roots(q.coeffs[::-1])
    return r[np.lexsort((r.imag, r.real))]


def test_quadratic_example():
    xs = find_roots(RealPolynomial([5.75, -2.0, -1.6]))
    np.testing.assert_allclose(xs.real, [-2.6211, 1.3711], atol=1e-4)
    assert np.all(xs.imag == 0)
    ds = [d_minus(x) for x in xs]
    np.testing.assert_allclose(np.real(ds), [-0.1983, 0.4331], atol=1e-4)


@pytest.mark.parametrize("N, rho", [(6, 0.9), (8, 0.5), (6, -0.4)])
def test_linear_case_closed_forms(N, rho):
    q = build_qp(ModelParams(rho, parse_pattern("1" * N)))
    (x1,) = find_roots(q)
    assert x1 == pytest.approx((1 + rho**2) / (2 * rho) + (1 - rho**2) / (2 * (N - 1) * rho), abs=1e-12)
    A = N + (N - 2) * rho**2
    d1 = (A - np.sqrt(A**2 - 4 * (N - 1) ** 2 * rho**2)) / (2 * (N - 1) * rho)
    assert d_minus(x1) == pytest.approx(d1, abs=1e-10)


def test_patterson_root_value():
    (x1,) = find_roots(build_qp(ModelParams(0.9, parse_pattern("111111"))))
    assert x1.real == pytest.approx(1.0267, abs=1e-4)
    assert d_minus(x1).real == pytest.approx(0.7942, abs=1e-4)


def test_d_minus_examples():
    assert d_minus(1.25) == pytest.approx(0.5, abs=1e-15)
    assert d_minus(-1.25) == pytest.approx(-0.5, abs=1e-15)
    d = d_minus(-0.5668 - 1.4069j)
    assert abs(d - (-0.0968 + 0.2899j)) < 1e-4
    assert isinstance(d_minus(3.0), complex) and d_minus(3.0).imag == 0


@pytest.mark.parametrize("x", [0.5, 1.0, -1.0, 0.0, 0.3 + 1e-12j])
def test_d_minus_rejects_critical_interval(x):
    with pytest.raises(OnCriticalInterval):
        d_minus(x)


def test_interval_distance():
    assert interval_distance(0.3) == 0
    assert interval_distance(0.3 + 2j) == 2
    assert interval_distance(-3) == 2
    assert interval_distance(4 + 4j) == pytest.approx(5)


def test_assumption_one_decisions():
    assert not check_assumption_one([0.5, 2.0]).passed
    assert check_assumption_one([0.5, 2.0]).offenders == (0.5 + 0j,)
    assert not check_assumption_one([2.0, 2.0]).passed
    assert not check_assumption_one([1.5 + 1e-13j, 1.5 - 1e-13j]).passed
    assert check_assumption_one([-2.6211, 1.3711]).passed


def test_no_convergence_is_reported():
    q = RealPolynomial([1, -3, 0.5, 2, -1, 1])
    with pytest.raises(NoConvergence):
        find_roots(q, max_iter=1)


def test_cps_root_structure(solve):
    sol = solve("1111000000001111", 0.9)
    xs = sol.xs
    assert len(xs) == 9
    assert np.sum(xs.imag == 0) == 1
    assert sol.assumption1.passed


@given(st.lists(st.floats(-3, 3), min_size=2, max_size=10), st.floats(0.5, 3))
def test_find_roots_against_companion(coeffs, lead):
    q = RealPolynomial(coeffs + [lead])
    ours = find_roots(q)
    ref = _companion_roots(q)
    assert len(ours) == q.degree
    # every reference root is matched by one of ours up to conditioning
    for r in ref:
        assert np.min(np.abs(ours - r)) <= 1e-5 * (1 + abs(r))
    assert np.max(np.abs(q(ours))) <= 1e-8 * q.scale


@given(patterns(max_n=16), rhos)
def test_spectrum_properties(text, rho):
    q = build_qp(ModelParams(rho, parse_pattern(text)))
    spectrum, decision, xs = root_spectrum(q)
    ref = _companion_roots(q)
    for r in ref:
        assert np.min(np.abs(xs - r)) <= 1e-6 * (1 + abs(r))
    assert np.max(np.abs(q(xs))) <= 1e-8 * q.scale
    if spectrum is None:
        assert not decision.passed
        return
    ds = spectrum.ds
    assert np.all(np.abs(ds) < 1)
    np.testing.assert_allclose(x_of_d(ds), xs, atol=1e-9 * (1 + np.abs(xs).max()))
    for x, d in zip(xs, ds):
        assert abs(abs(d * d_plus(x)) - 1) < 1e-9
    conj = np.sort_complex(np.conj(ds))
    np.testing.assert_allclose(conj, np.sort_complex(ds), atol=1e-12)
    for m, n in enumerate(spectrum.pairing):
        if n >= 0:
            assert ds[n] == np.conj(ds[m])


@given(st.integers(3, 14), st.integers(1, 4), rhos)
def test_two_coverage_roots_real(N, gaps, rho):
    # patterns with only single-slot gaps have p = 2
    slots = list(range(2, N))
    eps = ["1"] * N
    for j in slots[::2][:gaps]:
        eps[j - 1] = "0"
    pat = parse_pattern("".join(eps))
    if pat.p != 2:
        return
    xs = find_roots(build_qp(ModelParams(rho, pat)))
    assert np.all(xs.imag == 0)
    assert np.all(np.abs(xs.real) > 1)


def test_d_minus_conjugate_symmetry():
    for x in (-0.5 + 0.5j, 2 - 1j, 0.1 + 0.01j):
        assert cmath.isclose(d_minus(np.conj(x)), np.conj(d_minus(x)), abs_tol=1e-15)
