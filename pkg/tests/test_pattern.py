import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from rotablue.diagnostics import PatternError, RhoError
from rotablue.pattern import CascadePattern, ModelParams, covariance_matrix, parse_pattern, parse_scheme

from .strategies import patterns


@pytest.mark.parametrize(
    "text, N, H, gaps, p",
    [
        ("111111", 6, (), (), 1),
        ("1101101", 7, (3, 6), (1, 1), 2),
        ("110011", 6, (3, 4), (2,), 3),
        ("1111000000001111", 16, tuple(range(5, 13)), (8,), 9),
    ],
)
def test_worked_patterns(text, N, H, gaps, p):
    pat = parse_pattern(text)
    assert (pat.N, pat.H, pat.gaps, pat.p) == (N, H, gaps, p)
    assert pat.h == len(H) == sum(gaps)
    assert pat.s == len(gaps)


@pytest.mark.parametrize(
    "text, code, index",
    [
        ("011", "EndpointZero", 1),
        ("110", "EndpointZero", 3),
        ("1", "EmptyOrShort", None),
        ("", "EmptyOrShort", None),
        ("1021", "BadChar", 3),
        ("11a", "BadChar", 3),
    ],
)
def test_parse_errors(text, code, index):
    with pytest.raises(PatternError) as err:
        parse_pattern(text)
    assert err.value.code == code
    assert err.value.index == index


def test_scheme_alias():
    assert parse_scheme("2-2-2").text == "110011"
    assert parse_scheme("4-8-4").text == "1111000000001111"
    assert parse_pattern("4-8-4") == parse_scheme("4-8-4")
    assert parse_scheme("3").text == "111"
    for bad in ("2-2", "2-0-2", "a-b-c", "2--2"):
        with pytest.raises(PatternError) as err:
            parse_scheme(bad)
        assert err.value.code == "BadScheme"


def test_rho_validation():
    pat = parse_pattern("11")
    with pytest.raises(RhoError) as err:
        ModelParams(0.0, pat)
    assert err.value.code == "RhoZero"
    for rho in (1.0, -1.0, 1.5, float("nan"), float("inf")):
        with pytest.raises(RhoError) as err:
            ModelParams(rho, pat)
        assert err.value.code == "RhoOutOfRange"


def test_covariance_examples():
    C = covariance_matrix(ModelParams(0.5, parse_pattern("11")))
    np.testing.assert_array_equal(C, [[0, 0.5], [0, 0]])
    C6 = covariance_matrix(ModelParams(0.9, parse_pattern("111111")))
    assert np.max(np.abs(np.linalg.matrix_power(C6, 6))) == 0.0


@given(patterns())
def test_pattern_invariants(text):
    pat = parse_pattern(text)
    assert pat.n + len(pat.H) == pat.N
    assert pat.h == sum(pat.gaps)
    assert pat.p == 1 + max(pat.gaps, default=0)
    assert pat.p <= pat.h + 1
    assert CascadePattern.from_gaps(pat.N, pat.H).text == text
    assert list(pat.H) == [j + 1 for j in pat.gap_index]
    assert sorted(np.concatenate([pat.observed, pat.gap_index]).tolist()) == list(range(pat.N))


@given(patterns(), st.floats(-0.99, 0.99).filter(lambda r: r != 0))
def test_covariance_structure(text, rho):
    params = ModelParams(rho, parse_pattern(text))
    C = covariance_matrix(params)
    N = params.pattern.N
    assert np.max(np.abs(np.linalg.matrix_power(C, N))) == 0.0
    expected = np.full(N, 1 - rho**2)
    expected[-1] = 1.0
    np.testing.assert_allclose(np.eye(N) - C @ C.T, np.diag(expected), atol=1e-15)
