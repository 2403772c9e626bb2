from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mpcquant.polynomial import (
    Polynomial,
    exact_linear_form_exterior_derivative,
    univariate_from_string,
)


def test_expression_matches_constructed():
    p1, q1 = Polynomial.variable(2, 0), Polynomial.variable(2, 1)
    built = 3 * p1 ** 2 * q1 - 2 * q1 + 1.5
    parsed = Polynomial.from_expression(1, "3 p1^2 q1 - 2*q1 + 1.5")
    assert built.terms == parsed.terms


def test_compose_univariate():
    x = Polynomial.variable(2, 0) + Polynomial.variable(2, 1)
    f = x.compose_univariate([0.0, 2.0, 0.0, 1.0])
    pt = np.array([0.3, -1.1])
    s = pt.sum()
    assert f(pt) == pytest.approx(s ** 3 + 2 * s)


def test_univariate_from_string():
    assert univariate_from_string("x^3+2x") == [0.0, 2.0, 0.0, 1.0]


def test_degree_and_diff():
    p = Polynomial.from_expression(2, "p1^2 q2 + q1")
    assert p.degree == 3
    assert p.diff(0).terms == Polynomial.from_expression(2, "2 p1 q2").terms


def test_exterior_derivative_exact():
    A = [[0, Fraction(1, 2)], [Fraction(-1, 2), 0]]
    d = exact_linear_form_exterior_derivative(A)
    assert d[0][1] == Fraction(1) and d[1][0] == Fraction(-1)


def test_rejects_bad_exponents():
    with pytest.raises(ValueError):
        Polynomial(2, {(1,): 1.0})
    with pytest.raises(ValueError):
        Polynomial(1, {(-1,): 1.0})


coef = st.floats(-3, 3, allow_nan=False)


@settings(max_examples=40, deadline=None)
@given(st.lists(st.tuples(coef, st.tuples(*[st.integers(0, 3)] * 4)), min_size=1, max_size=6),
       st.tuples(*[st.floats(-1.5, 1.5)] * 4))
def test_gradient_and_hessian_match_finite_differences(terms, point):
    poly = Polynomial.from_terms(4, terms)
    x = np.array(point)
    g = np.array([d(x) for d in poly.gradient()])
    h = 1e-6
    fd = np.array([(poly(x + h * e) - poly(x - h * e)) / (2 * h) for e in np.eye(4)])
    assert np.allclose(g, fd, rtol=1e-5, atol=1e-5)
    H = np.array([[d(x) for d in row] for row in poly.hessian()])
    assert np.allclose(H, H.T)
