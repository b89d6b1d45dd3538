from fractions import Fraction as Fr

import numpy as np
import pytest
from hypothesis import given, strategies as st

from gwhf.polynomials import (BiIndexedPoly, RationalPoly, complex_hermite, exp_moment, laguerre,
                              rational_from_str, rational_to_str)

fractions = st.fractions(min_value=-20, max_value=20, max_denominator=50)
polys = st.lists(fractions, max_size=6).map(RationalPoly)
t = RationalPoly([0, 1])


def test_laguerre_low_orders():
    assert laguerre(0) == RationalPoly([1])
    assert laguerre(1) == RationalPoly([1, -1])
    assert laguerre(2) == RationalPoly([1, -2, Fr(1, 2)])


@pytest.mark.parametrize("k", range(7))
def test_laguerre_matches_scipy(k):
    from scipy.special import eval_laguerre

    x = np.linspace(0, 9, 13)
    assert np.allclose(laguerre(k).evaluate_float(x), eval_laguerre(k, x), rtol=1e-12, atol=1e-12)


@pytest.mark.parametrize("k", range(1, 6))
def test_laguerre_three_term_recurrence(k):
    lhs = (k + 1) * laguerre(k + 1)
    rhs = (2 * k + 1 - t) * laguerre(k) - k * laguerre(k - 1)
    assert lhs == rhs


def test_complex_hermite_small_cases():
    assert complex_hermite(1, 0) == BiIndexedPoly.z()
    assert complex_hermite(1, 1) == BiIndexedPoly.z() * BiIndexedPoly.zbar() - 1


@pytest.mark.parametrize("k", range(5))
def test_complex_hermite_diagonal_is_laguerre(k):
    from math import factorial

    expected = laguerre(k).scale((-1) ** k * factorial(k))
    assert complex_hermite(k, k).radial_part() == expected


@pytest.mark.parametrize("j,k", [(2, 1), (3, 0), (1, 3)])
def test_complex_hermite_conjugation_swaps_indices(j, k):
    assert complex_hermite(j, k).conjugate() == complex_hermite(k, j)


def test_exp_moment_basics():
    assert exp_moment(RationalPoly([1]), 1) == 1
    assert exp_moment(RationalPoly([0, 0, 1]), 1) == 2
    assert exp_moment(RationalPoly([1]), Fr(2)) == Fr(1, 2)
    with pytest.raises(ValueError):
        exp_moment(RationalPoly([1]), 0)


def test_exp_moment_of_g_polynomial():
    p = RationalPoly([2091, -22110, 62628, -77836, 48325, -15040, 2156, -116, 2]).scale(Fr(2, 729))
    assert exp_moment(p, 2) == Fr(7, 81)


@given(polys, st.fractions(min_value=Fr(1, 4), max_value=4, max_denominator=8))
def test_exp_moment_matches_quadrature(p, lam):
    from scipy.integrate import quad

    val, _ = quad(lambda s: p.evaluate_float(s) * np.exp(-float(lam) * s), 0, np.inf)
    assert abs(float(exp_moment(p, lam)) - val) <= 1e-7 * (1 + abs(val))


def test_poly_ops_examples():
    assert laguerre(1) * laguerre(1) == RationalPoly([1, -2, 1])
    assert laguerre(2).compose_scaled(2) == RationalPoly([1, -4, 2])
    assert laguerre(1)(Fr(1)) == 0


@given(polys, polys, polys)
def test_ring_axioms(a, b, c):
    assert a + b == b + a
    assert a * b == b * a
    assert (a + b) + c == a + (b + c)
    assert (a * b) * c == a * (b * c)
    assert a * (b + c) == a * b + a * c
    assert a - a == RationalPoly()


@given(polys, fractions)
def test_exact_and_float_evaluation_agree(p, x):
    assert abs(float(p(x)) - p.evaluate_float(float(x))) <= 1e-9 * (1 + abs(float(p(x))))


@given(polys)
def test_degree_is_trimmed(p):
    q = RationalPoly(list(p.coefficients) + [0, 0])
    assert q == p and q.degree == p.degree


@given(fractions)
def test_rational_string_round_trip(q):
    assert rational_from_str(rational_to_str(q)) == q
