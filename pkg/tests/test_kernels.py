from fractions import Fraction as Fr

import numpy as np
import pytest
from hypothesis import given, strategies as st

from gwhf.kernels import (covariance_matrix, cross_covariance, kernel_eval, kernel_from_spec,
                          make_pure_kernel, twisted_derivs, twisted_phase, validate_assumptions)
from gwhf.polynomials import RationalPoly

H = 1e-4


def _wirtinger(f, z):
    fx = (f(z + H) - f(z - H)) / (2 * H)
    fy = (f(z + 1j * H) - f(z - 1j * H)) / (2 * H)
    return (fx - 1j * fy) / 2, (fx + 1j * fy) / 2


# twisted operators acting on a function of one variable
def D1(f):
    return lambda z: _wirtinger(f, z)[0] - np.conj(z) / 2 * f(z)


def D2(f):
    return lambda z: _wirtinger(f, z)[1] + z / 2 * f(z)


def D1bar(f):
    return lambda z: _wirtinger(f, z)[1] - z / 2 * f(z)


def D2bar(f):
    return lambda z: _wirtinger(f, z)[0] + np.conj(z) / 2 * f(z)


@pytest.mark.parametrize("n,lap", [(0, Fr(-1, 2)), (1, Fr(-3, 2)), (2, Fr(-5, 2))])
def test_laplacian_at_zero(n, lap):
    assert make_pure_kernel(n).laplacian_at_zero == lap


def test_spec_round_trip():
    for spec in ("gauss", "laguerre:1", "laguerre:4", "poly:1,1/2"):
        assert kernel_from_spec(spec).spec == spec
    with pytest.raises(ValueError):
        kernel_from_spec("bessel:1")


def test_laguerre1_derivatives_at_origin():
    d1h, d2h, d11, d22, _ = twisted_derivs(make_pure_kernel(1), 0j)
    assert d1h == 0 and d2h == 0
    assert d11 == pytest.approx(-2) and d22 == pytest.approx(-1)
    assert kernel_eval(make_pure_kernel(1), 1 + 0j) == 0


def test_laguerre1_closed_forms():
    k = make_pure_kernel(1)
    z = np.array([0.3 - 0.2j, 1.1 + 0.7j, -0.9 + 1.4j])
    s = np.abs(z) ** 2
    g = np.exp(-s / 2)
    d1h, d2h, d11, d22, d12 = twisted_derivs(k, z)
    assert np.allclose(d1h, -np.conj(z) * (2 - s) * g)
    assert np.allclose(d2h, -z * g)
    assert np.allclose(d11, -(s * s - 4 * s + 2) * g)
    assert np.allclose(d22, -g)
    assert np.allclose(d12, np.conj(z) ** 2 * g)


def test_gauss_kernel_d2_vanishes():
    z = np.array([0.5 + 0.5j, -2 + 1j])
    assert np.allclose(twisted_derivs(make_pure_kernel(0), z)[1], 0)


@pytest.mark.parametrize("n", [0, 1, 2, 3])
def test_twisted_derivs_match_finite_differences(n):
    k = make_pure_kernel(n)
    h = lambda z: kernel_eval(k, z)
    z = np.array([0.4 + 0.3j, -1.2 + 0.5j, 0.8 - 1.6j])
    got = twisted_derivs(k, z)
    fd = (D1(h)(z), D2(h)(z), D1(D1bar(h))(z), D2(D2bar(h))(z), D1(D2bar(h))(z))
    for a, b in zip(got, fd):
        assert np.allclose(a, b, atol=1e-6)


@pytest.mark.parametrize("n,diag", [(0, (1, 1, 0)), (1, (1, 2, 1)), (2, (1, 3, 2))])
def test_covariance_matrix_diagonal(n, diag):
    cm = covariance_matrix(make_pure_kernel(n))
    assert cm.is_diagonal()
    assert cm.diagonal == tuple(Fr(d) for d in diag)


@given(st.integers(0, 3), st.complex_numbers(max_magnitude=2), st.complex_numbers(max_magnitude=2))
def test_cross_covariance_matches_derivatives_of_covariance_function(n, z, w):
    k = make_pure_kernel(n)

    def cov_z(wv):
        return lambda zz: kernel_eval(k, zz - wv) * twisted_phase(zz, wv)

    # derivatives in z act on the left slot; in w, conjugate then act in w
    C = cross_covariance(k, z, w)
    base = cov_z(w)
    assert np.isclose(C[0, 0], base(z))
    assert np.isclose(C[1, 0], D1(base)(z), atol=1e-6)
    assert np.isclose(C[2, 0], D2(base)(z), atol=1e-6)
    conj_w = lambda ww: np.conj(kernel_eval(k, z - ww) * twisted_phase(z, ww))
    assert np.isclose(C[0, 1], np.conj(D1(conj_w)(w)), atol=1e-6)
    assert np.isclose(C[0, 2], np.conj(D2(conj_w)(w)), atol=1e-6)


@given(st.integers(0, 3), st.complex_numbers(max_magnitude=3))
def test_cross_covariance_on_diagonal_is_covariance_matrix(n, z):
    k = make_pure_kernel(n)
    assert np.allclose(cross_covariance(k, z, z), covariance_matrix(k).as_array())


@given(st.integers(0, 3), st.complex_numbers(max_magnitude=3), st.complex_numbers(max_magnitude=3))
def test_cross_covariance_is_hermitian(n, z, w):
    k = make_pure_kernel(n)
    assert np.allclose(cross_covariance(k, z, w), cross_covariance(k, w, z).conj().T)


def test_validate_assumptions():
    rep = validate_assumptions(make_pure_kernel(1), 8, 0.1)
    assert rep.normalization_ok and rep.strict_bound_margin > 0 and rep.ok
    bad = validate_assumptions(kernel_from_spec("poly:1,1"), 4, 0.1)
    assert bad.strict_bound_margin <= 0 and not bad.ok and bad.notes
    g = validate_assumptions(make_pure_kernel(0), 8, 0.1)
    assert g.min_gram_eigenvalue > -1e-10


def test_strict_margin_for_gauss_is_one_minus_inverse_e():
    rep = validate_assumptions(make_pure_kernel(0), 6, 0.05)
    assert rep.strict_bound_margin == pytest.approx(1 - np.exp(-1), rel=1e-9)


def test_unnormalized_profile_flagged():
    rep = validate_assumptions(kernel_from_spec("poly:1/2"), 4, 0.2)
    assert not rep.normalization_ok


def test_profile_property():
    assert make_pure_kernel(2).profile == RationalPoly([1, -2, Fr(1, 2)])
