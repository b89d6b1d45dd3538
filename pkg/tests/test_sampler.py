import numpy as np
import pytest
from hypothesis import given, strategies as st

from gwhf.kernels import cross_covariance, kernel_eval, make_pure_kernel
from gwhf.sampler import (FieldRealization, GwhfEvaluator, Grid, MeanSpec, QuadratureError, Signal,
                          TruncationError, evaluate_gwhf, evaluate_gwhf_batch, polyanalytic_basis,
                          required_truncation, sample_gef, sample_gef_ensemble, sample_stft_field,
                          stft_mean_component, stft_window)
from gwhf.sampler import _hermite_function

H = 1e-5


def _fd_twisted(values, z):
    fx = (values(z + H) - values(z - H)) / (2 * H)
    fy = (values(z + 1j * H) - values(z - 1j * H)) / (2 * H)
    d, dbar = (fx - 1j * fy) / 2, (fx + 1j * fy) / 2
    f = values(z)
    return d - np.conj(z) / 2 * f, dbar + z / 2 * f


def test_coefficients_deterministic_and_prefix_stable():
    a = sample_gef(40, seed=3, index=2).coefficients
    b = sample_gef(40, seed=3, index=2).coefficients
    c = sample_gef(80, seed=3, index=2).coefficients
    assert np.array_equal(a, b)
    assert np.array_equal(a, c[:41])
    assert not np.array_equal(a, sample_gef(40, seed=3, index=3).coefficients)


def test_ensemble_rows_match_single_draws():
    C = sample_gef_ensemble(10, seed=5, count=4, start=7)
    for i in range(4):
        assert np.array_equal(C[i], sample_gef(10, 5, 7 + i).coefficients)


def test_standard_complex_gaussian_moments():
    x = sample_gef_ensemble(1, seed=11, count=100_000)[:, 0]
    assert abs(np.mean(np.abs(x) ** 2) - 1) < 0.02
    assert abs(np.mean(np.abs(x) ** 4) - 2) < 0.05
    assert abs(np.mean(x * x)) < 0.02  # circular symmetry


def test_truncation_refused_with_required_order():
    grid = Grid.disk(6, 0.2)
    with pytest.raises(TruncationError) as err:
        evaluate_gwhf(sample_gef(20, 0), 0, MeanSpec(), grid)
    assert err.value.required >= required_truncation(grid.max_radius)


@given(st.integers(0, 3), st.complex_numbers(max_magnitude=4))
def test_ladder_relations_by_finite_differences(n, z):
    ev = GwhfEvaluator(sample_gef(120, 1).coefficients, n, MeanSpec.parse("coherent:1+0.5j"))
    F, D1, D2 = ev(np.array([z]))
    d1, d2 = _fd_twisted(ev.values, np.array([z]))
    scale = 1 + abs(F[0])
    assert abs(D1[0] - d1[0]) < 1e-5 * scale
    assert abs(D2[0] - d2[0]) < 1e-5 * scale


@pytest.mark.parametrize("mean", ["constant:2", "signal:tone:1:0:0.5:0", "signal:gauss:1:0.3:0.2:0"])
def test_mean_ladders_by_finite_differences(mean):
    ev = GwhfEvaluator(None, 1, MeanSpec.parse(mean))
    z = np.array([0.4 + 0.3j, -1.1 + 0.8j])
    F, D1, D2 = ev(z)
    d1, d2 = _fd_twisted(ev.values, z)
    assert np.allclose(D1, d1, atol=1e-6)
    assert np.allclose(D2, d2, atol=1e-6)


def test_basis_rows_are_orthonormal_in_expectation():
    # sum_k |B_{m,k}(z)|^2 is the variance of W_m, equal to 1 for every order
    z = np.array([0.0, 1.5 + 0.5j, -2 + 2j])
    basis = polyanalytic_basis(z, 200, [0, 1, 2, 3])
    for m in range(4):
        assert np.allclose(np.sum(np.abs(basis[m]) ** 2, axis=0), 1.0, atol=1e-10)


def test_batch_matches_single_evaluation():
    grid = Grid.disk(3, 0.25)
    K = required_truncation(grid.max_radius)
    C = sample_gef_ensemble(K, 2, 3)
    F, D1, D2 = evaluate_gwhf_batch(C, 1, MeanSpec(), grid)
    single = evaluate_gwhf(sample_gef(K, 2, 1), 1, MeanSpec(), grid)
    m = grid.mask
    assert np.allclose(F[1][m], single.F[m]) and np.allclose(D1[1][m], single.D1F[m])
    assert np.isnan(F[0][~m]).all()


@pytest.mark.parametrize("n", [0, 1, 2])
def test_empirical_covariance_at_a_point(n):
    k = make_pure_kernel(n)
    z = np.array([0.7 - 0.4j])
    C = sample_gef_ensemble(90, 17 + n, 4000)
    vals = np.array([np.concatenate(GwhfEvaluator(c, n)(z)) for c in C])  # (N, 3)
    prod = vals[:, :, None] * vals[:, None, :].conj()
    est = prod.mean(axis=0)
    se = np.sqrt(np.mean(np.abs(prod - est) ** 2, axis=0) / len(C))
    want = cross_covariance(k, z[0], z[0])
    assert np.all(np.abs(est - want) <= 3 * se + 1e-12)


def test_window_names():
    assert stft_window("gauss") == 0 and stft_window("hermite1") == 1
    with pytest.raises(ValueError):
        stft_window("hann")


def test_gauss_window_noise_is_the_n0_field():
    grid = Grid.disk(2, 0.25)
    a = sample_stft_field("gauss", None, grid, seed=4)
    b = evaluate_gwhf(sample_gef(required_truncation(grid.max_radius), 4), 0, MeanSpec(), grid)
    assert np.array_equal(a.F[grid.mask], b.F[grid.mask])


def test_hermite1_window_ambiguity_is_the_laguerre1_kernel():
    # covariance of noise STFT is the window's self-STFT, computed here by plain quadrature
    t = np.arange(-8, 8, 1 / 256)
    h1 = _hermite_function(1, t)
    for a, b in [(0.2, 0.1), (0.5, -0.3), (0.9, 0.6)]:
        v = np.sum(h1 * _hermite_function(1, t - a) * np.exp(-2j * np.pi * t * b)) / 256
        z = np.sqrt(np.pi) * (a - 1j * b)
        assert abs(abs(v) - abs(kernel_eval(make_pure_kernel(1), z))) < 1e-10


def test_gaussian_bump_mean_modulus():
    z = np.array([0, 0.5 + 0.5j, -1.2 + 0.3j, 2 - 1j])
    f = stft_mean_component(Signal("gauss", 1.0, 0.0, 0.0, 0.0), 0, z)
    assert np.allclose(np.abs(f), np.exp(-np.abs(z) ** 2 / 2), atol=1e-12)


def test_tone_closed_form_matches_quadrature():
    from gwhf.sampler import _stft_mean_on_grid

    grid = Grid.disk(4, 0.3)
    sig = Signal("tone", 1.5, 0.0, -0.4, 0.0)
    for m in range(3):
        quad = _stft_mean_on_grid(sig, m, grid, 1 / 128)
        closed = stft_mean_component(sig, m, grid.points)
        assert np.allclose(quad[grid.mask], closed[grid.mask], atol=1e-12)


def test_grid_quadrature_matches_pointwise():
    from gwhf.sampler import _stft_mean_on_grid

    grid = Grid.disk(4, 0.3)
    sig = Signal("gauss", 1.0, 0.2, 0.3, 0.0)
    for m in range(3):
        quad = _stft_mean_on_grid(sig, m, grid, 1 / 128)
        point = stft_mean_component(sig, m, grid.points)
        assert np.allclose(quad[grid.mask], point[grid.mask], atol=1e-10)


def test_unconverged_quadrature_raises():
    grid = Grid.disk(20, 1.0)
    with pytest.raises(QuadratureError):
        sample_stft_field("gauss", Signal("chirp", 1, 0, 0, 40), grid, seed=0, derivatives=False)


def test_field_json_round_trip():
    grid = Grid.disk(1, 0.25)
    f = evaluate_gwhf(sample_gef(60, 9), 1, MeanSpec(), grid)
    g = FieldRealization.from_json(f.to_json())
    m = grid.mask
    assert g.grid == grid and g.id == f.id
    assert np.array_equal(g.F[m], f.F[m]) and np.array_equal(g.D2F[m], f.D2F[m])


def test_field_arrays_read_only():
    f = evaluate_gwhf(sample_gef(60, 9), 0, MeanSpec(), Grid.disk(1, 0.25))
    with pytest.raises(ValueError):
        f.F[0, 0] = 1


@given(st.sampled_from(["none", "constant:1", "constant:2-1j", "coherent:0.5+1j", "signal:tone:1:0:0.3:0"]))
def test_mean_spec_tag_round_trip(text):
    spec = MeanSpec.parse(text)
    assert MeanSpec.parse(spec.tag) == spec
