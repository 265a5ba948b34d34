import itertools

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from torusop import fourier as fc
from torusop.fourier import PeriodicFunction, TorusGrid

from conftest import random_band_limited


def direct_coefficients(grid, values):
    """Quadrature sum (2 pi / N)^n sum_x u(x) e^{-i k.x}, one mode at a time."""
    xs = grid.nodes()
    out = np.zeros(grid.shape, np.complex128)
    half = grid.N // 2
    for k in itertools.product(range(-half, half), repeat=grid.n):
        phase = sum(ki * x for ki, x in zip(k, xs))
        out[grid.slot(k)] = grid.weight * np.sum(values * np.exp(-1j * phase))
    return out


@pytest.mark.parametrize("n,N", [(1, 8), (1, 16), (2, 8)])
def test_analyze_matches_direct_sum(n, N, rng):
    grid = TorusGrid(n, N)
    u = rng.standard_normal(grid.shape) + 1j * rng.standard_normal(grid.shape)
    assert np.allclose(fc.analyze(grid, u).coeffs, direct_coefficients(grid, u), atol=1e-12)


@pytest.mark.parametrize("n,N", [(1, 16), (2, 8), (3, 8)])
def test_synthesize_inverts_analyze(n, N, rng):
    grid = TorusGrid(n, N)
    u = rng.standard_normal(grid.shape) + 1j * rng.standard_normal(grid.shape)
    assert np.allclose(fc.synthesize(fc.analyze(grid, u)), u, atol=1e-13)


def test_exponential_has_single_coefficient():
    grid = TorusGrid(2, 16)
    f = fc.exponential(grid, (2, -3))
    assert f.coef((2, -3)) == pytest.approx((2 * np.pi) ** 2)
    assert np.count_nonzero(np.abs(f.coeffs) > 1e-12) == 1


@pytest.mark.parametrize("N", [3, 2, 7])
def test_grid_rejects_bad_sizes(N):
    with pytest.raises(fc.FourierError):
        TorusGrid(1, N)


def test_grid_rejects_dimension():
    with pytest.raises(fc.FourierError):
        TorusGrid(4, 8)


def test_slot_outside_box():
    with pytest.raises(fc.FourierError):
        TorusGrid(1, 8).slot((4,))


@pytest.mark.parametrize("k,order", [(1, 1), (3, 2), (5, 3), (2, 7)])
def test_derivative_of_sine(k, order):
    grid = TorusGrid(1, 32)
    f = fc.from_function(grid, lambda x: np.sin(k * x))
    d = fc.derivative(f, (order,))
    (x,) = grid.nodes()
    expect = k ** order * np.sin(k * x + order * np.pi / 2)
    assert np.allclose(d.values(), expect, atol=1e-9 * k ** order)


def test_mixed_derivative_2d():
    grid = TorusGrid(2, 16)
    f = fc.from_function(grid, lambda x, y: np.sin(2 * x) * np.cos(3 * y))
    x, y = grid.nodes()
    d = fc.derivative(f, (1, 2))
    assert np.allclose(d.values(), -18 * np.cos(2 * x) * np.cos(3 * y), atol=1e-10)


def test_derivative_cap():
    grid = TorusGrid(1, 16)
    with pytest.raises(fc.DifferentiationCapError):
        fc.derivative(fc.constant(grid, 1.0), (21,))
    with pytest.raises(fc.DifferentiationCapError):
        fc.derivative(fc.constant(grid, 1.0), (5,), a_max=4)


def test_translate_matches_shifted_samples():
    grid = TorusGrid(1, 32)
    f = fc.from_function(grid, lambda x: np.exp(np.cos(x)))
    g = fc.translate(f, 0.37)
    (x,) = grid.nodes()
    assert np.allclose(g.values(), np.exp(np.cos(x - 0.37)), atol=1e-12)


@settings(max_examples=30, deadline=None)
@given(y=st.floats(-7, 7), z=st.floats(-7, 7))
def test_translation_group_law(y, z):
    grid = TorusGrid(1, 16)
    f = PeriodicFunction(grid, random_band_limited(grid, 7, np.random.default_rng(0)))
    a = fc.translate(fc.translate(f, y), z)
    b = fc.translate(f, y + z)
    assert np.allclose(a.coeffs, b.coeffs, atol=1e-11)


def test_one_minus_laplacian():
    grid = TorusGrid(2, 16)
    f = fc.exponential(grid, (1, 2))
    g = fc.one_minus_laplacian_pow(f, 2)
    assert g.coef((1, 2)) == pytest.approx(36 * (2 * np.pi) ** 2)
    with pytest.raises(fc.FourierError):
        fc.one_minus_laplacian_pow(f, -1)


def test_pointwise_mul_band_limited_is_exact():
    grid = TorusGrid(1, 16)
    f = fc.from_function(grid, lambda x: np.cos(5 * x))
    g = fc.from_function(grid, lambda x: np.sin(6 * x))
    h = fc.pointwise_mul(f, g)
    (x,) = grid.nodes()
    # product has modes 1 and 11; 11 lies outside the N = 16 box and is dropped
    assert np.allclose(h.values(), 0.5 * np.sin(x), atol=1e-13)


def test_pointwise_mul_grid_mismatch():
    with pytest.raises(fc.FourierError):
        fc.pointwise_mul(fc.constant(TorusGrid(1, 8), 1), fc.constant(TorusGrid(1, 16), 1))


@pytest.mark.parametrize("j", [(3,), (-2,), (0,)])
def test_modulate_is_exact_shift(j):
    grid = TorusGrid(1, 16)
    f = fc.exponential(grid, (1,))
    g = fc.modulate(f, j)
    assert g.coef((1 + j[0],)) == pytest.approx(2 * np.pi)


def test_resample_round_trip(rng):
    grid = TorusGrid(2, 8)
    f = PeriodicFunction(grid, random_band_limited(grid, 3, rng))
    up = fc.resample(f, 32)
    assert np.allclose(fc.resample(up, 8).coeffs, f.coeffs)
    x, y = up.grid.nodes()
    assert np.allclose(up.values()[::4, ::4], f.values())


@pytest.mark.parametrize("func,expect", [
    (lambda x: np.sin(x), 1.0),
    (lambda x: 3 + np.cos(2 * x), 4.0),
    (lambda x: np.exp(1j * 5 * x), 1.0),
])
def test_sup_norm_known(func, expect):
    f = fc.from_function(TorusGrid(1, 32), func)
    assert fc.sup_norm(f, 8) == pytest.approx(expect, abs=1e-3)


def test_sup_norm_finds_off_grid_peak():
    # peak at x = pi/7 falls between the coarse nodes
    grid = TorusGrid(1, 8)
    f = fc.from_function(grid, lambda x: np.cos(x - np.pi / 7))
    assert fc.sup_norm(f, 1) < 1 - 1e-3
    assert fc.sup_norm(f, 64) == pytest.approx(1.0, abs=1e-3)


@settings(max_examples=25, deadline=None)
@given(seed=st.integers(0, 2 ** 32 - 1), s=st.sampled_from([1, 2, 4]), factor=st.sampled_from([2, 4]))
def test_sup_norm_monotone_along_nested_grids(seed, s, factor):
    grid = TorusGrid(1, 16)
    f = PeriodicFunction(grid, random_band_limited(grid, 7, np.random.default_rng(seed)))
    assert fc.sup_norm(f, s) <= fc.sup_norm(f, s * factor) * (1 + 1e-13)


@settings(max_examples=25, deadline=None)
@given(seed=st.integers(0, 2 ** 32 - 1))
def test_sup_norm_of_product_is_submultiplicative(seed):
    rng = np.random.default_rng(seed)
    grid = TorusGrid(1, 32)
    f = PeriodicFunction(grid, random_band_limited(grid, 4, rng))
    g = PeriodicFunction(grid, random_band_limited(grid, 4, rng))
    lhs = fc.sup_norm(fc.pointwise_mul(f, g), 16)
    assert lhs <= fc.sup_norm(f, 16) * fc.sup_norm(g, 16) + 1e-8 * (1 + lhs)


def test_parseval(rng):
    grid = TorusGrid(2, 16)
    u = rng.standard_normal(grid.shape)
    f = fc.analyze(grid, u)
    assert fc.l2_norm_sq(f) == pytest.approx(grid.weight * np.sum(u * u))


def test_chop_relative_per_function():
    c = np.array([[1.0, 1e-15, 0.5], [1e-20, 1e-21, 1e-35]])
    out = fc.chop_coeffs(c, 1e-14, 1)
    assert out[0, 1] == 0 and out[0, 2] == 0.5
    assert out[1, 0] == 1e-20 and out[1, 2] == 0


def test_coefficients_are_read_only():
    f = fc.constant(TorusGrid(1, 8), 1.0)
    with pytest.raises(ValueError):
        f.coeffs[0] = 2


def test_multi_indices_graded_order():
    got = list(fc.multi_indices(2, 2))
    assert got == [(0, 0), (1, 0), (0, 1), (2, 0), (1, 1), (0, 2)]
    assert fc.mi_factorial((3, 2)) == 12
