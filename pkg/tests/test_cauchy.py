import numpy as np
import pytest
from scipy.special import wofz

from flist.cauchy import (SIDES, cauchy_apply, cauchy_offaxis, cauchy_pv_matrix, fourier_pair,
                          modulated, plemelj_apply, plemelj_matrices, plemelj_minus, plemelj_plus,
                          projected_modulation)
from flist.grids import ComplexSamples, Field, RealGrid, SpectralGrid


@pytest.fixture(scope="module")
def zgrid():
    return SpectralGrid.build(z_cut=16.0, n=256)


@pytest.fixture(scope="module")
def gaussian(zgrid):
    return ComplexSamples(zgrid, np.exp(-zgrid.nodes**2))


def test_fourier_pair_of_gaussian():
    g = RealGrid(-20, 20, 512)
    spectrum = fourier_pair(Field.from_values(g, np.exp(-g.nodes**2)))
    exact = np.sqrt(np.pi) / (2 * np.pi) * np.exp(-spectrum.xi**2 / 4)
    assert np.max(np.abs(spectrum.values - exact)) < 1e-12


def test_fourier_pair_plancherel_and_inverse():
    g = RealGrid(-20, 20, 512)
    vals = (1 + 0.5j * g.nodes) * np.exp(-(g.nodes - 1) ** 2)
    spectrum = fourier_pair(Field.from_values(g, vals))
    dxi = 2 * np.pi / (g.n * g.h)
    assert np.sum(np.abs(vals) ** 2) * g.h == pytest.approx(
        2 * np.pi * np.sum(np.abs(spectrum.values) ** 2) * dxi, rel=1e-12)
    assert np.max(np.abs(spectrum.inverse() - vals)) < 1e-13


def test_plemelj_jump_is_identity(zgrid):
    pp, pm = plemelj_matrices(zgrid)
    assert np.max(np.abs(pp - pm - np.eye(zgrid.n))) < 1e-15


def test_plemelj_of_gaussian_matches_faddeeva(zgrid, gaussian):
    # C[e^{-s^2}](z) = w(z) / 2 in the upper half plane
    z = zgrid.nodes
    inner = np.abs(z) < zgrid.z_cut / 2
    plus = plemelj_plus(gaussian).values
    minus = plemelj_minus(gaussian).values
    assert np.max(np.abs(plus - wofz(z) / 2)[inner]) < 1e-8
    assert np.max(np.abs(minus - (wofz(z) / 2 - np.exp(-z**2)))[inner]) < 1e-8


def test_plemelj_sum_of_rational_function():
    g = SpectralGrid.build(z_cut=64.0, n=1024)
    z = g.nodes
    h = ComplexSamples(g, 1 / (1 + z**2))
    total = plemelj_plus(h).values + plemelj_minus(h).values
    inner = np.abs(z) < 4
    # truncating the 1/s^2 tail at z_cut costs O(1/z_cut^2) near the origin
    assert np.max(np.abs(total - 1j * z / (1 + z**2))[inner]) < 5e-3


def test_fast_apply_matches_dense(zgrid):
    rng = np.random.default_rng(1)
    v = rng.standard_normal((zgrid.n, 3)) + 1j * rng.standard_normal((zgrid.n, 3))
    dense = cauchy_pv_matrix(zgrid) @ v
    assert np.max(np.abs(cauchy_apply(zgrid, v) - dense)) < 1e-13
    pp, pm = plemelj_matrices(zgrid)
    assert np.max(np.abs(plemelj_apply(zgrid, v[:, 0], 1) - pp @ v[:, 0])) < 1e-13
    assert np.max(np.abs(plemelj_apply(zgrid, v[:, 0], -1) - pm @ v[:, 0])) < 1e-13


@pytest.mark.parametrize("x", [-0.7, 0.3, 1.0])
@pytest.mark.parametrize("side", SIDES)
def test_projected_modulation_agrees_with_matrix_route(zgrid, gaussian, x, side):
    direct = projected_modulation(gaussian, x, side).values
    sign = 1 if side.startswith("plus") else -1
    dense = plemelj_apply(zgrid, modulated(gaussian, x, side).values, sign)
    inner = np.abs(zgrid.nodes) < zgrid.z_cut / 2
    assert np.max(np.abs(direct - dense)[inner]) < 1e-6


def test_projected_modulation_decays_in_x(zgrid, gaussian):
    # P+(f e^{-2izx}) vanishes as x -> +inf for smooth f
    far = projected_modulation(gaussian, 16.0, "plus-at-plus-x").values
    assert np.max(np.abs(far)) < 1e-4


def test_projected_modulation_rejects_unknown_side(gaussian):
    with pytest.raises(ValueError):
        projected_modulation(gaussian, 0.0, "sideways")


@pytest.mark.parametrize("z0", [1 + 1j, -2 + 0.5j, 0.3 + 3j])
def test_offaxis_cauchy_both_half_planes(gaussian, z0):
    assert abs(cauchy_offaxis(gaussian, z0) - wofz(z0) / 2) < 1e-12
    below = np.conj(z0)
    assert abs(cauchy_offaxis(gaussian, below) + wofz(-below) / 2) < 1e-12


def test_offaxis_cauchy_large_z_asymptotic(gaussian):
    z0 = 200j
    expected = -np.sqrt(np.pi) / (2j * np.pi * z0)
    assert abs(cauchy_offaxis(gaussian, z0) - expected) < 1e-3 * abs(expected)


def test_offaxis_cauchy_rejects_real_point(gaussian):
    with pytest.raises(ValueError):
        cauchy_offaxis(gaussian, 0.5)
