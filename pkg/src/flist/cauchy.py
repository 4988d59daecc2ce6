"""Fourier transform, Cauchy transform and Plemelj projections on the spectral grid.

Conventions: f^(xi) = (1/2pi) int f(z) e^{-i z xi} dz and f(z) = int f^(xi) e^{i z xi} dxi.
Cauchy transform C h(z) = (1/2 pi i) int h(s) / (s - z) ds; P+ and P- are its boundary
values from above and below, so P+ - P- = I.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .grids import ComplexSamples, ConfigurationError, Field, RealGrid, SpectralGrid, is_power_of_two


@dataclass(frozen=True, eq=False)
class Spectrum:
    """Transform samples on the FFT frequency grid of a RealGrid."""

    grid: RealGrid
    xi: np.ndarray
    values: np.ndarray

    def inverse(self) -> np.ndarray:
        return _inverse_values(self)


def fourier_pair(field: Field) -> Spectrum:
    """Forward transform of the field samples, f^(xi) = (1/2pi) int f e^{-i x xi} dx."""
    grid = field.grid
    if not is_power_of_two(grid.n):
        raise ConfigurationError("fourier_pair needs a power-of-two grid")
    xi = grid.wavenumbers
    # phase correction places the origin of the transform at x = 0, not at x_min
    vals = grid.h / (2 * np.pi) * np.exp(-1j * xi * grid.x_min) * np.fft.fft(field.values)
    return Spectrum(grid, xi, vals)


def _inverse_values(spectrum: Spectrum) -> np.ndarray:
    grid = spectrum.grid
    return np.fft.ifft(spectrum.values * np.exp(1j * spectrum.xi * grid.x_min)) * (2 * np.pi / grid.h)


@lru_cache(maxsize=8)
def _cauchy_kernel(key, nodes_bytes, weights_bytes):
    z = np.frombuffer(nodes_bytes)
    w = np.frombuffer(weights_bytes)
    n = len(z)
    idx = np.arange(n)
    # odd-even principal-value rule: only nodes an odd number of steps away contribute,
    # each with twice its weight; spectrally accurate in the uniform parameter s.
    odd = ((idx[:, None] - idx[None, :]) % 2) == 1
    diff = z[None, :] - z[:, None]
    diff[~odd] = 1.0
    k = np.where(odd, 2.0 * w[None, :] / diff, 0.0) / (2j * np.pi)
    k.setflags(write=False)
    return k


def cauchy_pv_matrix(grid: SpectralGrid) -> np.ndarray:
    """Matrix K with (K h)_i = (1/2 pi i) PV int h(s) / (s - z_i) ds."""
    return _cauchy_kernel(grid.key(), grid.nodes.tobytes(), grid.weights.tobytes())


@lru_cache(maxsize=8)
def _parity_blocks(key, nodes_bytes, weights_bytes):
    z = np.frombuffer(nodes_bytes)
    w = np.frombuffer(weights_bytes)
    ev, od = np.arange(0, len(z), 2), np.arange(1, len(z), 2)
    # real parts of the odd-even rule: K = -(i / pi) * B with B_ij = w_j / (z_j - z_i)
    b_eo = np.ascontiguousarray(w[None, od] / (z[None, od] - z[ev, None]))
    b_oe = np.ascontiguousarray(w[None, ev] / (z[None, ev] - z[od, None]))
    for b in (b_eo, b_oe):
        b.setflags(write=False)
    return b_eo, b_oe


def cauchy_apply(grid: SpectralGrid, v: np.ndarray) -> np.ndarray:
    """K @ v for a (n,) or (n, m) complex array using the even/odd block structure of K."""
    b_eo, b_oe = _parity_blocks(grid.key(), grid.nodes.tobytes(), grid.weights.tobytes())
    v = np.asarray(v, dtype=complex)
    shape = v.shape
    v2 = v.reshape(shape[0], -1)
    out = np.empty_like(v2)
    ve = np.ascontiguousarray(v2[1::2]).view(float)
    vo = np.ascontiguousarray(v2[0::2]).view(float)
    out[0::2] = (b_eo @ ve).view(complex)
    out[1::2] = (b_oe @ vo).view(complex)
    out *= -1j / np.pi
    return out.reshape(shape)


def plemelj_apply(grid: SpectralGrid, v: np.ndarray, side: int) -> np.ndarray:
    """P+ v (side=+1) or P- v (side=-1), with P+- = +-I/2 + K."""
    return 0.5 * side * v + cauchy_apply(grid, v)


def plemelj_matrices(grid: SpectralGrid):
    k = cauchy_pv_matrix(grid)
    eye = np.eye(grid.n)
    return 0.5 * eye + k, -0.5 * eye + k


def plemelj_plus(h: ComplexSamples) -> ComplexSamples:
    k = cauchy_pv_matrix(h.grid)
    return ComplexSamples(h.grid, 0.5 * h.values + k @ h.values)


def plemelj_minus(h: ComplexSamples) -> ComplexSamples:
    k = cauchy_pv_matrix(h.grid)
    return ComplexSamples(h.grid, -0.5 * h.values + k @ h.values)


SIDES = ("plus-at-plus-x", "minus-at-plus-x", "plus-at-minus-x", "minus-at-minus-x")


def _gauss_panels(a: float, b: float, width: float, order: int = 16):
    npan = max(1, int(np.ceil((b - a) / width)))
    edges = np.linspace(a, b, npan + 1)
    t, wt = np.polynomial.legendre.leggauss(order)
    half = 0.5 * np.diff(edges)
    mid = 0.5 * (edges[1:] + edges[:-1])
    nodes = (mid[:, None] + half[:, None] * t[None, :]).ravel()
    weights = (half[:, None] * wt[None, :]).ravel()
    return nodes, weights


def projected_modulation(f: ComplexSamples, x: float, side: str, xi_max: float = 40.0,
                         taper_fraction: float = 0.05) -> ComplexSamples:
    """Projection of a modulated function through its half-line Fourier representation.

    side selects P+(f e^{-2izx}), P-(f e^{2izx}), P+(f e^{2izx}) or P-(f e^{-2izx}).
    With g = f e^{i lam z} one has g^(xi) = f^(xi - lam), hence
    P+ g(z) =  int_{-lam}^{inf}  f^(eta) e^{iz(eta + lam)} d eta,
    P- g(z) = -int_{-inf}^{-lam} f^(eta) e^{iz(eta + lam)} d eta.
    The eta-window is [-xi_max, xi_max] with a raised-cosine taper on its outer edge.
    """
    if side not in SIDES:
        raise ValueError(f"unknown side {side!r}; expected one of {SIDES}")
    plus = side.startswith("plus")
    lam = -2.0 * x if side in ("plus-at-plus-x", "minus-at-minus-x") else 2.0 * x
    grid = f.grid
    z = grid.nodes
    if plus:
        a, b = -lam, xi_max
    else:
        a, b = -xi_max, -lam
    if b <= a:
        return ComplexSamples(grid, np.zeros(grid.n, dtype=complex))
    # panels narrow enough for the fastest oscillation e^{i (z_cut + |z|) eta}
    width = 12.0 / (2.0 * np.max(np.abs(z)))
    eta, weta = _gauss_panels(a, b, width)
    taper = np.ones_like(eta)
    edge = (1 - taper_fraction) * xi_max
    outer = np.abs(eta) > edge
    taper[outer] = 0.5 * (1 + np.cos(np.pi * (np.abs(eta[outer]) - edge) / (xi_max - edge)))
    fhat = (np.exp(-1j * np.outer(eta, z)) @ (grid.weights * f.values)) / (2 * np.pi)
    vals = np.exp(1j * np.outer(z, eta + lam)) @ (weta * taper * fhat)
    return ComplexSamples(grid, vals if plus else -vals)


def modulated(f: ComplexSamples, x: float, side: str) -> ComplexSamples:
    """The pointwise-modulated function that projected_modulation projects."""
    lam = -2.0 * x if side in ("plus-at-plus-x", "minus-at-minus-x") else 2.0 * x
    return ComplexSamples(f.grid, f.values * np.exp(1j * lam * f.grid.nodes))


def cauchy_offaxis(h: ComplexSamples, z0: complex) -> complex:
    if np.imag(z0) == 0:
        raise ValueError("cauchy_offaxis needs Im z0 != 0; use plemelj_plus/plemelj_minus on the real axis")
    s = h.grid.nodes
    return np.sum(h.grid.weights * h.values / (s - z0)) / (2j * np.pi)
