"""Grids and sample containers shared by every stage of the solver."""
from __future__ import annotations

import warnings
from dataclasses import dataclass, field as dc_field
from functools import cached_property

import numpy as np

BOUNDARY_TOL = 1e-10


class ConfigurationError(ValueError):
    """Raised for grid or parameter choices the numerics cannot honour."""


def is_power_of_two(n: int) -> bool:
    return n > 0 and (n & (n - 1)) == 0


@dataclass(frozen=True)
class RealGrid:
    """Uniform x-grid with both end points included."""

    x_min: float
    x_max: float
    n: int

    def __post_init__(self):
        if not self.x_max > self.x_min:
            raise ConfigurationError(f"x_max ({self.x_max}) must exceed x_min ({self.x_min})")
        if not is_power_of_two(int(self.n)) or self.n < 4:
            raise ConfigurationError(f"grid size must be a power of two >= 4, got {self.n}")

    @property
    def h(self) -> float:
        return (self.x_max - self.x_min) / (self.n - 1)

    @cached_property
    def nodes(self) -> np.ndarray:
        return np.linspace(self.x_min, self.x_max, self.n)

    @cached_property
    def wavenumbers(self) -> np.ndarray:
        # periodic extension with period n*h (x_max + h is identified with x_min)
        return 2 * np.pi * np.fft.fftfreq(self.n, d=self.h)

    def index_of(self, x: float) -> int:
        """Index of the node closest to ``x``."""
        return int(np.argmin(np.abs(self.nodes - x)))


def spectral_derivative(values: np.ndarray, grid: RealGrid, order: int = 1) -> np.ndarray:
    k = grid.wavenumbers
    vhat = np.fft.fft(values)
    mult = (1j * k) ** order
    if grid.n % 2 == 0 and order % 2 == 1:
        mult[grid.n // 2] = 0.0  # Nyquist mode has no well-defined odd derivative
    return np.fft.ifft(mult * vhat)


def half_step_shift(values: np.ndarray, grid: RealGrid) -> np.ndarray:
    """Band-limited interpolation of periodic samples to the midpoints x_j + h/2."""
    k = grid.wavenumbers.copy()
    vhat = np.fft.fft(values)
    shift = np.exp(0.5j * k * grid.h)
    shift[grid.n // 2] = np.cos(0.5 * k[grid.n // 2] * grid.h)
    return np.fft.ifft(shift * vhat)


@dataclass(frozen=True, eq=False)
class Field:
    """Samples of u, u_x and u_xx on a RealGrid."""

    grid: RealGrid
    values: np.ndarray
    d1: np.ndarray
    d2: np.ndarray

    def __post_init__(self):
        for name in ("values", "d1", "d2"):
            arr = np.asarray(getattr(self, name), dtype=complex)
            if arr.shape != (self.grid.n,):
                raise ConfigurationError(f"{name} has shape {arr.shape}, expected ({self.grid.n},)")
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)

    @classmethod
    def from_values(cls, grid: RealGrid, values, boundary_tol: float = BOUNDARY_TOL) -> "Field":
        values = np.asarray(values, dtype=complex)
        f = cls(grid, values, spectral_derivative(values, grid, 1), spectral_derivative(values, grid, 2))
        f.check_decay(boundary_tol)
        return f

    @classmethod
    def zeros(cls, grid: RealGrid) -> "Field":
        z = np.zeros(grid.n, dtype=complex)
        return cls(grid, z, z, z)

    def check_decay(self, boundary_tol: float = BOUNDARY_TOL) -> bool:
        edge = max(abs(self.values[0]), abs(self.values[-1]))
        if edge > boundary_tol:
            warnings.warn(
                f"field does not decay at the grid ends (|u| = {edge:.3e} > {boundary_tol:.1e}); "
                "truncation effects are expected",
                stacklevel=3,
            )
            return False
        return True

    def scaled(self, factor: complex) -> "Field":
        return Field(self.grid, factor * self.values, factor * self.d1, factor * self.d2)

    def d3(self) -> np.ndarray:
        return spectral_derivative(self.values, self.grid, 3)

    def midpoints(self):
        """(u, u_x, u_xx) interpolated to x_j + h/2, j = 0..n-2."""
        return tuple(half_step_shift(a, self.grid)[:-1] for a in (self.values, self.d1, self.d2))


@dataclass(frozen=True, eq=False)
class SpectralGrid:
    """Symmetric z-grid excluding the origin, refined near z = 0.

    Nodes are the image of a staggered uniform grid s_j = (j + 1/2 - n/2) ds under
    the odd map z = s - (1 - eps) * rho * tanh(s / rho).  Far from the origin the
    spacing equals ds; inside |z| ~ rho it shrinks to eps * ds.  Weights are the
    trapezoid weights in s, which are spectrally accurate for smooth decaying
    integrands.
    """

    nodes: np.ndarray
    weights: np.ndarray
    refinement_radius: float
    z_cut: float
    ds: float = 0.0
    eps: float = 1.0
    z_min_inner: float = dc_field(default=float("nan"))

    def __post_init__(self):
        for name in ("nodes", "weights"):
            arr = np.array(getattr(self, name), dtype=float)
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)
        if np.any(self.nodes == 0.0):
            raise ConfigurationError("z = 0 must not be a spectral node")
        if np.any(self.weights <= 0):
            raise ConfigurationError("spectral weights must be positive")

    @classmethod
    def build(cls, z_cut: float = 64.0, n: int = 1024, refinement_radius: float = 2.0,
              z_min_inner: float = 5e-3) -> "SpectralGrid":
        if not is_power_of_two(int(n)) or n < 8:
            raise ConfigurationError(f"spectral grid size must be a power of two >= 8, got {n}")
        rho = float(refinement_radius)
        half = z_cut + rho
        for _ in range(200):
            ds = 2 * half / n
            eps = 2 * z_min_inner / ds
            if not 0 < eps <= 1:
                raise ConfigurationError(
                    f"z_min_inner={z_min_inner} is incompatible with spacing {ds:.3e}; need 0 < 2*z_min_inner/ds <= 1")
            new = z_cut + (1 - eps) * rho * np.tanh(half / rho)
            if abs(new - half) < 1e-15 * half:
                break
            half = new
        ds = 2 * half / n
        eps = 2 * z_min_inner / ds
        # the map's transition scale sqrt(3 eps) * rho must span several s-steps
        if rho > 0 and eps < 1 and np.sqrt(3 * eps) * rho < 3 * ds:
            raise ConfigurationError(
                f"refinement too sharp for n={n}: raise z_min_inner or refinement_radius")
        s = (np.arange(n) - n / 2 + 0.5) * ds
        if rho > 0:
            z = s - (1 - eps) * rho * np.tanh(s / rho)
            w = (1 - (1 - eps) / np.cosh(s / rho) ** 2) * ds
        else:
            z, w = s, np.full(n, ds)
        return cls(z, w, rho, float(z_cut), ds, eps, float(z_min_inner))

    @property
    def n(self) -> int:
        return len(self.nodes)

    @property
    def params(self) -> dict:
        return {"z_cut": self.z_cut, "n_z": self.n, "z_ref": self.refinement_radius,
                "z_min_inner": self.z_min_inner}

    def integrate(self, values) -> complex:
        return np.sum(self.weights * values)

    def key(self) -> tuple:
        return (self.n, float(self.nodes[0]), float(self.nodes[-1]), float(self.ds), float(self.eps),
                self.refinement_radius)


@dataclass(frozen=True, eq=False)
class ComplexSamples:
    grid: SpectralGrid
    values: np.ndarray

    def __post_init__(self):
        arr = np.array(self.values, dtype=complex)
        if arr.shape != (self.grid.n,):
            raise ConfigurationError(f"samples have shape {arr.shape}, expected ({self.grid.n},)")
        if not np.all(np.isfinite(arr)):
            raise ValueError("non-finite spectral samples")
        arr.setflags(write=False)
        object.__setattr__(self, "values", arr)

    @property
    def z(self) -> np.ndarray:
        return self.grid.nodes

    def __mul__(self, other):
        other = other.values if isinstance(other, ComplexSamples) else other
        return ComplexSamples(self.grid, self.values * other)

    __rmul__ = __mul__
