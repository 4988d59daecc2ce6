"""Discrete norms of fields via trapezoidal quadrature."""
from __future__ import annotations

from dataclasses import dataclass, asdict

import numpy as np

from .grids import Field


def trapezoid(values: np.ndarray, h: float) -> float:
    return float(h * (np.sum(values) - 0.5 * (values[0] + values[-1])))


@dataclass(frozen=True)
class NormReport:
    u_l1: float
    u_l2: float
    u_l21: float
    ux_l2: float
    ux_l3: float
    uxx_l1: float
    h3_h21: float

    def as_dict(self) -> dict:
        return asdict(self)


def fd_derivatives(values: np.ndarray, h: float):
    """Fourth-order central first and second derivatives, second-order one-sided at the ends.

    No periodic extension: fields at t > 0 carry slowly decaying radiation that does not
    vanish at the grid ends.
    """
    v = values
    d1 = np.gradient(v, h, edge_order=2)
    d2 = np.gradient(d1, h, edge_order=2)
    d1[2:-2] = (v[:-4] - 8 * v[1:-3] + 8 * v[3:-1] - v[4:]) / (12 * h)
    d2[2:-2] = (-v[:-4] + 16 * v[1:-3] - 30 * v[2:-2] + 16 * v[3:-1] - v[4:]) / (12 * h * h)
    return d1, d2


def _derivative_stack(field: Field, derivative: str):
    if derivative == "spectral":
        return field.d1, field.d2, field.d3()
    if derivative == "fd":
        d1, d2 = fd_derivatives(field.values, field.grid.h)
        d3, _ = fd_derivatives(d2, field.grid.h)
        return d1, d2, d3
    raise ValueError(f"unknown derivative {derivative!r}")


def discrete_norms(field: Field, derivative: str = "spectral") -> NormReport:
    """Norms with periodic spectral derivatives, or finite differences for fields that do not decay."""
    h = field.grid.h
    x = field.grid.nodes
    jap2 = 1.0 + x**2  # <x>^2
    d1, d2, d3 = _derivative_stack(field, derivative)
    u, ux, uxx, uxxx = np.abs(field.values), np.abs(d1), np.abs(d2), np.abs(d3)
    h3_sq = sum(trapezoid(a**2, h) for a in (u, ux, uxx, uxxx))
    h21_sq = sum(trapezoid(jap2 * a**2, h) for a in (u, ux, uxx))
    return NormReport(
        u_l1=trapezoid(u, h),
        u_l2=np.sqrt(trapezoid(u**2, h)),
        u_l21=np.sqrt(trapezoid(jap2 * u**2, h)),
        ux_l2=np.sqrt(trapezoid(ux**2, h)),
        ux_l3=trapezoid(ux**3, h) ** (1.0 / 3.0),
        uxx_l1=trapezoid(uxx, h),
        h3_h21=float(np.sqrt(h3_sq + h21_sq)),
    )


def sobolev_distance(a: Field, b: Field, derivative: str = "spectral") -> float:
    """Discrete H^3 ∩ H^{2,1} norm of a - b."""
    diff = Field(a.grid, a.values - b.values, a.d1 - b.d1, a.d2 - b.d2)
    return discrete_norms(diff, derivative).h3_h21
