"""Recover the field from RH solutions.

Two Cauchy-type moments of the RH columns give
    u_hat = u e^{i c_+},    g = e^{-i c_+} d/dx( conj(u_x) e^{-i c_+} ),
with c_+(x) = -1/2 int_x^inf |u_x|^2.  The phases are then removed by integrating
    w' = g e^{i phi},  phi' = |w|^2 / 2,  w = conj(u_x) e^{-i c_+},  phi = c_+
leftward from the right edge, where both vanish.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .evolution import evolve
from .forward import PhysParams, ScatteringData
from .grids import ComplexSamples, Field, RealGrid
from .rh import CONSISTENCY_TOL, DeltaData, SolverError, delta_build, resolved_x, solve_batch


@dataclass(frozen=True, eq=False)
class ReconstructionRaw:
    x: np.ndarray
    u_hat: np.ndarray
    g: np.ndarray
    residual: np.ndarray
    frame_residual: np.ndarray
    edge: np.ndarray
    conditioned: np.ndarray


@dataclass(frozen=True, eq=False)
class PhaseState:
    x: np.ndarray
    w: np.ndarray
    phi: np.ndarray

    @property
    def c(self) -> float:
        return float(-self.phi[0])


@dataclass(frozen=True, eq=False)
class Reconstruction:
    u: Field
    c: float
    raw: ReconstructionRaw
    phases: PhaseState
    t: float
    taper_z: float


def reconstruct_u_hat(r1: ComplexSamples, xs, m11: np.ndarray, conditioned=None,
                      delta: DeltaData | None = None) -> np.ndarray:
    """u_hat(x) = (1/pi) int z^-1 conj(r1) e^{-2izx} M_{-,11} dz.

    Conditioned rows carry M_{delta,+,11} and use conj(r_delta1) with the factor conj(delta(0)).
    """
    g = r1.grid
    z, w = g.nodes, g.weights
    xs = np.asarray(xs, dtype=float)
    cond = np.zeros(len(xs), bool) if conditioned is None else np.asarray(conditioned)
    kern = (w * np.conj(r1.values) / z)[None, :] * np.exp(-2j * np.outer(xs, z))
    out = np.empty(len(xs), dtype=complex)
    plain = ~cond
    out[plain] = np.sum(kern[plain] * m11[plain], axis=1) / np.pi
    if np.any(cond):
        prod = delta.delta_plus.values * delta.delta_minus.values
        out[cond] = np.conj(delta.delta_zero) * np.sum(kern[cond] * prod * m11[cond], axis=1) / np.pi
    return out


def reconstruct_g(r2: ComplexSamples, xs, m22: np.ndarray, conditioned=None,
                  delta: DeltaData | None = None) -> np.ndarray:
    """g(x) = -(1/pi) int r2 e^{2izx} M_{+,22} dz; conditioned rows use r_delta2 and M_{delta,-,22}."""
    gr = r2.grid
    z, w = gr.nodes, gr.weights
    xs = np.asarray(xs, dtype=float)
    cond = np.zeros(len(xs), bool) if conditioned is None else np.asarray(conditioned)
    kern = (w * r2.values)[None, :] * np.exp(2j * np.outer(xs, z))
    out = np.empty(len(xs), dtype=complex)
    plain = ~cond
    out[plain] = -np.sum(kern[plain] * m22[plain], axis=1) / np.pi
    if np.any(cond):
        prod = np.conj(delta.delta_plus.values * delta.delta_minus.values)
        out[cond] = -np.sum(kern[cond] * prod * m22[cond], axis=1) / np.pi
    return out


def _midpoints(values: np.ndarray) -> np.ndarray:
    """Cubic Lagrange values at the n-1 cell midpoints of a uniform grid."""
    v = values
    mid = np.empty(len(v) - 1, dtype=v.dtype)
    mid[1:-1] = (-v[:-3] + 9 * v[1:-2] + 9 * v[2:-1] - v[3:]) / 16
    mid[0] = (5 * v[0] + 15 * v[1] - 5 * v[2] + v[3]) / 16
    mid[-1] = (5 * v[-1] + 15 * v[-2] - 5 * v[-3] + v[-4]) / 16
    return mid


def untangle_phases(x: np.ndarray, g: np.ndarray) -> PhaseState:
    """RK4 for (w, phi) from x_max down to x_min with zero data at x_max."""
    n = len(x)
    h = x[1] - x[0]
    gm = _midpoints(g)
    w = np.zeros(n, dtype=complex)
    phi = np.zeros(n)

    def rhs(gv, wv, pv):
        return gv * np.exp(1j * pv), 0.5 * abs(wv) ** 2

    for j in range(n - 1, 0, -1):
        s = -h
        w0, p0 = w[j], phi[j]
        k1w, k1p = rhs(g[j], w0, p0)
        k2w, k2p = rhs(gm[j - 1], w0 + 0.5 * s * k1w, p0 + 0.5 * s * k1p)
        k3w, k3p = rhs(gm[j - 1], w0 + 0.5 * s * k2w, p0 + 0.5 * s * k2p)
        k4w, k4p = rhs(g[j - 1], w0 + s * k3w, p0 + s * k3p)
        w[j - 1] = w0 + s * (k1w + 2 * k2w + 2 * k3w + k4w) / 6
        phi[j - 1] = p0 + s * (k1p + 2 * k2p + 2 * k3p + k4p) / 6
    return PhaseState(np.asarray(x), w, phi)


def _smooth_step(s: np.ndarray) -> np.ndarray:
    """C-infinity step from 0 (s <= 0) to 1 (s >= 1)."""
    s = np.clip(s, 0.0, 1.0)
    with np.errstate(divide="ignore"):
        a = np.where(s > 0, np.exp(-1.0 / np.where(s > 0, s, 1.0)), 0.0)
        b = np.where(s < 1, np.exp(-1.0 / np.where(s < 1, 1.0 - s, 1.0)), 0.0)
    return a / (a + b)


def low_z_taper(grid, t: float, params: PhysParams, nodes_per_period: float = 8.0):
    """Smooth cutoff removing the part of |z| where e^{i alpha beta^2 t/(2z)} is under-resolved.

    Returns (factor, z_res); factor is 0 for |z| <= z_res / 4 and 1 for |z| >= z_res.
    The step is C-infinity: the Cauchy quadrature loses its spectral accuracy on kinks.
    """
    z = grid.nodes
    ab2t = params.alpha * params.beta**2 * t
    if ab2t == 0:
        return np.ones_like(z), 0.0
    # local phase increment per node: ab2t / (2 z^2) * dz
    dphase = ab2t / (2 * z**2) * grid.weights
    bad = dphase > 2 * np.pi / nodes_per_period
    if not np.any(bad):
        return np.ones_like(z), 0.0
    z_res = float(np.max(np.abs(z[bad])))
    return _smooth_step((np.abs(z) - 0.25 * z_res) / (0.75 * z_res)), z_res


def invert_coefficients(r1: ComplexSamples, r2: ComplexSamples, xgrid: RealGrid, t: float = 0.0,
                        params: PhysParams = PhysParams(), x_switch: float = 0.0, tol: float = 1e-12,
                        threads: int = 1, taper: bool = True, solver_tol: float = 1e-6,
                        edge_tol: float = 1e-2, consistency_tol: float = CONSISTENCY_TOL) -> Reconstruction:
    """Reflection coefficients already evolved to time t -> field on xgrid.

    ``tol`` is the Krylov stopping tolerance and ``solver_tol`` bounds the residual of the
    equations solved at each x.  Inside the window where the z-grid resolves e^{2izx},
    conditioned solves must also meet the original jump to ``consistency_tol``.
    t only sets the low-z taper.
    """
    grid = r1.grid
    z_res = 0.0
    if taper and t > 0:
        fac, z_res = low_z_taper(grid, t, params)
        r1 = ComplexSamples(grid, r1.values * fac)
        r2 = ComplexSamples(grid, r2.values * fac)
    x = xgrid.nodes
    if not np.any(r1.values) and not np.any(r2.values):
        zero = np.zeros(len(x), dtype=complex)
        raw = ReconstructionRaw(x, zero, zero, np.zeros(len(x)), np.zeros(len(x)), np.zeros(len(x)),
                                x < x_switch)
        return Reconstruction(Field.zeros(xgrid), 0.0, raw, PhaseState(x, zero, np.zeros(len(x))), float(t), z_res)
    delta = delta_build(r1, r2) if np.any(x < x_switch) else None
    batch = solve_batch(r1, r2, x, x_switch=x_switch, tol=tol, threads=threads, delta=delta)
    uh = reconstruct_u_hat(r1, x, batch.m11, batch.conditioned, delta)
    gv = reconstruct_g(r2, x, batch.m22, batch.conditioned, delta)
    inside = np.abs(x) <= resolved_x(grid)
    bad = ((batch.frame_residual > solver_tol) | (inside & (batch.residual > max(solver_tol, consistency_tol)))
           | (batch.edge > edge_tol))
    if np.any(bad):
        i = int(np.argmax(np.where(bad, np.maximum(batch.frame_residual, batch.edge), -1)))
        raise SolverError(f"RH solve failed at x = {x[i]:.6g}: residual {batch.frame_residual[i]:.3e}, "
                          f"original-jump residual {batch.residual[i]:.3e}, edge deviation {batch.edge[i]:.3e}")
    raw = ReconstructionRaw(x, uh, gv, batch.residual, batch.frame_residual, batch.edge, batch.conditioned)
    ph = untangle_phases(x, gv)
    u = Field.from_values(xgrid, uh * np.exp(-1j * ph.phi), boundary_tol=np.inf)
    return Reconstruction(u, ph.c, raw, ph, float(t), z_res)


def reconstruct_solution(data: ScatteringData, xgrid: RealGrid, t: float = 0.0,
                         params: PhysParams = PhysParams(), **kwargs) -> Reconstruction:
    """Evolve the scattering data to time t, then invert; keyword options as in invert_coefficients."""
    ev = evolve(data, t, params)
    return invert_coefficients(ev.r1_t, ev.r2_t, xgrid, t=t, params=params, **kwargs)
