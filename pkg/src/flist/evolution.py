"""Explicit time flow of the reflection coefficients."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .forward import PhysParams, ScatteringData
from .grids import ComplexSamples


def evolution_phase(z, t: float, params: PhysParams):
    """exp(2 i alpha (z - beta + beta^2 / (4 z)) t); unimodular for real z != 0.

    The sign makes the reconstructed field obey u_xt + alpha beta^2 u - 2i alpha beta u_x - ... = 0
    forward in t; the reconstruction pairs conj(r1) with e^{-2izx}.
    """
    z = np.asarray(z, dtype=float)
    if np.any(z == 0):
        raise ValueError("evolution phase is singular at z = 0")
    a, b = params.alpha, params.beta
    return np.exp(2j * a * (z - b + b * b / (4.0 * z)) * t)


@dataclass(frozen=True, eq=False)
class EvolvedData:
    base: ScatteringData
    t: float
    r1_t: ComplexSamples
    r2_t: ComplexSamples
    growth: dict


def _dz_norm(values: np.ndarray, z: np.ndarray) -> float:
    d = np.diff(values) / np.diff(z)
    return float(np.sqrt(np.sum(np.abs(d) ** 2 * np.diff(z))))


def l21_norm(r: ComplexSamples) -> float:
    z = r.grid.nodes
    return float(np.sqrt(np.sum(r.grid.weights * (1 + z**2) * np.abs(r.values) ** 2)))


def evolve(data: ScatteringData, t: float, params: PhysParams) -> EvolvedData:
    """Multiply r1, r2 by the evolution phase and record the dz-growth check.

    The z-derivative norm of r_j(t) may grow at most like
    ||d_z r_j|| + 2 alpha t ||r_j|| + alpha beta^2 t / 2 * ||z^-2 r_j||.
    """
    if t < 0:
        raise ValueError("t must be nonnegative")
    if not data.admissible:
        raise ValueError("scattering data are not admissible")
    z = data.grid.nodes
    w = data.grid.weights
    if t == 0:
        r1_t, r2_t = data.r1, data.r2
    else:
        ph = evolution_phase(z, t, params)
        r1_t = ComplexSamples(data.grid, data.r1.values * ph)
        r2_t = ComplexSamples(data.grid, data.r2.values * ph)
    growth = {}
    for name, r0, rt in (("r1", data.r1, r1_t), ("r2", data.r2, r2_t)):
        l2 = np.sqrt(np.sum(w * np.abs(r0.values) ** 2))
        inv = np.sqrt(np.sum(w * np.abs(r0.values / z**2) ** 2))
        bound = _dz_norm(r0.values, z) + 2 * params.alpha * t * l2 + 0.5 * params.alpha * params.beta**2 * t * inv
        got = _dz_norm(rt.values, z)
        growth[name] = {"dz_norm": got, "bound": float(bound), "ok": bool(got <= bound * (1 + 1e-9))}
    return EvolvedData(data, float(t), r1_t, r2_t, growth)


def phase_resolution(grid, t: float, params: PhysParams, nodes_per_period: int = 8):
    """Innermost-node resolution of the e^{i alpha beta^2 t / (2z)} oscillation.

    Returns (nodes_per_period_at_inner_ring, z_min_inner_suggestion).
    """
    z = np.abs(grid.nodes)
    zin = np.min(z)
    spacing = np.min(np.diff(np.sort(grid.nodes[grid.nodes > 0])))
    ab2t = params.alpha * params.beta**2 * t
    if ab2t == 0:
        return float("inf"), zin
    period = 4 * np.pi * zin**2 / ab2t
    have = period / spacing
    # z where the local period equals nodes_per_period * spacing
    z_ok = np.sqrt(nodes_per_period * spacing * ab2t / (4 * np.pi))
    return float(have), float(z_ok)
