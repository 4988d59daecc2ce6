"""Initial profiles u0 on a real grid."""
from __future__ import annotations

import numpy as np

from .grids import Field, RealGrid


def gaussian(grid: RealGrid, amplitude: float = 0.25, width: float = 1.0, center: float = 0.0) -> Field:
    x = (grid.nodes - center) / width
    return Field.from_values(grid, amplitude * np.exp(-x**2))


def sech(grid: RealGrid, amplitude: float = 0.25, width: float = 1.0, center: float = 0.0) -> Field:
    x = (grid.nodes - center) / width
    return Field.from_values(grid, amplitude / np.cosh(x))


def from_config(cfg) -> Field:
    """Profile described by a RunConfig; from-file reads a field CSV."""
    if cfg.profile == "from-file":
        from .files import read_field
        f = read_field(cfg.path)
        if f.grid != cfg.real_grid():
            raise ValueError(f"{cfg.path}: grid differs from the configured x-grid")
        return f
    maker = {"gaussian": gaussian, "sech": sech}[cfg.profile]
    return maker(cfg.real_grid(), cfg.amplitude, cfg.width, cfg.center)
