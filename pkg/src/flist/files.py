"""CSV persistence with key=value metadata sidecars.

Floats are written with 17 significant digits so that a write/read cycle is bit-exact.
"""
from __future__ import annotations

import os

import numpy as np

from .forward import PhysParams, ScatteringData
from .grids import ComplexSamples, Field, RealGrid, SpectralGrid

FIELD_HEADER = "x,re_u,im_u"
SPECTRAL_HEADER = "z,re,im"
SCATTERING_HEADER = "z,re_a,im_a,re_kb,im_kb,re_r1,im_r1,re_r2,im_r2"
RH_HEADER = "z,re_m11,im_m11,re_m21,im_m21,re_m12,im_m12,re_m22,im_m22"
REPORT_HEADER = "check,value,threshold,pass"


class SchemaError(ValueError):
    """File does not follow the expected layout."""


def _fmt(v: float) -> str:
    return format(float(v), ".17g")


def _write_table(path, header: str, columns) -> None:
    cols = [np.asarray(c, dtype=float) for c in columns]
    with open(path, "w", encoding="ascii", newline="\n") as fh:
        fh.write(header + "\n")
        for row in zip(*cols):
            fh.write(",".join(_fmt(v) for v in row) + "\n")


def _read_table(path, header: str) -> np.ndarray:
    try:
        with open(path, encoding="ascii") as fh:
            first = fh.readline().strip()
            if first != header:
                raise SchemaError(f"{path}: expected header {header!r}, found {first!r}")
            rows = []
            ncol = header.count(",") + 1
            for lineno, line in enumerate(fh, start=2):
                line = line.strip()
                if not line:
                    continue
                parts = line.split(",")
                if len(parts) != ncol:
                    raise SchemaError(f"{path}:{lineno}: expected {ncol} columns, found {len(parts)}")
                try:
                    rows.append([float(p) for p in parts])
                except ValueError as exc:
                    raise SchemaError(f"{path}:{lineno}: {exc}") from None
    except UnicodeDecodeError as exc:
        raise SchemaError(f"{path}: not a text file ({exc})") from None
    if not rows:
        raise SchemaError(f"{path}: no data rows")
    table = np.array(rows)
    if not np.all(np.isfinite(table)):
        raise SchemaError(f"{path}: non-finite entries")
    return table


def sidecar_path(path) -> str:
    return os.fspath(path) + ".meta"


def write_meta(path, meta: dict) -> None:
    with open(sidecar_path(path), "w", encoding="ascii", newline="\n") as fh:
        for k in sorted(meta):
            v = meta[k]
            fh.write(f"{k}={_fmt(v) if isinstance(v, float) else v}\n")


def read_meta(path) -> dict:
    p = sidecar_path(path)
    if not os.path.exists(p):
        raise SchemaError(f"missing metadata sidecar {p}")
    meta = {}
    with open(p, encoding="ascii") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            if "=" not in line:
                raise SchemaError(f"{p}:{lineno}: expected key=value")
            k, v = line.split("=", 1)
            meta[k.strip()] = v.strip()
    return meta


def _meta_float(meta: dict, key: str, path) -> float:
    try:
        return float(meta[key])
    except KeyError:
        raise SchemaError(f"{sidecar_path(path)}: missing key {key!r}") from None
    except ValueError:
        raise SchemaError(f"{sidecar_path(path)}: key {key!r} is not a number") from None


# ---------------------------------------------------------------- fields

def write_field(path, field: Field, meta: dict | None = None) -> None:
    v = field.values
    _write_table(path, FIELD_HEADER, (field.grid.nodes, v.real, v.imag))
    if meta is not None:
        write_meta(path, meta)


def read_field(path, boundary_tol: float = 1e-10) -> Field:
    t = _read_table(path, FIELD_HEADER)
    x = t[:, 0]
    n = len(x)
    try:
        grid = RealGrid(float(x[0]), float(x[-1]), n)
    except ValueError as exc:
        raise SchemaError(f"{path}: {exc}") from None
    if np.max(np.abs(grid.nodes - x)) > 1e-9 * max(1.0, np.max(np.abs(x))):
        raise SchemaError(f"{path}: x nodes are not uniformly spaced")
    return Field.from_values(grid, t[:, 1] + 1j * t[:, 2], boundary_tol=boundary_tol)


def write_spectral(path, samples: ComplexSamples) -> None:
    _write_table(path, SPECTRAL_HEADER, (samples.grid.nodes, samples.values.real, samples.values.imag))


def read_spectral_table(path) -> tuple:
    t = _read_table(path, SPECTRAL_HEADER)
    return t[:, 0], t[:, 1] + 1j * t[:, 2]


# ---------------------------------------------------------------- scattering data

def grid_meta(grid: SpectralGrid) -> dict:
    return {"z_cut": float(grid.z_cut), "n_z": int(grid.n), "refinement_radius": float(grid.refinement_radius),
            "z_min_inner": float(grid.z_min_inner)}


def write_scattering(path, data: ScatteringData, params: PhysParams, extra: dict | None = None,
                     r1=None, r2=None) -> None:
    """Write a, kb and the reflection coefficients; r1/r2 override the stored ones (evolved files)."""
    r1v = data.r1.values if r1 is None else r1.values
    r2v = data.r2.values if r2 is None else r2.values
    a, kb = data.a.values, data.kb.values
    _write_table(path, SCATTERING_HEADER,
                 (data.grid.nodes, a.real, a.imag, kb.real, kb.imag, r1v.real, r1v.imag, r2v.real, r2v.imag))
    meta = {"alpha": float(params.alpha), "beta": float(params.beta), "sigma": int(params.sigma),
            "c": float(data.c), "admissible": int(bool(data.admissible)), "min_abs_a": float(data.min_abs_a)}
    meta.update(grid_meta(data.grid))
    for k, v in (data.report or {}).items():
        meta[f"report.{k}"] = float(v) if isinstance(v, (float, np.floating)) else int(v)
    if extra:
        meta.update(extra)
    write_meta(path, meta)


def read_scattering(path):
    """Returns (ScatteringData, PhysParams, meta).  The r columns are whatever was written."""
    t = _read_table(path, SCATTERING_HEADER)
    meta = read_meta(path)
    try:
        grid = SpectralGrid.build(z_cut=_meta_float(meta, "z_cut", path), n=int(_meta_float(meta, "n_z", path)),
                                  refinement_radius=_meta_float(meta, "refinement_radius", path),
                                  z_min_inner=_meta_float(meta, "z_min_inner", path))
    except ValueError as exc:
        raise SchemaError(f"{path}: {exc}") from None
    z = t[:, 0]
    if len(z) != grid.n or np.max(np.abs(z - grid.nodes)) > 1e-12 * grid.z_cut:
        raise SchemaError(f"{path}: z column does not match the grid described by the sidecar")
    params = PhysParams(_meta_float(meta, "alpha", path), _meta_float(meta, "beta", path),
                        int(_meta_float(meta, "sigma", path)))
    cs = lambda re, im: ComplexSamples(grid, t[:, re] + 1j * t[:, im])
    data = ScatteringData(grid, cs(1, 2), cs(3, 4), cs(5, 6), cs(7, 8), _meta_float(meta, "c", path),
                          bool(int(_meta_float(meta, "admissible", path))),
                          _meta_float(meta, "min_abs_a", path),
                          {k[7:]: float(v) for k, v in meta.items() if k.startswith("report.")})
    return data, params, meta


# ---------------------------------------------------------------- RH dumps and reports

def write_rh_solution(path, sol) -> None:
    m11, m21 = (c.values for c in sol.m_minus_col1)
    m12, m22 = (c.values for c in sol.m_plus_col2)
    z = sol.m_minus_col1[0].grid.nodes
    cols = [z]
    for v in (m11, m21, m12, m22):
        cols += [v.real, v.imag]
    _write_table(path, RH_HEADER, cols)
    write_meta(path, {"x": float(sol.x), "residual": float(sol.residual), "conditioned": int(sol.conditioned)})


def read_rh_table(path) -> np.ndarray:
    return _read_table(path, RH_HEADER)


def write_report(path, report) -> None:
    with open(path, "w", encoding="ascii", newline="\n") as fh:
        fh.write(REPORT_HEADER + "\n")
        for name, chk in report.checks.items():
            fh.write(f"{name},{_fmt(chk.value)},{_fmt(chk.threshold)},{int(chk.passed)}\n")


def read_report(path) -> dict:
    out = {}
    with open(path, encoding="ascii") as fh:
        if fh.readline().strip() != REPORT_HEADER:
            raise SchemaError(f"{path}: not a report file")
        for line in fh:
            if line.strip():
                name, v, th, ok = line.strip().split(",")
                out[name] = (float(v), float(th), bool(int(ok)))
    return out
