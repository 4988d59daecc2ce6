"""Command-line front end: flist <subcommand> [--config PATH] [--threads N]."""
from __future__ import annotations

import os
import sys
import warnings

import click
import numpy as np

from . import files
from .config import RunConfig, dump_config, load_config
from .evolution import evolve, phase_resolution
from .forward import IntegrationAccuracyError, ResonanceError, forward_map
from .grids import ConfigurationError
from .profiles import from_config
from .reconstruction import invert_coefficients, reconstruct_solution
from .rh import ConditioningError, SolverError
from .validation import (ValidationReport, identity_suite, jost_asymptotics_suite, pde_residual,
                         plane_wave_snapshots, residual_report, roundtrip)

EXIT_OK, EXIT_INADMISSIBLE, EXIT_IO, EXIT_SOLVER = 0, 2, 3, 4
THREADS_ENV = "FLIST_THREADS"


class Abort(Exception):
    def __init__(self, code: int, message: str):
        super().__init__(message)
        self.code = code


def _config(path) -> RunConfig:
    if path is None:
        return RunConfig()
    try:
        return load_config(path)
    except OSError as exc:
        raise Abort(EXIT_IO, f"cannot read config: {exc}")
    except ConfigurationError as exc:
        raise Abort(EXIT_IO, f"config error: {exc}")


def _threads(value) -> int:
    if value is not None:
        return max(1, int(value))
    env = os.environ.get(THREADS_ENV, "")
    try:
        return max(1, int(env)) if env else 1
    except ValueError:
        raise Abort(EXIT_IO, f"{THREADS_ENV} must be an integer, got {env!r}")


def _profile(cfg: RunConfig):
    try:
        return from_config(cfg)
    except (OSError, files.SchemaError, ValueError) as exc:
        raise Abort(EXIT_IO, f"profile error: {exc}")


def _forward(cfg: RunConfig, threads: int):
    u0 = _profile(cfg)
    try:
        return u0, forward_map(u0, cfg.spectral_grid(), threads=threads)
    except ResonanceError as exc:
        raise Abort(EXIT_INADMISSIBLE, f"inadmissible data: {exc}")
    except IntegrationAccuracyError as exc:
        raise Abort(EXIT_SOLVER, f"forward integration failed: {exc}")


def _run(fn):
    """Map package errors to exit codes."""
    def wrapper(*args, **kwargs):
        try:
            code = fn(*args, **kwargs)
        except Abort as exc:
            click.echo(str(exc), err=True)
            sys.exit(exc.code)
        except files.SchemaError as exc:
            click.echo(f"schema error: {exc}", err=True)
            sys.exit(EXIT_IO)
        except (SolverError, ConditioningError) as exc:
            click.echo(f"solver failure: {exc}", err=True)
            sys.exit(EXIT_SOLVER)
        sys.exit(code or EXIT_OK)
    wrapper.__name__ = fn.__name__
    wrapper.__doc__ = fn.__doc__
    return wrapper


def _print_report(rep: ValidationReport, title: str) -> None:
    click.echo(f"[{title}]")
    for name, c in rep.checks.items():
        status = "PASS" if c.passed else "FAIL"
        extra = f" ({c.note})" if c.note else ""
        click.echo(f"  {status} {name}: value={c.value:.6g} threshold={c.threshold:.6g}{extra}")


def _alias_warning(grid, t: float, params) -> None:
    have, suggest = phase_resolution(grid, t, params)
    if have < 8:
        msg = (f"spectral grid under-resolves the low-z evolution phase at t={t:g}: "
               f"{have:.2f} nodes per period at the innermost node; use z_min_inner >= {suggest:.3g} "
               f"or more nodes")
        warnings.warn(msg, stacklevel=2)
        click.echo(f"warning: {msg}", err=True)


common = [
    click.option("--config", "config_path", type=click.Path(dir_okay=False), default=None,
                 help="key=value run configuration"),
    click.option("--threads", type=int, default=None, help=f"worker threads (default ${THREADS_ENV} or 1)"),
]


def with_common(f):
    for opt in reversed(common):
        f = opt(f)
    return f


@click.group()
def main():
    """Inverse scattering solver for the Fokas-Lenells equation on the line."""


@main.command()
@with_common
@click.option("--out", type=click.Path(dir_okay=False), default="scatter.csv", show_default=True)
@_run
def scatter(config_path, threads, out):
    """Forward map: profile -> scattering-data CSV with a metadata sidecar."""
    cfg = _config(config_path)
    u0, data = _forward(cfg, _threads(threads))
    files.write_scattering(out, data, cfg.params, extra={"t": 0.0})
    for k, v in data.report.items():
        click.echo(f"{k}={v}")
    click.echo(f"c={data.c:.17g}")
    return EXIT_OK if data.admissible else EXIT_INADMISSIBLE


@main.command()
@with_common
@click.argument("scattering_file", type=click.Path(dir_okay=False))
@click.option("--t", "t", type=float, required=True, help="time to evolve to")
@click.option("--out", type=click.Path(dir_okay=False), default="evolved.csv", show_default=True)
@_run
def evolve_cmd(config_path, threads, scattering_file, t, out):
    """Evolve reflection coefficients from a t=0 scattering file to time t."""
    _config(config_path)  # a bad --config still exits 3
    data, params, meta = _read_scattering(scattering_file)
    if float(meta.get("t", 0.0)) != 0.0:
        raise Abort(EXIT_IO, f"{scattering_file}: expected t=0 data, found t={meta['t']}")
    if t < 0:
        raise Abort(EXIT_IO, "t must be nonnegative")
    if not data.admissible:
        raise Abort(EXIT_INADMISSIBLE, "scattering data are flagged inadmissible")
    _alias_warning(data.grid, t, params)
    ev = evolve(data, t, params)
    files.write_scattering(out, data, params, extra={"t": float(t)}, r1=ev.r1_t, r2=ev.r2_t)
    for name, g in ev.growth.items():
        click.echo(f"growth.{name}: dz_norm={g['dz_norm']:.6g} bound={g['bound']:.6g} ok={int(g['ok'])}")
    return EXIT_OK


evolve_cmd.name = "evolve"


def _read_scattering(path):
    try:
        return files.read_scattering(path)
    except OSError as exc:
        raise Abort(EXIT_IO, f"cannot read {path}: {exc}")


@main.command()
@with_common
@click.argument("evolved_file", type=click.Path(dir_okay=False))
@click.option("--out", type=click.Path(dir_okay=False), default="field.csv", show_default=True)
@_run
def reconstruct(config_path, threads, evolved_file, out):
    """Inverse map: (evolved) scattering file -> field CSV."""
    cfg = _config(config_path)
    data, params, meta = _read_scattering(evolved_file)
    if not data.admissible:
        raise Abort(EXIT_INADMISSIBLE, "scattering data are flagged inadmissible")
    t = float(meta.get("t", 0.0))
    rec = invert_coefficients(data.r1, data.r2, cfg.real_grid(), t=t, params=params, x_switch=cfg.x_switch,
                              tol=cfg.krylov_tol, threads=_threads(threads), taper=cfg.taper,
                              solver_tol=cfg.solver_tol, edge_tol=cfg.edge_tol)
    res = rec.raw.frame_residual
    i = int(np.argmax(res))
    click.echo(f"residual.max={res[i]:.3e} at x={rec.raw.x[i]:.6g}")
    click.echo(f"residual.median={np.median(res):.3e}")
    click.echo(f"edge.max={np.max(rec.raw.edge):.3e}")
    click.echo(f"conditioned.count={int(np.sum(rec.raw.conditioned))}")
    click.echo(f"c={rec.c:.17g}")
    if t == 0.0:
        u0 = _profile(cfg)
        ref = max(np.max(np.abs(u0.values)), 1e-300)
        err = np.max(np.abs(rec.u.values - u0.values)) / ref
        click.echo(f"roundtrip.sup_error={err:.3e}")
    files.write_field(out, rec.u, {"t": t, "alpha": params.alpha, "beta": params.beta, "sigma": params.sigma,
                                   "c": rec.c, "solver_tol": cfg.solver_tol, "krylov_tol": cfg.krylov_tol,
                                   "x_switch": cfg.x_switch, "taper_z": rec.taper_z})
    return EXIT_OK


@main.command("roundtrip")
@with_common
@_run
def roundtrip_cmd(config_path, threads):
    """Forward then inverse map at t=0; exit 0 iff the round-trip checks pass."""
    cfg = _config(config_path)
    u0 = _profile(cfg)
    try:
        rep = roundtrip(u0, cfg.spectral_grid(), cfg.params, tol=cfg.roundtrip_tol, threads=_threads(threads),
                        x_switch=cfg.x_switch, solver_tol=cfg.solver_tol, edge_tol=cfg.edge_tol)
    except ResonanceError as exc:
        raise Abort(EXIT_INADMISSIBLE, f"inadmissible data: {exc}")
    rep.meta.pop("reconstruction", None)
    _print_report(rep, "roundtrip")
    return EXIT_OK if rep.passed else 1


@main.command()
@with_common
@click.option("--file", "data_file", type=click.Path(dir_okay=False), default=None,
              help="validate an existing scattering file instead of running the forward map")
@click.option("--report", type=click.Path(dir_okay=False), default=None, help="write check,value,threshold,pass CSV")
@_run
def validate(config_path, threads, data_file, report):
    """Identity suite on scattering data plus the Jost asymptotics suite; exit 0 iff all pass."""
    cfg = _config(config_path)
    rep = ValidationReport()
    if data_file is not None:
        data, _, _ = _read_scattering(data_file)
        rep.merge(identity_suite(data), "identity.")
    else:
        u0, data = _forward(cfg, _threads(threads))
        rep.merge(identity_suite(data), "identity.")
        rep.merge(jost_asymptotics_suite(u0, data.grid), "jost.")
    _print_report(rep, "validate")
    if report:
        files.write_report(report, rep)
    return EXIT_OK if rep.passed else 1


@main.command()
@with_common
@click.option("--t", "t", type=float, default=None, help="middle time (default: last configured time)")
@_run
def residual(config_path, threads, t):
    """PDE residual of reconstructed snapshots at t - dt, t, t + dt, plus the plane-wave check."""
    cfg = _config(config_path)
    t = cfg.times[-1] if t is None else t
    dt = cfg.residual_dt
    if t - dt < 0:
        raise Abort(EXIT_IO, f"t={t} must exceed residual_dt={dt}")
    u0, data = _forward(cfg, _threads(threads))
    _alias_warning(data.grid, t + dt, cfg.params)
    snaps = []
    for tt in (t - dt, t, t + dt):
        rec = reconstruct_solution(data, cfg.real_grid(), tt, cfg.params, x_switch=cfg.x_switch,
                                   tol=cfg.krylov_tol, threads=_threads(threads), taper=cfg.taper,
                                   solver_tol=cfg.solver_tol, edge_tol=cfg.edge_tol)
        snaps.append((tt, rec.u))
    rep = residual_report(snaps, cfg.params, cfg.residual_tol)
    pw = plane_wave_snapshots(cfg.real_grid(), cfg.params, dt=dt)
    rep.add("plane_wave_linear", pde_residual(pw, cfg.params, linear=True), cfg.residual_tol)
    _print_report(rep, "residual")
    return EXIT_OK if rep.passed else 1


@main.command()
@with_common
@click.option("--outdir", type=click.Path(file_okay=False), default="demo_out", show_default=True)
@_run
def demo(config_path, threads, outdir):
    """Full pipeline for every configured time; writes scattering, evolved and field files."""
    cfg = _config(config_path)
    nthreads = _threads(threads)
    os.makedirs(outdir, exist_ok=True)
    u0, data = _forward(cfg, nthreads)
    files.write_field(os.path.join(outdir, "u0.csv"), u0, {"t": 0.0})
    files.write_scattering(os.path.join(outdir, "scatter.csv"), data, cfg.params, extra={"t": 0.0})
    with open(os.path.join(outdir, "config.txt"), "w", encoding="ascii") as fh:
        fh.write(dump_config(cfg))
    for t in cfg.times:
        if t > 0:
            _alias_warning(data.grid, t, cfg.params)
        ev = evolve(data, t, cfg.params)
        files.write_scattering(os.path.join(outdir, f"evolved_t{t:g}.csv"), data, cfg.params,
                               extra={"t": float(t)}, r1=ev.r1_t, r2=ev.r2_t)
        rec = invert_coefficients(ev.r1_t, ev.r2_t, cfg.real_grid(), t=t, params=cfg.params,
                                  x_switch=cfg.x_switch, tol=cfg.krylov_tol, threads=nthreads, taper=cfg.taper,
                                  solver_tol=cfg.solver_tol, edge_tol=cfg.edge_tol)
        files.write_field(os.path.join(outdir, f"field_t{t:g}.csv"), rec.u, {"t": float(t), "c": rec.c})
        click.echo(f"t={t:g} max|u|={np.max(np.abs(rec.u.values)):.6g} "
                   f"residual.max={np.max(rec.raw.frame_residual):.3e}")
    return EXIT_OK


if __name__ == "__main__":
    main()
