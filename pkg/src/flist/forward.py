"""Forward map: transformed Zakharov-Shabat problem, Jost functions and scattering data."""
from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field as dc_field

import numpy as np

from .cauchy import cauchy_offaxis
from .grids import ComplexSamples, Field, SpectralGrid
from .norms import discrete_norms, trapezoid

SIGMA3 = np.diag([1.0, -1.0]).astype(complex)
A_FLOOR = 1e-8
MAX_ZH = 3.0


class IntegrationAccuracyError(RuntimeError):
    pass


class ResonanceError(RuntimeError):
    pass


@dataclass(frozen=True)
class PhysParams:
    alpha: float = 1.0
    beta: float = 1.0
    sigma: int = -1

    def __post_init__(self):
        if not (self.alpha > 0 and self.beta > 0):
            raise ValueError("alpha and beta must be positive")
        if self.sigma not in (1, -1):
            raise ValueError("sigma must be +1 or -1")


def potential_entries(u, ux, uxx) -> np.ndarray:
    q = np.abs(ux) ** 2
    out = np.empty(np.shape(u) + (2, 2), dtype=complex)
    out[..., 0, 0] = q / 2j
    out[..., 0, 1] = ux / 2j
    out[..., 1, 0] = (-2j * np.conj(uxx) - np.conj(ux) * q) / 2j
    out[..., 1, 1] = -q / 2j
    return out


def build_potential_matrix(u: Field) -> np.ndarray:
    """Coefficient matrix of the transformed spectral problem, shape (n, 2, 2)."""
    return potential_entries(u.values, u.d1, u.d2)


def _expm_traceless(omega: np.ndarray) -> np.ndarray:
    """exp of a batch of traceless 2x2 matrices: cosh(mu) I + sinh(mu)/mu * Omega."""
    mu = np.sqrt(omega[..., 0, 0] ** 2 + omega[..., 0, 1] * omega[..., 1, 0])
    small = np.abs(mu) < 1e-6
    safe = np.where(small, 1.0, mu)
    sinhc = np.where(small, 1.0 + mu**2 / 6.0, np.sinh(safe) / safe)
    out = sinhc[..., None, None] * omega
    ch = np.cosh(mu)
    out[..., 0, 0] += ch
    out[..., 1, 1] += ch
    return out


def _check_step(z: np.ndarray, h: float, max_zh: float):
    zh = np.max(np.abs(z)) * h if np.size(z) else 0.0
    if zh > max_zh:
        raise IntegrationAccuracyError(
            f"|z|*h = {zh:.3g} exceeds {max_zh}; refine the x-grid (n_x) or lower z_cut")


def _sweep(u: Field, z: np.ndarray, side: str, record=(), keep_all: bool = False, max_zh: float = MAX_ZH):
    """Integrate the Jost solution for all z simultaneously.

    The fundamental matrix phi of phi_x = (-i z sigma3 + Q) phi is advanced by a
    fourth-order Magnus step built from Q at both ends and at the midpoint of each
    cell; the constant -i z sigma3 part is exponentiated exactly, so the oscillation
    costs no accuracy.  Psi = phi e^{i z x sigma3}.
    """
    if side not in ("minus", "plus"):
        raise ValueError("side must be 'minus' or 'plus'")
    z = np.atleast_1d(np.asarray(z, dtype=float))
    grid = u.grid
    h = grid.h
    _check_step(z, h, max_zh)
    x = grid.nodes
    q_nodes = build_potential_matrix(u)
    q_mid = potential_entries(*u.midpoints())
    iz = (-1j * z)[:, None, None] * SIGMA3
    n = grid.n
    start, step = (0, 1) if side == "minus" else (n - 1, -1)
    hs = h * step
    e0 = np.exp(-1j * z * x[start])
    phi = np.zeros((len(z), 2, 2), dtype=complex)
    phi[:, 0, 0] = e0
    phi[:, 1, 1] = 1.0 / e0
    record = set(int(i) for i in record)
    snaps = {}
    traj = np.empty((n, len(z), 2, 2), dtype=complex) if keep_all else None
    ident = np.broadcast_to(np.eye(2, dtype=complex), (len(z), 2, 2))
    if start in record:
        snaps[start] = ident.copy()
    if keep_all:
        traj[start] = ident
    det_dev = 0.0
    i = start
    for _ in range(n - 1):
        j = i + step
        a0 = q_nodes[i] + iz
        a1 = q_nodes[j] + iz
        am = q_mid[min(i, j)] + iz
        da = a1 - a0
        omega = (hs / 6.0) * (a0 + 4.0 * am + a1) + (hs * hs / 12.0) * (da @ am - am @ da)
        phi = _expm_traceless(omega) @ phi
        if keep_all or j in record or j == start + step * (n - 1):
            e = np.exp(1j * z * x[j])
            psi = phi.copy()
            psi[:, :, 0] *= e[:, None]
            psi[:, :, 1] /= e[:, None]
            if j in record:
                snaps[j] = psi
            if keep_all:
                traj[j] = psi
        if (j % 16 == 0) or j == start + step * (n - 1):
            d = phi[:, 0, 0] * phi[:, 1, 1] - phi[:, 0, 1] * phi[:, 1, 0]
            det_dev = max(det_dev, float(np.max(np.abs(d - 1.0))))
        i = j
    return snaps, traj, det_dev


@dataclass(frozen=True, eq=False)
class JostSolution:
    """Jost matrices on every x-node for one or more spectral values."""

    z: np.ndarray
    psi_minus: np.ndarray | None
    psi_plus: np.ndarray | None
    det_deviation: float = 0.0


def solve_jost(u: Field, z, side: str, max_zh: float = MAX_ZH) -> JostSolution:
    """Psi^- (side='minus', Psi(x_min) = I) or Psi^+ (side='plus', Psi(x_max) = I).

    Returned arrays have shape (n_x, n_z, 2, 2).
    """
    z = np.atleast_1d(np.asarray(z, dtype=float))
    _, traj, dev = _sweep(u, z, side, keep_all=True, max_zh=max_zh)
    if side == "minus":
        return JostSolution(z, traj, None, dev)
    return JostSolution(z, None, traj, dev)


def _det_cols(p, q):
    return p[..., 0] * q[..., 1] - p[..., 1] * q[..., 0]


@dataclass(frozen=True, eq=False)
class WronskianData:
    x_points: np.ndarray
    a: np.ndarray  # shape (3, n_z): a evaluated at each point
    kb: np.ndarray
    det_deviation: float

    @property
    def a_drift(self) -> float:
        return float(np.max(np.abs(self.a - self.a[0])))

    @property
    def kb_drift(self) -> float:
        return float(np.max(np.abs(self.kb - self.kb[0])))


def wronskian_data(u: Field, z: np.ndarray, threads: int = 1, max_zh: float = MAX_ZH) -> WronskianData:
    """a and kb evaluated as Wronskians at x ~ 0 and x ~ +-x_max/2."""
    grid = u.grid
    idx = [grid.index_of(0.0), grid.index_of(-grid.x_max / 2), grid.index_of(grid.x_max / 2)]
    x_pts = grid.nodes[idx]
    z = np.asarray(z, dtype=float)

    def work(zc):
        sm, _, dm = _sweep(u, zc, "minus", record=idx, max_zh=max_zh)
        sp, _, dp = _sweep(u, zc, "plus", record=idx, max_zh=max_zh)
        a = np.array([_det_cols(sm[i][:, :, 0], sp[i][:, :, 1]) for i in idx])
        kb = np.array([_det_cols(sp[i][:, :, 0], sm[i][:, :, 0]) * np.exp(-2j * zc * grid.nodes[i]) for i in idx])
        return a, kb, max(dm, dp)

    chunks = np.array_split(z, max(1, int(threads)))
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as ex:
            parts = list(ex.map(work, chunks))
    else:
        parts = [work(c) for c in chunks]
    a = np.concatenate([p[0] for p in parts], axis=1)
    kb = np.concatenate([p[1] for p in parts], axis=1)
    return WronskianData(x_pts, a, kb, max(p[2] for p in parts))


def scattering_coefficients(u: Field, grid: SpectralGrid, drift_tol: float = 1e-6, threads: int = 1):
    """(a, kb) on the spectral grid; kb stores 2ik b(k) as a function of z."""
    w = wronskian_data(u, grid.nodes, threads=threads)
    if w.a_drift > drift_tol or w.kb_drift > drift_tol:
        raise IntegrationAccuracyError(
            f"Wronskian depends on the evaluation point (drift a={w.a_drift:.2e}, kb={w.kb_drift:.2e})")
    return ComplexSamples(grid, w.a[0]), ComplexSamples(grid, w.kb[0])


def norming_constant(u: Field) -> float:
    return 0.5 * trapezoid(np.abs(u.d1) ** 2, u.grid.h)


def reflection_coefficients(a: ComplexSamples, kb: ComplexSamples, a_floor: float = A_FLOOR):
    """r2 = kb / a and r1 = kb / (4 z a)."""
    min_a = float(np.min(np.abs(a.values))) if a.grid.n else 1.0
    if min_a < a_floor:
        z_bad = a.z[np.argmin(np.abs(a.values))]
        raise ResonanceError(f"|a| = {min_a:.3e} < {a_floor:.1e} at z = {z_bad:.6g}: resonance, data outside the admissible set")
    r2 = kb.values / a.values
    r1 = r2 / (4.0 * a.z)
    back = r2 * a.values
    if np.max(np.abs(back - kb.values)) > 1e-10 * max(1.0, np.max(np.abs(kb.values))):
        raise ArithmeticError("kb could not be recovered from r2 * a")
    return ComplexSamples(a.grid, r1), ComplexSamples(a.grid, r2)


def offaxis_a(a: ComplexSamples, c: float, z0: complex) -> complex:
    """Continuation of a into the upper half plane via a = e^{-ic} + C[a - e^{-ic}]."""
    lim = np.exp(-1j * c)
    return lim + cauchy_offaxis(ComplexSamples(a.grid, a.values - lim), z0)


def offaxis_lattice(re_max: float = 4.0, im_max: float = 4.0, n_re: int = 16, n_im: int = 8) -> np.ndarray:
    re = np.linspace(-re_max, re_max, n_re)
    im = np.linspace(im_max / n_im, im_max, n_im)
    return (re[None, :] + 1j * im[:, None]).ravel()


@dataclass(frozen=True)
class AdmissibilityReport:
    small_norm_value: float
    small_norm_ok: bool
    min_abs_a_axis: float
    min_abs_a_offaxis: float
    a_floor: float
    admissible: bool

    @property
    def min_abs_a(self) -> float:
        return min(self.min_abs_a_axis, self.min_abs_a_offaxis)

    def as_dict(self) -> dict:
        return {"small_norm_value": self.small_norm_value, "small_norm_ok": self.small_norm_ok,
                "min_abs_a_axis": self.min_abs_a_axis, "min_abs_a_offaxis": self.min_abs_a_offaxis,
                "a_floor": self.a_floor, "admissible": self.admissible}


def small_norm_value(u: Field) -> float:
    n = discrete_norms(u)
    return 2 * n.ux_l2**2 + n.ux_l3**3 + 2 * n.uxx_l1 + trapezoid(np.abs(u.d1), u.grid.h)


def admissibility_check(u: Field, a: ComplexSamples, a_floor: float = A_FLOOR) -> AdmissibilityReport:
    val = small_norm_value(u)
    c = norming_constant(u)
    min_axis = float(np.min(np.abs(a.values)))
    min_off = float(min(abs(offaxis_a(a, c, z0)) for z0 in offaxis_lattice()))
    return AdmissibilityReport(val, val < 1.0, min_axis, min_off, a_floor, min(min_axis, min_off) > a_floor)


@dataclass(frozen=True, eq=False)
class ScatteringData:
    grid: SpectralGrid
    a: ComplexSamples
    kb: ComplexSamples
    r1: ComplexSamples
    r2: ComplexSamples
    c: float
    admissible: bool
    min_abs_a: float
    report: dict = dc_field(default_factory=dict)

    @classmethod
    def zero(cls, grid: SpectralGrid) -> "ScatteringData":
        one = ComplexSamples(grid, np.ones(grid.n))
        nil = ComplexSamples(grid, np.zeros(grid.n))
        return cls(grid, one, nil, nil, nil, 0.0, True, 1.0)


def forward_map(u: Field, grid: SpectralGrid, a_floor: float = A_FLOOR, threads: int = 1) -> ScatteringData:
    """u0 -> scattering data, with admissibility screening."""
    a, kb = scattering_coefficients(u, grid, threads=threads)
    adm = admissibility_check(u, a, a_floor)
    if not adm.admissible:
        raise ResonanceError(f"min |a| = {adm.min_abs_a:.3e} below a_floor = {a_floor:.1e}")
    r1, r2 = reflection_coefficients(a, kb, a_floor)
    return ScatteringData(grid, a, kb, r1, r2, norming_constant(u), adm.admissible, adm.min_abs_a, adm.as_dict())
