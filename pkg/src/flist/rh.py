"""Riemann-Hilbert inverse problem on the real z-line.

Unknowns are the columns M_{-,1} = (m11, m21) and M_{+,2} = (m12, m22), coupled by
    M_{-,1} - e1 = P-( r2 e^{2izx} M_{+,2} ),
    M_{+,2} - e2 = P+( conj(r1) e^{-2izx} M_{-,1} ).
The delta-conditioned variant solves for M_{delta,+,1} and M_{delta,-,2}; its jump has
conj(r1) r2 on the 22-entry and the modified coefficients conj(delta+ delta-) r_j.
"""
from __future__ import annotations

import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
import scipy.linalg as sla

from .cauchy import plemelj_apply, plemelj_matrices
from .grids import ComplexSamples, SpectralGrid

COND_WARN = 1e8
CONSISTENCY_TOL = 1e-4
CHUNK = 64  # fixed batch width, so results do not depend on the thread count


def resolved_x(grid: SpectralGrid) -> float:
    """Largest |x| at which e^{2izx} keeps at least four nodes per period on the coarsest spacing."""
    return float(np.pi / (4 * np.max(np.diff(grid.nodes))))


class SolverError(RuntimeError):
    pass


class ConditioningError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class JumpData:
    r1: ComplexSamples
    r2: ComplexSamples
    x: float

    def __post_init__(self):
        z = self.r1.grid.nodes
        scale = max(1.0, float(np.max(np.abs(self.r2.values))))
        if np.max(np.abs(self.r2.values - 4 * z * self.r1.values)) > 1e-10 * scale:
            raise ValueError("jump data violate r2 = 4 z r1")

    @property
    def grid(self) -> SpectralGrid:
        return self.r1.grid

    @property
    def d_upper(self) -> np.ndarray:
        """12-entry of R: conj(r1) e^{-2izx}."""
        return np.conj(self.r1.values) * np.exp(-2j * self.grid.nodes * self.x)

    @property
    def d_lower(self) -> np.ndarray:
        """21-entry of R: r2 e^{2izx}."""
        return self.r2.values * np.exp(2j * self.grid.nodes * self.x)


@dataclass(frozen=True, eq=False)
class DeltaData:
    delta_plus: ComplexSamples
    delta_minus: ComplexSamples
    log_density: ComplexSamples
    delta_zero: complex  # delta(0), needed by the conditioned reconstruction


@dataclass(frozen=True, eq=False)
class RHSolution:
    x: float
    m_minus_col1: tuple  # (m11, m21) as ComplexSamples
    m_plus_col2: tuple   # (m12, m22)
    residual: float
    conditioned: bool
    condition: float = float("nan")
    # conditioned solves also keep M_{delta,+,1} and M_{delta,-,2}
    delta_cols: tuple | None = None
    delta: DeltaData | None = None
    frame_residual: float = 0.0

    @property
    def edge_deviation(self) -> float:
        m11, m21 = (c.values for c in self.m_minus_col1)
        m12, m22 = (c.values for c in self.m_plus_col2)
        dev = 0.0
        for i in (0, -1):
            dev = max(dev, abs(m11[i] - 1), abs(m21[i]), abs(m12[i]), abs(m22[i] - 1))
        return float(dev)


def _conditioned_coeffs(jump: JumpData, delta: DeltaData):
    prod = delta.delta_plus.values * delta.delta_minus.values
    a = prod * jump.d_upper            # conj(r_delta1) e^{-2izx}
    b = np.conj(prod) * jump.d_lower   # r_delta2 e^{2izx}
    return a, b


def _structure(jump: JumpData, delta: DeltaData | None):
    """(Pa, Da, Pb, Db): col1 - e1 = Pa(Da col2), col2 - e2 = Pb(Db col1)."""
    pp, pm = plemelj_matrices(jump.grid)
    if delta is None:
        return pm, jump.d_lower, pp, jump.d_upper
    a, b = _conditioned_coeffs(jump, delta)
    return pp, b, pm, a


def assemble_system(jump: JumpData, delta: DeltaData | None = None):
    """Dense operator T -> T - P+(T R+) - P-(T R-) over stacked unknowns (T11, T21, T12, T22).

    Returns (matrix, rhs); T is M minus the identity columns.
    """
    pa, da, pb, db = _structure(jump, delta)
    n = jump.grid.n
    a_blk = pa * da[None, :]
    b_blk = pb * db[None, :]
    op = np.eye(4 * n, dtype=complex)
    op[0:n, 2 * n:3 * n] -= a_blk
    op[n:2 * n, 3 * n:4 * n] -= a_blk
    op[2 * n:3 * n, 0:n] -= b_blk
    op[3 * n:4 * n, n:2 * n] -= b_blk
    rhs = np.zeros(4 * n, dtype=complex)
    rhs[n:2 * n] = pa @ da
    rhs[2 * n:3 * n] = pb @ db
    return op, rhs


def _condition_1norm(lu_piv, anorm: float) -> float:
    lu, piv = lu_piv
    rcond, info = sla.lapack.zgecon(lu, anorm, norm="1")
    return float("inf") if rcond == 0 else 1.0 / rcond


def system_condition(jump: JumpData, delta: DeltaData | None = None) -> float:
    op, _ = assemble_system(jump, delta)
    anorm = np.max(np.sum(np.abs(op), axis=0))
    return _condition_1norm(sla.lu_factor(op, check_finite=False), anorm)


def _from_unknowns(jump, delta, cols, cond, dense_cols=None):
    """Wrap solved columns; cols are the unknown columns of the chosen formulation."""
    g = jump.grid
    c1a, c1b, c2a, c2b = cols
    if delta is None:
        m11, m21, m12, m22 = c1a, c1b, c2a, c2b
        dcols = None
    else:
        a, b = _conditioned_coeffs(jump, delta)
        dp, dm = delta.delta_plus.values, delta.delta_minus.values
        # M_{delta,-,1} = M_{delta,+,1} - b M_{delta,-,2};  M_{delta,+,2} = a M_{delta,+,1} + M_{delta,-,2}
        m11 = dm * (c1a - b * c2a)
        m21 = dm * (c1b - b * c2b)
        m12 = (a * c1a + c2a) / dp
        m22 = (a * c1b + c2b) / dp
        dcols = tuple(ComplexSamples(g, v) for v in (c1a, c1b, c2a, c2b))
    pa, da, pb, db = _structure(jump, delta)
    frame = float(max(np.max(np.abs(c1a - 1 - pa @ (da * c2a))), np.max(np.abs(c1b - pa @ (da * c2b))),
                      np.max(np.abs(c2a - pb @ (db * c1a))), np.max(np.abs(c2b - 1 - pb @ (db * c1b)))))
    sol = RHSolution(jump.x, (ComplexSamples(g, m11), ComplexSamples(g, m21)),
                     (ComplexSamples(g, m12), ComplexSamples(g, m22)), 0.0, delta is not None, cond, dcols, delta)
    res = jump_residual(sol, jump)
    return RHSolution(sol.x, sol.m_minus_col1, sol.m_plus_col2, res, sol.conditioned, cond, dcols, delta, frame)


def _accept(sol: RHSolution, grid: SpectralGrid, tol: float, consistency_tol: float):
    """The solved equations must meet tol.  The original jump, which a conditioned solve only
    satisfies up to quadrature error of the delta factors, must meet consistency_tol wherever
    the z-grid resolves e^{2izx}."""
    if sol.frame_residual > tol:
        raise SolverError(f"jump residual {sol.frame_residual:.3e} exceeds {tol:.1e} at x = {sol.x}")
    if abs(sol.x) <= resolved_x(grid) and sol.residual > max(tol, consistency_tol):
        raise SolverError(f"original-jump residual {sol.residual:.3e} exceeds {consistency_tol:.1e} "
                          f"at x = {sol.x}")


def _check_density(jump: JumpData):
    dens = 1 + np.conj(jump.r1.values) * jump.r2.values
    z = jump.grid.nodes
    if np.any(dens[z < 0].real <= 0):
        raise ConditioningError("1 + conj(r1) r2 is not positive on z < 0")


def _solve(jump: JumpData, delta: DeltaData | None, method: str, tol: float) -> RHSolution:
    n = jump.grid.n
    if method == "dense":
        op, rhs = assemble_system(jump, delta)
        anorm = np.max(np.sum(np.abs(op), axis=0))
        lu = sla.lu_factor(op, check_finite=False)
        cond = _condition_1norm(lu, anorm)
        if not np.isfinite(cond):
            raise SolverError("singular RH system")
        if cond > COND_WARN:
            warnings.warn(f"RH system condition number {cond:.3e} exceeds {COND_WARN:.0e}", stacklevel=3)
        t = sla.lu_solve(lu, rhs, check_finite=False)
        cols = (t[:n] + 1, t[n:2 * n], t[2 * n:3 * n], t[3 * n:] + 1)
        return _from_unknowns(jump, delta, cols, cond)
    if method == "reduced":
        pa, da, pb, db = _structure(jump, delta)
        a_blk = pa * da[None, :]
        b_blk = pb * db[None, :]
        one = np.ones(n, dtype=complex)
        k1 = np.eye(n) - a_blk @ b_blk
        k2 = np.eye(n) - b_blk @ a_blk
        c1a = np.linalg.solve(k1, one)
        c2b = np.linalg.solve(k2, one)
        cols = (c1a, a_blk @ c2b, b_blk @ c1a, c2b)
        return _from_unknowns(jump, delta, cols, float("nan"))
    raise ValueError(f"unknown method {method!r}")


def solve_columns(jump: JumpData, method: str = "dense", tol: float = 1e-6,
                  consistency_tol: float = CONSISTENCY_TOL) -> RHSolution:
    """Plain solve.  method='dense' is the full 4N reference path with a condition estimate;
    'reduced' eliminates the coupling blocks analytically (same equations, size N)."""
    _check_density(jump)
    sol = _solve(jump, None, method, tol)
    _accept(sol, jump.grid, tol, consistency_tol)
    return sol


def delta_build(r1: ComplexSamples, r2: ComplexSamples) -> DeltaData:
    """delta_pm = exp(P_pm log(1 + conj(r1) r2))."""
    g = r1.grid
    dens = 1 + np.conj(r1.values) * r2.values
    if np.any(dens.real <= 0):
        raise ConditioningError("log density undefined: 1 + conj(r1) r2 <= 0 somewhere on the grid")
    logd = np.log(dens.real) + 1j * np.angle(dens)
    pp, pm = plemelj_matrices(g)
    dplus = np.exp(pp @ logd)
    dminus = np.exp(pm @ logd)
    d0 = np.exp(np.sum(g.weights * logd / g.nodes) / (2j * np.pi))
    return DeltaData(ComplexSamples(g, dplus), ComplexSamples(g, dminus), ComplexSamples(g, logd), complex(d0))


def solve_columns_conditioned(jump: JumpData, delta: DeltaData, method: str = "dense",
                              tol: float = 1e-6, consistency_tol: float = CONSISTENCY_TOL) -> RHSolution:
    """Solve the delta-conjugated problem, then map back with M = M_delta delta^{sigma3}."""
    _check_density(jump)
    sol = _solve(jump, delta, method, tol)
    _accept(sol, jump.grid, tol, consistency_tol)
    return sol


def jump_residual(sol: RHSolution, jump: JumpData) -> float:
    """Max-norm defect of M_+ = M_-(I + R) with the missing columns rebuilt by Cauchy integrals.

    Rebuilding M_{+,1} = e1 + P+(r2 e^{2izx} M_{+,2}) and M_{-,2} = e2 + P-(conj(r1) e^{-2izx} M_{-,1})
    and using P+ = P- + I, the jump defect equals the defect of the two column equations.
    """
    pp, pm = plemelj_matrices(jump.grid)
    m11, m21 = (c.values for c in sol.m_minus_col1)
    m12, m22 = (c.values for c in sol.m_plus_col2)
    du, dl = jump.d_upper, jump.d_lower
    e1 = np.max(np.abs(m11 - 1 - pm @ (dl * m12)))
    e2 = np.max(np.abs(m21 - pm @ (dl * m22)))
    e3 = np.max(np.abs(m12 - pp @ (du * m11)))
    e4 = np.max(np.abs(m22 - 1 - pp @ (du * m21)))
    return float(max(e1, e2, e3, e4))


# ---------------------------------------------------------------- batched solves

def batched_gmres(apply, b: np.ndarray, tol: float = 1e-12, restart: int = 40, max_restarts: int = 20):
    """GMRES run column-wise on a block of independent systems A_k x_k = b_k.

    ``apply`` maps an (n, m) block to the (n, m) block of products.  Columns stop
    updating once their own residual is below tol * ||b_k||.
    """
    n, m = b.shape
    x = np.zeros_like(b)
    bnorm = np.linalg.norm(b, axis=0)
    bnorm[bnorm == 0] = 1.0
    its = np.zeros(m, dtype=int)
    for _ in range(max_restarts):
        r = b - apply(x)
        beta = np.linalg.norm(r, axis=0)
        active = beta > tol * bnorm
        if not np.any(active):
            return x, beta / bnorm, its
        V = np.zeros((restart + 1, n, m), dtype=complex)
        H = np.zeros((restart + 1, restart, m), dtype=complex)
        cs = np.zeros((restart, m), dtype=complex)
        sn = np.zeros((restart, m), dtype=complex)
        gvec = np.zeros((restart + 1, m), dtype=complex)
        safe = np.where(beta > 0, beta, 1.0)
        V[0] = r / safe
        gvec[0] = beta
        live = active.copy()
        kcount = np.zeros(m, dtype=int)
        for j in range(restart):
            w = apply(V[j])
            for i in range(j + 1):
                hij = np.sum(np.conj(V[i]) * w, axis=0)
                w = w - hij * V[i]
                H[i, j] = hij
            hn = np.linalg.norm(w, axis=0)
            H[j + 1, j] = hn
            V[j + 1] = w / np.where(hn > 0, hn, 1.0)
            for i in range(j):
                t = cs[i] * H[i, j] + sn[i] * H[i + 1, j]
                H[i + 1, j] = -np.conj(sn[i]) * H[i, j] + np.conj(cs[i]) * H[i + 1, j]
                H[i, j] = t
            den = np.sqrt(np.abs(H[j, j]) ** 2 + np.abs(H[j + 1, j]) ** 2)
            den = np.where(den > 0, den, 1.0)
            cs[j] = H[j, j] / den
            sn[j] = H[j + 1, j] / den
            H[j, j] = np.conj(cs[j]) * H[j, j] + np.conj(sn[j]) * H[j + 1, j]
            H[j + 1, j] = 0
            gvec[j + 1] = -sn[j] * gvec[j]
            gvec[j] = np.conj(cs[j]) * gvec[j]
            kcount[live] = j + 1
            live &= np.abs(gvec[j + 1]) > tol * bnorm
            if not np.any(live):
                break
        for col in np.nonzero(active)[0]:
            k = kcount[col]
            y = sla.solve_triangular(H[:k, :k, col], gvec[:k, col])
            x[:, col] += V[:k, :, col].T @ y
            its[col] += k
    r = b - apply(x)
    return x, np.linalg.norm(r, axis=0) / bnorm, its


@dataclass(frozen=True, eq=False)
class BatchSolution:
    """Per-x columns needed for reconstruction, stacked with shape (n_x, n_z)."""

    x: np.ndarray
    m11: np.ndarray       # M_{-,11} (plain) or M_{delta,+,11} (conditioned)
    m22: np.ndarray       # M_{+,22} (plain) or M_{delta,-,22} (conditioned)
    conditioned: np.ndarray
    residual: np.ndarray        # defect of the original column equations
    frame_residual: np.ndarray  # defect of the equations actually solved
    edge: np.ndarray
    delta: DeltaData | None

    def worst(self):
        i = int(np.argmax(self.frame_residual))
        return float(self.x[i]), float(self.frame_residual[i])



def _solve_block(grid, du, dl, conditioned: bool, tol: float):
    """Columns for a block of x-values; du, dl have shape (n_z, m).

    Plain: col1 - e1 = P-(dl col2), col2 - e2 = P+(du col1); conditioned swaps P+ and P-.
    """
    sa, sb = (1, -1) if conditioned else (-1, 1)
    pa = lambda v: plemelj_apply(grid, v, sa)
    pb = lambda v: plemelj_apply(grid, v, sb)
    n, m = du.shape
    ones = np.ones((n, m), dtype=complex)
    c1a, _, _ = batched_gmres(lambda v: v - pa(dl * pb(du * v)), ones, tol)
    c2b, _, _ = batched_gmres(lambda v: v - pb(du * pa(dl * v)), ones, tol)
    c2a = pb(du * c1a)
    c1b = pa(dl * c2b)
    frame = np.max(np.abs(np.stack([
        c1a - 1 - pa(dl * c2a), c1b - pa(dl * c2b),
        c2a - pb(du * c1a), c2b - 1 - pb(du * c1b)])), axis=(0, 1))
    return c1a, c1b, c2a, c2b, frame


def solve_batch(r1: ComplexSamples, r2: ComplexSamples, xs, x_switch: float = 0.0,
                tol: float = 1e-12, threads: int = 1, delta: DeltaData | None = None) -> BatchSolution:
    """Solve the RH problem for every x in xs; plain for x >= x_switch, conditioned below."""
    g = r1.grid
    z = g.nodes
    xs = np.asarray(xs, dtype=float)
    pp = lambda v: plemelj_apply(g, v, 1)
    pm = lambda v: plemelj_apply(g, v, -1)
    cond_mask = xs < x_switch
    if np.any(cond_mask) and delta is None:
        delta = delta_build(r1, r2)
    prod = None if delta is None else delta.delta_plus.values * delta.delta_minus.values
    m11 = np.empty((len(xs), g.n), dtype=complex)
    m22 = np.empty_like(m11)
    res = np.empty(len(xs))
    edge = np.empty(len(xs))
    jobs = []
    for flag in (False, True):
        idx = np.nonzero(cond_mask == flag)[0]
        for s in range(0, len(idx), CHUNK):
            jobs.append((flag, idx[s:s + CHUNK]))

    def work(job):
        flag, idx = job
        xb = xs[idx]
        ph = np.exp(2j * np.outer(z, xb))
        du = np.conj(r1.values)[:, None] / ph
        dl = r2.values[:, None] * ph
        if flag:
            du_eff = prod[:, None] * du
            dl_eff = np.conj(prod)[:, None] * dl
        else:
            du_eff, dl_eff = du, dl
        c1a, c1b, c2a, c2b, fr = _solve_block(g, du_eff, dl_eff, flag, tol)
        if flag:
            dp = delta.delta_plus.values[:, None]
            dm = delta.delta_minus.values[:, None]
            n11 = dm * (c1a - dl_eff * c2a)
            n21 = dm * (c1b - dl_eff * c2b)
            n12 = (du_eff * c1a + c2a) / dp
            n22 = (du_eff * c1b + c2b) / dp
        else:
            n11, n21, n12, n22 = c1a, c1b, c2a, c2b
        r = np.max(np.abs(np.stack([
            n11 - 1 - pm(dl * n12), n21 - pm(dl * n22),
            n12 - pp(du * n11), n22 - 1 - pp(du * n21)])), axis=(0, 1))
        e = np.max(np.abs(np.stack([n11 - 1, n21, n12, n22 - 1])[:, [0, -1], :]), axis=(0, 1))
        return idx, c1a, c2b, r, fr, e

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as ex:
            out = list(ex.map(work, jobs))
    else:
        out = [work(j) for j in jobs]
    fres = np.empty(len(xs))
    for idx, c1a, c2b, r, fr, e in out:
        m11[idx] = c1a.T
        m22[idx] = c2b.T
        res[idx] = r
        fres[idx] = fr
        edge[idx] = e
    return BatchSolution(xs, m11, m22, cond_mask, res, fres, edge, delta)
