import numpy as np
import pytest
from scipy.integrate import solve_ivp

from flist.forward import (ComplexSamples, IntegrationAccuracyError, PhysParams, ResonanceError,
                           ScatteringData, admissibility_check, build_potential_matrix, forward_map,
                           norming_constant, potential_entries, reflection_coefficients,
                           small_norm_value, solve_jost, wronskian_data)
from flist.grids import Field, RealGrid, SpectralGrid


def gaussian_field(grid, amp):
    return Field.from_values(grid, amp * np.exp(-grid.nodes**2))


def ode_a(amp, z, x_min=-8.0, x_max=8.0):
    """a(z) by adaptive RK on the analytic Gaussian potential."""
    def rhs(x, y):
        u = amp * np.exp(-x * x)
        ux, uxx = -2 * x * u, (4 * x * x - 2) * u
        q = potential_entries(np.array(u), np.array(ux), np.array(uxx))
        m = q + np.diag([-1j * z, 1j * z])
        return (m @ y.reshape(2, 2)).ravel()

    y0 = np.diag([np.exp(-1j * z * x_min), np.exp(1j * z * x_min)]).astype(complex).ravel()
    sol = solve_ivp(rhs, (x_min, x_max), y0, method="DOP853", rtol=1e-12, atol=1e-13)
    phi = sol.y[:, -1].reshape(2, 2)
    return phi[0, 0] * np.exp(1j * z * x_max)


def test_params_validation():
    with pytest.raises(ValueError):
        PhysParams(alpha=-1.0)
    with pytest.raises(ValueError):
        PhysParams(sigma=0)


def test_potential_matrix_structure():
    g = RealGrid(-10, 10, 256)
    u = Field.from_values(g, (0.3 + 0.1j) * np.exp(-g.nodes**2))
    q = build_potential_matrix(u)
    assert np.max(np.abs(q[:, 0, 0] + q[:, 1, 1])) == 0.0
    assert np.allclose(q[:, 0, 1], u.d1 / 2j)


def test_zero_potential_gives_trivial_data():
    g = RealGrid(-10, 10, 256)
    zg = SpectralGrid.build(z_cut=8, n=128)
    data = forward_map(Field.zeros(g), zg)
    assert np.max(np.abs(data.a.values - 1)) < 1e-13
    assert np.max(np.abs(data.r2.values)) < 1e-13
    assert data.c == 0.0


@pytest.mark.parametrize("z", [-3.0, -0.5, 0.7, 2.0])
def test_magnus_matches_adaptive_ode(z):
    g = RealGrid(-8, 8, 1024)
    w = wronskian_data(gaussian_field(g, 0.25), np.array([z]))
    assert abs(w.a[0, 0] - ode_a(0.25, z)) < 1e-8


def test_jost_boundary_values_and_determinant():
    g = RealGrid(-10, 10, 512)
    u = gaussian_field(g, 0.25)
    z = np.array([-2.0, 0.5, 3.0])
    minus = solve_jost(u, z, "minus")
    plus = solve_jost(u, z, "plus")
    assert minus.psi_minus.shape == (g.n, 3, 2, 2)
    assert np.allclose(minus.psi_minus[0], np.eye(2))
    assert np.allclose(plus.psi_plus[-1], np.eye(2))
    assert minus.det_deviation < 1e-12 and plus.det_deviation < 1e-12
    with pytest.raises(ValueError):
        solve_jost(u, z, "both")


def test_wronskian_is_independent_of_evaluation_point(small_x, gauss_small, small_z):
    w = wronskian_data(gauss_small, small_z.nodes)
    assert w.a_drift < 1e-10
    assert w.kb_drift < 1e-10


def test_unitarity_and_ratio(data_small):
    z = data_small.grid.nodes
    r1, r2, a = data_small.r1.values, data_small.r2.values, data_small.a.values
    assert np.max(np.abs((1 + np.conj(r1) * r2) * np.abs(a) ** 2 - 1)) < 1e-8
    assert np.max(np.abs(r2 - 4 * z * r1)) < 1e-14


@pytest.mark.parametrize("amp", [0.1, 0.25, 0.5])
def test_norming_constant_closed_form(amp):
    g = RealGrid(-20, 20, 1024)
    assert norming_constant(gaussian_field(g, amp)) == pytest.approx(0.5 * amp**2 * np.sqrt(np.pi / 2), rel=1e-12)


def test_a_tends_to_phase_of_norming_constant(data_small):
    target = np.exp(-1j * data_small.c)
    assert abs(data_small.a.values[-1] - target) < 1e-3
    assert abs(data_small.a.values[0] - target) < 1e-3


def test_step_size_guard():
    g = RealGrid(-10, 10, 64)
    with pytest.raises(IntegrationAccuracyError):
        wronskian_data(gaussian_field(g, 0.1), np.array([20.0]))


def test_resonance_is_reported():
    zg = SpectralGrid.build(z_cut=8, n=128)
    a_vals = np.ones(zg.n, dtype=complex)
    a_vals[10] = 1e-12
    with pytest.raises(ResonanceError, match="resonance"):
        reflection_coefficients(ComplexSamples(zg, a_vals), ComplexSamples(zg, np.zeros(zg.n)))


def test_small_norm_grows_with_amplitude():
    g = RealGrid(-20, 20, 1024)
    values = [small_norm_value(gaussian_field(g, amp)) for amp in (0.05, 0.1, 0.25, 3.0)]
    assert np.all(np.diff(values) > 0)
    assert values[0] < 1.0
    assert values[-1] > 1.0


def test_admissibility_report_for_large_data():
    g = RealGrid(-20, 20, 2048)
    zg = SpectralGrid.build(z_cut=16, n=256)
    u = gaussian_field(g, 3.0)
    w = wronskian_data(u, zg.nodes)
    rep = admissibility_check(u, ComplexSamples(zg, w.a[0]))
    assert not rep.small_norm_ok
    assert rep.as_dict()["small_norm_value"] == rep.small_norm_value


def test_report_recorded_on_data(data_small, gauss_small):
    assert data_small.admissible
    # the sufficient small-norm condition fails at amplitude 0.25 while |a| stays away from 0
    assert data_small.report["small_norm_value"] == small_norm_value(gauss_small)
    assert not data_small.report["small_norm_ok"]
    assert data_small.min_abs_a > 0.9


def test_zero_data_constructor(small_z):
    d = ScatteringData.zero(small_z)
    assert np.all(d.a.values == 1) and np.all(d.r1.values == 0)
