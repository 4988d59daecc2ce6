import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from flist.evolution import evolution_phase, evolve, l21_norm, phase_resolution
from flist.forward import PhysParams

PARAMS = PhysParams(alpha=1.0, beta=1.0, sigma=-1)


@settings(max_examples=50, deadline=None)
@given(st.floats(0, 5), st.floats(0, 5), st.floats(0.2, 3), st.floats(0.2, 3))
def test_phase_group_property(t1, t2, alpha, beta):
    params = PhysParams(alpha=alpha, beta=beta)
    z = np.linspace(-5, 5, 40) + 0.0125
    lhs = evolution_phase(z, t1 + t2, params)
    rhs = evolution_phase(z, t1, params) * evolution_phase(z, t2, params)
    assert np.max(np.abs(lhs - rhs)) < 1e-10
    assert np.max(np.abs(np.abs(lhs) - 1)) < 1e-14


def test_phase_stationary_point():
    # z - beta + beta^2 / (4z) vanishes at z = beta / 2
    params = PhysParams(alpha=1.3, beta=0.8)
    assert evolution_phase(np.array([0.4]), 7.0, params)[0] == pytest.approx(1.0, abs=1e-14)


def test_phase_rejects_origin():
    with pytest.raises(ValueError):
        evolution_phase(np.array([0.0, 1.0]), 1.0, PARAMS)


def test_evolve_preserves_moduli_and_weighted_norm(data_small):
    ev = evolve(data_small, 2.0, PARAMS)
    assert np.max(np.abs(np.abs(ev.r1_t.values) - np.abs(data_small.r1.values))) < 1e-15
    assert abs(l21_norm(ev.r2_t) - l21_norm(data_small.r2)) < 1e-12 * l21_norm(data_small.r2)
    assert ev.growth["r1"]["ok"] and ev.growth["r2"]["ok"]


def test_evolve_at_zero_is_identity(data_small):
    ev = evolve(data_small, 0.0, PARAMS)
    assert ev.r1_t is data_small.r1 and ev.r2_t is data_small.r2


def test_evolve_composes(data_small):
    once = evolve(data_small, 1.5, PARAMS)
    half = evolve(data_small, 0.75, PARAMS)
    twice = evolution_phase(data_small.grid.nodes, 0.75, PARAMS) * half.r2_t.values
    assert np.max(np.abs(once.r2_t.values - twice)) < 1e-14


def test_evolve_rejects_negative_time(data_small):
    with pytest.raises(ValueError):
        evolve(data_small, -1.0, PARAMS)


def test_phase_resolution_shrinks_with_time(small_z):
    early, _ = phase_resolution(small_z, 0.1, PARAMS)
    late, z_ok = phase_resolution(small_z, 1.0, PARAMS)
    assert early == pytest.approx(10 * late)
    assert z_ok > 0
    assert phase_resolution(small_z, 0.0, PARAMS)[0] == float("inf")
