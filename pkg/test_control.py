#!/usr/bin/env python3
"""
Tests for control: system specs, joint evolution and the control-side bounds.
"""

import math
import sys
from pathlib import Path

import numpy as np
import pytest

# Add current directory to path
sys.path.insert(0, str(Path(__file__).parent))

from bounds import bound_epsilon_v
from clock_core import ClockParams, pure_density, trace_norm
from control import (
    SystemSpec,
    SystemSpecError,
    clock_disturbance,
    control_run,
    dense_footprint_bytes,
    eps_V_explicit,
    eps_V_implicit,
    explicit_window_ok,
    ideal_evolution,
    joint_evolution,
    joint_evolution_dense,
    pulse_from_potential,
    random_pure_state,
    section_form_bound,
    section_mapping,
    tilde_eps_V,
    trace_distance_bound_explicit,
    trace_distance_bound_implicit,
)
from potentials import CosinePotential, cosine_b, tilde_epsilon_v


def _qubit(seed=1234):
    vec = random_pure_state(2, np.random.default_rng(seed))
    return SystemSpec.from_pure(vec, [0.0, 0.0], [0.0, math.pi / 2])


def test_system_spec_validation():
    with pytest.raises(SystemSpecError):
        SystemSpec(energies=[0.0, 1.0], interaction_phases=[0.0], initial_state=np.eye(2) / 2)
    with pytest.raises(SystemSpecError):
        SystemSpec(energies=[0.0, 1.0], interaction_phases=[0.0, math.pi], initial_state=np.eye(2) / 2)
    with pytest.raises(SystemSpecError):
        SystemSpec(energies=[0.0, 1.0], interaction_phases=[0.0, 1.0], initial_state=np.eye(2))
    with pytest.raises(SystemSpecError):
        SystemSpec(energies=[0.0, 1.0], interaction_phases=[0.0, 1.0],
                   initial_state=np.array([[1.5, 0.0], [0.0, -0.5]]))


def test_purity_factor():
    pure = _qubit()
    assert pure.purity_factor == pytest.approx(math.sqrt(2))
    mixed = SystemSpec(energies=[0.0, 0.0], interaction_phases=[0.0, 1.0], initial_state=np.eye(2) / 2)
    assert mixed.purity_factor == pytest.approx(1.0)
    assert pure.to_dict()["d_s"] == 2


def test_random_pure_state_is_seeded():
    a = random_pure_state(3, np.random.default_rng(5))
    b = random_pure_state(3, np.random.default_rng(5))
    np.testing.assert_array_equal(a, b)
    assert np.linalg.norm(a) == pytest.approx(1.0)


def test_ideal_evolution_phases():
    sys_ = SystemSpec.from_pure([1.0, 1.0], [0.0, 2.0], [0.0, 1.0])
    pulse = lambda t: 0.5 * t
    rho = ideal_evolution(sys_, pulse, 1.5)
    expected = 0.5 * np.exp(-1j * ((0.0 - 2.0) * 1.5 + (0.0 - 1.0) * 0.75))
    assert rho[0, 1] == pytest.approx(expected)
    np.testing.assert_allclose(np.diag(rho), [0.5, 0.5])


def test_pulse_integral_over_period():
    pot = CosinePotential(n=10)
    g = pulse_from_potential(pot, 20.0)
    assert g(0.0) == pytest.approx(0.0, abs=1e-14)
    assert g(20.0) == pytest.approx(pot.omega, abs=1e-12)


def test_blockwise_matches_dense():
    p = ClockParams.symmetric(8, T0=1.0)
    pot = CosinePotential(n=10)
    sys_ = _qubit()
    for t in (0.2, 0.5, 1.0):
        rho_s, rho_c = joint_evolution(sys_, p, pot, t)
        dense_s, dense_c = joint_evolution_dense(sys_, p, pot, t)
        assert np.max(np.abs(rho_s - dense_s)) < 1e-9, t
        assert np.max(np.abs(rho_c - dense_c)) < 1e-9, t


def test_reduced_states_are_valid_and_keep_populations():
    p = ClockParams.symmetric(12, T0=12.0)
    pot = CosinePotential(n=20)
    sys_ = _qubit(7)
    for t in (3.0, 6.0, 12.0):
        rho_s, rho_c = joint_evolution(sys_, p, pot, t)
        assert np.trace(rho_s).real == pytest.approx(1.0, abs=1e-12)
        assert np.trace(rho_c).real == pytest.approx(1.0, abs=1e-12)
        assert np.linalg.eigvalsh(rho_c).min() > -1e-12
        np.testing.assert_allclose(np.diag(rho_s), np.diag(sys_.initial_state), atol=1e-12)


def test_single_level_system_has_no_control_error():
    p = ClockParams.symmetric(8, T0=8.0)
    pot = CosinePotential(n=10)
    sys_ = SystemSpec.from_pure([1.0], [0.0], [0.5])
    run = control_run(sys_, p, pot, times=np.linspace(0, 8.0, 5))
    assert max(run.distances) < 1e-12


def test_implicit_bound_dominates_control_distance():
    p = ClockParams.symmetric(20, T0=20.0)
    pot = CosinePotential(n=60)
    sys_ = _qubit()
    run = control_run(sys_, p, pot, times=np.linspace(0.0, 20.0, 11))
    for t, dist, report in zip(run.time_grid, run.distances, run.bounds):
        assert abs(report.total - report.recombine()) <= 1e-12 * max(1.0, report.total)
        if report.valid:
            assert report.dominates(dist), (t, dist, report.total)
    assert len(run.rows()) == 11
    assert run.rows()[0]["t"] == 0.0


def test_implicit_bound_uses_omega_pi():
    p = ClockParams.symmetric(20, T0=20.0)
    pot = CosinePotential(n=60)
    report = trace_distance_bound_implicit(_qubit(), p, pot, 10.0)
    assert report.terms["eps_v"] == pytest.approx(bound_epsilon_v(p, pot, 10.0, b=cosine_b(60, math.pi)).total)
    assert report.terms["eps_v_omega_dyn"] == pytest.approx(bound_epsilon_v(p, pot, 10.0).total)
    assert cosine_b(60, math.pi) > pot.b_const


def test_eps_V_implicit_zero_at_period_ends():
    p = ClockParams.symmetric(20, T0=20.0)
    pot = CosinePotential(n=60)
    assert eps_V_implicit(p, pot, 0.0) == pytest.approx(0.0, abs=1e-13)
    assert eps_V_implicit(p, pot, 20.0) < 1e-10
    assert eps_V_implicit(p, pot, 10.0) > 1e-3
    assert eps_V_implicit(p, None, 10.0) == 0.0


def test_tilde_eps_V_matches_exact_tail():
    pot = CosinePotential(n=30, x0=math.pi)
    assert tilde_eps_V(pot, math.pi / 2) == pytest.approx(tilde_epsilon_v(30, math.pi / 2), abs=1e-12)


def test_tilde_eps_V_independent_of_omega():
    half = CosinePotential(n=30, omega=0.5, x0=math.pi)
    assert tilde_eps_V(half, math.pi / 2) == pytest.approx(tilde_epsilon_v(30, math.pi / 2), abs=1e-12)
    assert 0.0 < tilde_eps_V(half, math.pi / 2) < 1.0
    assert tilde_eps_V(CosinePotential(n=30, omega=0.0), math.pi / 2) == 0.0


def test_eps_V_explicit_infinite_when_kappa_vanishes():
    p = ClockParams.symmetric(8, T0=1.0)
    pot = CosinePotential(n=10)
    value, extra = eps_V_explicit(p, pot, math.pi / 2, gamma_psi=0.2)
    assert extra["kappa_tilde"] == 0.0
    assert math.isinf(value)
    finite, extra = eps_V_explicit(ClockParams.symmetric(64, T0=1.0), pot, math.pi / 2, gamma_psi=0.5)
    assert extra["kappa_tilde"] > 0
    assert math.isfinite(finite)


def test_explicit_window_preconditions():
    p = ClockParams.symmetric(20, T0=20.0)
    pot = CosinePotential(n=60)
    assert explicit_window_ok(p, pot, 1.0, x_vr=math.pi / 4, gamma_psi=0.25)
    assert not explicit_window_ok(p, pot, 10.0, x_vr=math.pi / 4, gamma_psi=0.25)
    assert not explicit_window_ok(p.shifted(1.0), pot, 1.0, x_vr=math.pi / 4, gamma_psi=0.25)
    report = trace_distance_bound_explicit(_qubit(), p, pot, 10.0, math.pi / 4, 0.25)
    assert not report.valid


def test_section_mapping_and_bound():
    x0, reach = section_mapping(20.0, 5.0, 15.0)
    assert x0 == pytest.approx(math.pi)
    assert reach == pytest.approx(math.pi / 2)
    p = ClockParams.symmetric(20, T0=20.0)
    pot = CosinePotential(n=60)
    report = section_form_bound(_qubit(), p, pot, 20.0, 5.0, 15.0)
    assert report.valid
    assert report.notes["x_vr"] == pytest.approx(math.pi / 4)
    assert abs(report.total - report.recombine()) <= 1e-12 * max(1.0, report.total)
    inside = section_form_bound(_qubit(), p, pot, 10.0, 5.0, 15.0)
    assert not inside.valid
    shifted = section_form_bound(_qubit(), p, pot, 20.0, 2.0, 10.0)
    assert not shifted.valid


def test_clock_disturbance_below_bound():
    sys_ = _qubit()
    pot = CosinePotential(n=60)
    for d in (12, 16):
        measured, bound = clock_disturbance(sys_, ClockParams.symmetric(d, T0=20.0), pot)
        assert 0.0 <= measured <= bound, d


def test_clock_disturbance_bound_uses_omega_pi():
    p = ClockParams.symmetric(20, T0=20.0)
    pot = CosinePotential(n=60)
    _, bound = clock_disturbance(_qubit(), p, pot)
    assert bound == pytest.approx(bound_epsilon_v(p, pot, p.T0, b=cosine_b(60, math.pi)).total)
    assert bound >= bound_epsilon_v(p, pot, p.T0).total


def test_disturbance_grows_with_steepness():
    sys_ = _qubit()
    p = ClockParams.symmetric(20, T0=20.0)
    low, _ = clock_disturbance(sys_, p, CosinePotential(n=10))
    high, _ = clock_disturbance(sys_, p, CosinePotential(n=100))
    assert low < high


def test_dense_footprint():
    assert dense_footprint_bytes(2, 8) == 16 * 16 * 16
    rho = pure_density(np.array([1.0, 0.0]))
    assert trace_norm(rho) == pytest.approx(1.0)
