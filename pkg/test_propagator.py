#!/usr/bin/env python3
"""
Tests for propagator: free, exact and split-operator evolution.
"""

import sys
from pathlib import Path

import numpy as np
import pytest

# Add current directory to path
sys.path.insert(0, str(Path(__file__).parent))

from bounds import bound_epsilon_v
from clock_core import ClockParams, ClockState, gaussian_state
from potentials import ConstantPotential, CosinePotential, ZeroPotential
from propagator import (
    EvolutionSpec,
    PropagationError,
    clear_cache,
    evolve,
    evolve_exact,
    evolve_free,
    evolve_split,
    evolve_split_residues,
    initial_state,
    potential_diagonal,
    reference_state,
    split_propagator,
    state_distance,
    wave_function_residual,
)


@pytest.mark.parametrize("d", [4, 8, 17, 64])
def test_period_returns_state(d):
    p = ClockParams.symmetric(d, T0=1.3)
    s = gaussian_state(p)
    back = evolve_free(s, p, p.T0)
    assert state_distance(back, s) < 1e-10
    exact = evolve_exact(s, EvolutionSpec(clock=p, t=p.T0))
    assert state_distance(exact, s) < 1e-10


@pytest.mark.parametrize("d", [4, 8, 17, 64])
def test_time_states_rotate_one_label_per_tick(d):
    p = ClockParams.symmetric(d, T0=2.0)
    for k, m in ((0, 1), (2, 3), (d - 1, 2)):
        vec = np.zeros(d, dtype=complex)
        vec[k] = 1.0
        s = ClockState.from_residues(vec, center=0.0)
        moved = evolve_free(s, p, m * p.T0 / d).residues()
        expected = np.zeros(d, dtype=complex)
        expected[(k + m) % d] = 1.0
        assert np.max(np.abs(moved - expected)) < 1e-12, (d, k, m)


def test_free_and_exact_agree_without_potential():
    p = ClockParams.symmetric(12, T0=1.0)
    s = gaussian_state(p)
    for t in (0.1, 0.37, 0.9):
        free = evolve_free(s, p, t)
        exact = evolve_exact(s, EvolutionSpec(clock=p, t=t))
        zero = evolve_exact(s, EvolutionSpec(clock=p, potential=ZeroPotential(), t=t))
        assert state_distance(free, exact) < 1e-12
        assert state_distance(free, zero) < 1e-12
        assert free.window == exact.window


def test_window_follows_center():
    p = ClockParams.symmetric(8, T0=1.0)
    moved = evolve_free(gaussian_state(p), p, 0.25)
    assert moved.center == pytest.approx(2.0)
    assert list(moved.window) == [-1, 0, 1, 2, 3, 4, 5, 6]


def test_constant_potential_is_global_phase():
    """A constant potential only adds the phase exp(-i omega t / T0)."""
    p = ClockParams.symmetric(10, T0=2.0)
    pot = ConstantPotential(omega=1.0)
    s = gaussian_state(p)
    t = 0.7
    with_pot = evolve_exact(s, EvolutionSpec(clock=p, potential=pot, t=t)).residues()
    free = evolve_free(s, p, t).residues()
    np.testing.assert_allclose(with_pot, free * np.exp(-1j * pot.omega * t / p.T0), atol=1e-12)
    np.testing.assert_allclose(potential_diagonal(pot, p.d, p.T0), np.full(p.d, 1.0 / p.T0))


@pytest.mark.parametrize("d", [8, 16, 32])
@pytest.mark.parametrize("n", [1, 10, 60])
def test_split_converges_to_exact(d, n):
    p = ClockParams.symmetric(d, T0=1.0)
    pot = CosinePotential(n=n)
    s = initial_state(p, pot)
    t = 0.37
    exact = evolve_exact(s, EvolutionSpec(clock=p, potential=pot, t=t))
    split = evolve_split(s, EvolutionSpec(clock=p, potential=pot, t=t, method="split"))
    assert state_distance(exact, split) < 1e-8, (d, n)


def test_split_is_unitary_and_lie_is_first_order():
    p = ClockParams.symmetric(8, T0=1.0)
    pot = CosinePotential(n=10)
    strang = split_propagator(EvolutionSpec(clock=p, potential=pot, t=0.5, method="split"), 16)
    np.testing.assert_allclose(strang @ strang.conj().T, np.eye(8), atol=1e-12)

    s = gaussian_state(p).residues()
    exact = evolve_exact(ClockState.from_residues(s, 0.0),
                         EvolutionSpec(clock=p, potential=pot, t=0.5)).residues()

    def error(m, strang_flag):
        spec = EvolutionSpec(clock=p, potential=pot, t=0.5, method="split", strang=strang_flag)
        return np.linalg.norm(split_propagator(spec, m) @ s - exact)

    # halving the step cuts the Lie error about 2x and the Strang error about 4x
    assert 1.6 < error(512, False) / error(1024, False) < 2.5
    assert 3.2 < error(512, True) / error(1024, True) < 5.0


def test_split_without_adaptation_uses_given_steps():
    p = ClockParams.symmetric(8, T0=1.0)
    spec = EvolutionSpec(clock=p, potential=CosinePotential(n=1), t=0.2, method="split",
                         steps=5, adaptive=False)
    _, m = evolve_split_residues(gaussian_state(p).residues(), spec)
    assert m == 5


def test_split_step_doubling_overflow(monkeypatch):
    import propagator

    monkeypatch.setattr(propagator, "MAX_SPLIT_STEPS", 4)
    p = ClockParams.symmetric(16, T0=1.0)
    spec = EvolutionSpec(clock=p, potential=CosinePotential(n=60), t=0.9, method="split", tol=1e-14)
    with pytest.raises(PropagationError):
        evolve_split_residues(gaussian_state(p).residues(), spec)


def test_evolve_dispatch_and_spec_validation():
    p = ClockParams.symmetric(8, T0=1.0)
    s = gaussian_state(p)
    pot = CosinePotential(n=3)
    a = evolve(s, EvolutionSpec(clock=p, potential=pot, t=0.3))
    b = evolve(s, EvolutionSpec(clock=p, potential=pot, t=0.3, method="split"))
    assert state_distance(a, b) < 1e-8
    with pytest.raises(ValueError):
        EvolutionSpec(clock=p, method="magnus")
    with pytest.raises(ValueError):
        EvolutionSpec(clock=p, steps=0)


def test_exact_cache_handles_many_potentials():
    clear_cache()
    p = ClockParams.symmetric(8, T0=1.0)
    s = gaussian_state(p)
    for n in range(1, 40):
        out = evolve_exact(s, EvolutionSpec(clock=p, potential=CosinePotential(n=n), t=0.5))
        assert out.norm() == pytest.approx(1.0, abs=1e-12)
    clear_cache()


def test_clock_with_potential_within_bound():
    """The evolved clock stays within bound_epsilon_v of the phased, shifted Gaussian."""
    p = ClockParams.symmetric(20, T0=20.0)
    pot = CosinePotential(n=60)
    s = initial_state(p, pot)
    assert state_distance(s, reference_state(p, pot, 0.0)) < 1e-14
    for t in (2.5, 5.0, 10.0, 20.0):
        evolved = evolve_exact(s, EvolutionSpec(clock=p, potential=pot, t=t))
        assert evolved.norm() == pytest.approx(1.0, abs=1e-12)
        report = bound_epsilon_v(p, pot, t)
        if report.valid:
            assert report.dominates(state_distance(evolved, reference_state(p, pot, t))), t


def test_wave_function_residual_free_case():
    p = ClockParams.symmetric(16, T0=1.0)
    s = gaussian_state(p)
    evolved = evolve_exact(s, EvolutionSpec(clock=p, t=0.25))
    assert wave_function_residual(p, None, 0.25, evolved) < 1e-3
    assert wave_function_residual(p, None, 0.0, s) < 1e-14
