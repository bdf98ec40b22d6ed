#!/usr/bin/env python3
"""
Tests for clock_core: windows, DFT, Gaussian states and operators.
Run with pytest from the repository root.
"""

import math
import sys
from pathlib import Path

import numpy as np
import pytest

# Add current directory to path
sys.path.insert(0, str(Path(__file__).parent))

from clock_core import (
    ENERGY,
    BasisError,
    ClockParamError,
    ClockParams,
    ClockState,
    analytic_psi_tilde,
    build_hamiltonian,
    centered_hamiltonian,
    commutator_residual,
    dft_energy_to_time,
    dft_time_to_energy,
    gaussian_state,
    hamiltonian_time_basis,
    normalization_constant,
    peres_spread,
    poisson_sum_check,
    pure_density,
    state_metrics,
    time_moments,
    time_operator,
    trace_norm,
    window,
)


def test_window_follows_half_open_interval():
    """k0 - d/2 < k <= k0 + d/2."""
    assert window(4, 0) == [-1, 0, 1, 2]
    assert window(5, 0) == [-2, -1, 0, 1, 2]
    assert window(4, 0.5) == [-1, 0, 1, 2]
    assert window(4, 1.0) == [0, 1, 2, 3]
    assert window(3, 10.2) == [9, 10, 11]
    for d in (4, 7, 10):
        for k0 in (-3.3, 0.0, 2.5, 11.9):
            labels = window(d, k0)
            assert len(labels) == d
            assert all(k0 - d / 2 < k <= k0 + d / 2 for k in labels), (d, k0, labels)


def test_clock_params_validation():
    with pytest.raises(ClockParamError):
        ClockParams(d=8, T0=1.0, sigma=9.0, n0=3.5)
    with pytest.raises(ClockParamError):
        ClockParams(d=8, T0=0.0, sigma=2.0, n0=3.5)
    with pytest.raises(ClockParamError):
        ClockParams(d=8, T0=1.0, sigma=2.0, n0=7.0)
    p = ClockParams.symmetric(16, T0=2.0)
    assert p.is_symmetric
    assert p.n0 == pytest.approx(7.5)
    assert p.omega == pytest.approx(math.pi)


def test_dft_is_unitary_and_inverts():
    """fft and direct transforms agree, preserve the norm and invert each other."""
    rng = np.random.default_rng(7)
    for d in (6, 8, 11, 13):
        vec = rng.normal(size=d) + 1j * rng.normal(size=d)
        vec /= np.linalg.norm(vec)
        s = ClockState.from_residues(vec, center=2.3)
        direct = dft_time_to_energy(s, method="direct")
        fast = dft_time_to_energy(s, method="fft")
        np.testing.assert_allclose(direct.amps, fast.amps, atol=1e-12)
        assert direct.basis == ENERGY
        assert direct.norm() == pytest.approx(1.0, abs=1e-12)
        back = dft_energy_to_time(direct, method="direct")
        np.testing.assert_allclose(back.amps, s.amps, atol=1e-12)
        assert back.window == s.window


def test_dft_sign_convention():
    """The time state |theta_k> has energy amplitudes exp(-i 2pi n k/d)/sqrt(d)."""
    d, k = 8, 3
    vec = np.zeros(d, dtype=complex)
    vec[k] = 1.0
    energy = dft_time_to_energy(ClockState.from_residues(vec, center=0.0))
    n = np.arange(d)
    np.testing.assert_allclose(energy.amps, np.exp(-2j * np.pi * n * k / d) / math.sqrt(d), atol=1e-12)


def test_dft_rejects_wrong_basis():
    s = gaussian_state(ClockParams.symmetric(8))
    energy = dft_time_to_energy(s)
    with pytest.raises(BasisError):
        dft_time_to_energy(energy)
    with pytest.raises(BasisError):
        dft_energy_to_time(s)


def test_hamiltonian_matches_energy_basis():
    p = ClockParams.symmetric(9, T0=3.0)
    h_time = hamiltonian_time_basis(p.d, p.T0)
    np.testing.assert_allclose(h_time, h_time.conj().T, atol=1e-12)
    np.testing.assert_allclose(np.sort(np.linalg.eigvalsh(h_time)),
                               np.diag(build_hamiltonian(p)).real, atol=1e-10)


def test_gaussian_state_normalized():
    for d in (4, 9, 20, 64):
        for k0 in (0.0, 0.4, -2.5):
            p = ClockParams(d=d, T0=1.0, sigma=math.sqrt(d), n0=(d - 1) / 2, k0=k0)
            s = gaussian_state(p)
            assert s.norm() == pytest.approx(1.0, abs=1e-12), (d, k0)
            assert list(s.window) == window(d, k0)
    p = ClockParams.symmetric(20)
    assert normalization_constant(p) ** 2 * p.sigma / math.sqrt(2) == pytest.approx(1.0, abs=1e-6)


def test_poisson_summation_consistency():
    """sum psi(m) equals sqrt(d) sum psi_tilde(m d) for several centers."""
    for d, k0 in ((8, 0.0), (12, 0.3), (17, -1.7)):
        p = ClockParams(d=d, T0=1.0, sigma=math.sqrt(d), n0=(d - 1) / 2, k0=k0)
        lhs, rhs = poisson_sum_check(p)
        assert abs(lhs - rhs) < 1e-10, (d, k0, lhs, rhs)


def test_psi_tilde_matches_dft_for_large_d():
    """Energy amplitudes of the Gaussian approach psi_tilde(n) inside the window."""
    p = ClockParams.symmetric(64)
    energy = dft_time_to_energy(gaussian_state(p)).amps
    n = np.arange(p.d)
    expected = analytic_psi_tilde(p, n)
    assert np.max(np.abs(energy - expected)) < 1e-10


def test_peres_spread_matches_free_evolution():
    """exp(-i H x T0/d)|theta_k> by formula and by diagonalizing H."""
    d, T0 = 8, 1.0
    H = hamiltonian_time_basis(d, T0)
    vals, vecs = np.linalg.eigh(H)
    for k in (0, 3):
        for x in (0.25, 1.5, 3.9):
            start = np.zeros(d, dtype=complex)
            start[k] = 1.0
            evolved = vecs @ (np.exp(-1j * vals * x * T0 / d) * (vecs.conj().T @ start))
            np.testing.assert_allclose(peres_spread(d, k, x), evolved, atol=1e-10)


def test_peres_spread_integer_shift_is_exact():
    out = peres_spread(8, 6, 3.0)
    assert out[1] == 1.0
    assert np.count_nonzero(out) == 1
    near = peres_spread(8, 0, 2.0 + 1e-15)
    assert near[2] == 1.0


def test_time_moments_of_time_states():
    d, T0 = 8, 2.0
    for k in range(d):
        vec = np.zeros(d, dtype=complex)
        vec[k] = 1.0
        mean, var = time_moments(ClockState.from_residues(vec, center=0.0), T0)
        assert mean == pytest.approx(k * T0 / d, abs=1e-12)
        assert var == pytest.approx(0.0, abs=1e-12)
    np.testing.assert_allclose(np.diag(time_operator(d, T0)).real, np.arange(d) * T0 / d)


def test_commutator_diagonal_vanishes():
    for d in (9, 17, 33):
        result = commutator_residual(ClockParams.symmetric(d))
        assert np.max(np.abs(result["diagonal"])) < 1e-12, d


def test_commutator_residual_decreases_with_d():
    residuals = [commutator_residual(ClockParams.symmetric(d))["residual"] for d in (9, 17, 33)]
    assert residuals[0] > residuals[1] > residuals[2], residuals


def test_centered_hamiltonian_needs_odd_d():
    with pytest.raises(ClockParamError):
        centered_hamiltonian(8, 1.0)
    vals = np.linalg.eigvalsh(centered_hamiltonian(5, 2 * math.pi))
    np.testing.assert_allclose(vals, [-2, -1, 0, 1, 2], atol=1e-12)


def test_state_metrics_and_trace_norm():
    a = pure_density(np.array([1.0, 0.0]))
    b = pure_density(np.array([1.0, 1.0]) / math.sqrt(2))
    metrics = state_metrics(a, b)
    assert metrics.trace_distance == pytest.approx(1 / math.sqrt(2), abs=1e-12)
    assert metrics.fidelity == pytest.approx(1 / math.sqrt(2), abs=1e-10)
    assert trace_norm(a - b) == pytest.approx(math.sqrt(2), abs=1e-12)
    same = state_metrics(a, a)
    assert same.trace_distance == pytest.approx(0.0, abs=1e-12)
    assert same.fidelity == pytest.approx(1.0, abs=1e-10)
    with pytest.raises(ValueError):
        state_metrics(a, 2 * b)
