#!/usr/bin/env python3
"""
Tests for bounds: report bookkeeping, domination of measured errors and tail sums.
"""

import math
import sys
from pathlib import Path

import numpy as np
import pytest

# Add current directory to path
sys.path.insert(0, str(Path(__file__).parent))

from bounds import (
    GENERAL,
    SIGMA_SQRT_D,
    BoundReport,
    amplitude_upper,
    bound_commutator,
    bound_epsilon_c,
    bound_epsilon_v,
    exact_eps_nor,
    gaussian_tail,
    make_report,
    normalization_bracket,
    renormalization_bound,
    unitary_error_chain,
)
from clock_core import ClockParamError, ClockParams, commutator_residual, gaussian_state, normalization_constant
from potentials import CosinePotential
from propagator import EvolutionSpec, evolve_exact, reference_state, state_distance


def _reports():
    sym = ClockParams.symmetric(20, T0=20.0)
    narrow = ClockParams(d=24, T0=1.0, sigma=3.0, n0=11.5)
    odd = ClockParams.symmetric(17, T0=1.0)
    pot = CosinePotential(n=60)
    return [
        bound_epsilon_c(sym, 7.0),
        bound_epsilon_c(narrow, 0.3),
        bound_epsilon_v(sym, pot, 12.0),
        bound_epsilon_v(sym, pot, 12.0, b=50.0),
        bound_epsilon_v(narrow, CosinePotential(n=5), 0.6),
        bound_epsilon_v(sym, None, 3.0),
        bound_commutator(odd),
    ]


def test_totals_recombine_from_terms():
    for report in _reports():
        assert isinstance(report, BoundReport)
        assert abs(report.total - report.recombine()) <= 1e-12 * max(1.0, abs(report.total)), report.name
        payload = report.to_dict()
        assert payload["total"] == report.total
        assert set(payload["weights"]) <= set(payload["terms"])


def test_regime_tags():
    assert bound_epsilon_c(ClockParams.symmetric(16), 0.5).regime == SIGMA_SQRT_D
    assert bound_epsilon_c(ClockParams(d=16, T0=1.0, sigma=2.5, n0=7.5), 0.5).regime == GENERAL


def test_make_report_and_dominates():
    report = make_report("demo", {"a": 2.0, "b": 3.0, "c": 100.0}, {"a": 0.5, "b": 2.0}, GENERAL)
    assert report.total == pytest.approx(7.0)
    assert report.dominates(7.0)
    assert not report.dominates(7.1)
    assert report.dominates(7.1, floor=8.0)


def test_normalization_bracket_contains_exact():
    for d, sigma in ((8, math.sqrt(8)), (20, math.sqrt(20)), (30, 2.0), (12, 9.0)):
        p = ClockParams(d=d, T0=1.0, sigma=sigma, n0=(d - 1) / 2)
        lower, upper = normalization_bracket(p)
        a2 = normalization_constant(p) ** 2
        assert lower <= a2 <= upper, (d, sigma, lower, a2, upper)
        assert amplitude_upper(p) >= normalization_constant(p)


def test_normalization_bracket_is_tight_for_symmetric_state():
    lower, upper = normalization_bracket(ClockParams.symmetric(32))
    center = (lower + upper) / 2
    assert upper - lower <= 1e-20 * center


def test_renormalization_bound_covers_shifted_centers():
    p = ClockParams.symmetric(16)
    bound = renormalization_bound(p)
    base = normalization_constant(p)
    for dk in np.linspace(-0.5, 0.5, 11):
        ratio = base / normalization_constant(p.shifted(dk))
        assert abs(ratio - 1) <= bound + 1e-15, dk


def test_exact_eps_nor_vanishes_at_ticks_and_stays_tiny():
    p = ClockParams.symmetric(20, T0=1.0)
    for t in (0.0, 0.5, 0.75):
        assert abs(exact_eps_nor(p, t)) < 1e-15, t
    for t in (0.013, 0.77):
        assert abs(exact_eps_nor(p, t)) < 1e-12, t
    narrow = ClockParams(d=12, T0=1.0, sigma=2.0, n0=5.5)
    assert abs(exact_eps_nor(narrow, 0.37)) <= 10 * bound_epsilon_c(narrow, 0.37).terms["eps_nor"]


@pytest.mark.parametrize("d", [8, 12, 16, 20])
def test_epsilon_c_dominates_free_error(d):
    p = ClockParams.symmetric(d, T0=1.0)
    s = gaussian_state(p)
    for t in np.linspace(0.0, 1.0, 21):
        measured = state_distance(evolve_exact(s, EvolutionSpec(clock=p, t=t)), reference_state(p, None, t))
        assert bound_epsilon_c(p, t).dominates(measured, floor=1e-13), (d, t, measured)


def test_epsilon_c_dominates_for_non_symmetric_state():
    p = ClockParams(d=24, T0=1.0, sigma=4.0, n0=10.0)
    s = gaussian_state(p)
    for t in (0.1, 0.45, 0.8):
        measured = state_distance(evolve_exact(s, EvolutionSpec(clock=p, t=t)), reference_state(p, None, t))
        assert bound_epsilon_c(p, t).dominates(measured, floor=1e-13), t


def test_epsilon_v_branch_is_recorded():
    p = ClockParams.symmetric(20, T0=20.0)
    report = bound_epsilon_v(p, CosinePotential(n=60), 10.0)
    assert report.notes["eps_bar2_branch"] in ("exponential", "polynomial")
    assert report.terms["b"] == pytest.approx(CosinePotential(n=60).b_const)
    free = bound_epsilon_v(p, None, 10.0)
    assert free.terms["b"] == 0.0


def test_epsilon_v_grows_with_time():
    p = ClockParams.symmetric(20, T0=20.0)
    pot = CosinePotential(n=10)
    totals = [bound_epsilon_v(p, pot, t).total for t in (0.0, 5.0, 10.0, 20.0)]
    assert all(a < b for a, b in zip(totals, totals[1:])), totals


@pytest.mark.parametrize("d", [9, 17, 33])
def test_commutator_bound_dominates(d):
    for T0 in (1.0, 7.3):
        p = ClockParams.symmetric(d, T0)
        assert bound_commutator(p).dominates(commutator_residual(p)["residual"]), (d, T0)


def test_commutator_residual_independent_of_T0():
    for d in (9, 17, 33):
        a = commutator_residual(ClockParams.symmetric(d, 1.0))["residual"]
        b = commutator_residual(ClockParams.symmetric(d, 7.3))["residual"]
        assert abs(a - b) < 1e-12, d


def test_commutator_bound_rejects_even_d_and_edge_states():
    with pytest.raises(ClockParamError):
        bound_commutator(ClockParams.symmetric(16))
    with pytest.raises(ClockParamError):
        bound_commutator(ClockParams(d=9, T0=1.0, sigma=3.0, n0=4.0, k0=5.0))


def _brute_tail(a, X, Delta, moment):
    n = np.arange(a, a + 2000, dtype=float)
    y = n - X
    return float(np.sum(y ** moment * np.exp(-y ** 2 / Delta ** 2)))


def test_gaussian_tail_dominates_brute_force():
    rng = np.random.default_rng(2024)
    for _ in range(200):
        moment = int(rng.integers(0, 3))
        X = float(rng.uniform(-20, 20))
        Delta = float(rng.uniform(0.3, 6.0))
        margin = {0: 0.0, 1: Delta, 2: math.sqrt(2) * Delta}[moment]
        a = math.floor(X + margin) + 1 + int(rng.integers(0, 5))
        bound = gaussian_tail(a, X, Delta, moment)
        brute = _brute_tail(a, X, Delta, moment)
        assert brute <= bound * (1 + 1e-12), (a, X, Delta, moment, brute, bound)


def test_gaussian_tail_domain_errors():
    with pytest.raises(ValueError):
        gaussian_tail(0, 0.5, 1.0, 0)
    with pytest.raises(ValueError):
        gaussian_tail(1, 0.5, 1.0, 1)
    with pytest.raises(ValueError):
        gaussian_tail(1, 0.0, 1.0, 2)
    with pytest.raises(ValueError):
        gaussian_tail(3, 0.0, 1.0, 3)


def test_unitary_error_chain_adds():
    assert unitary_error_chain([1e-3, 2e-3, 0.0]) == pytest.approx(3e-3)
    with pytest.raises(ValueError):
        unitary_error_chain([1e-3, -1e-9])
