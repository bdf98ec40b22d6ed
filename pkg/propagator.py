"""
Time evolution engines for chronon.

Three engines act on clock states stored as residue vectors in the time basis:
the free fast path (DFT, phases, inverse DFT), exact eigendecomposition of
H_c + c V_d, and split-operator (Strang or Lie) propagation.
"""

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Optional, Tuple

import numpy as np
import scipy.fft
import scipy.linalg

from clock_core import (
    ClockParams,
    ClockState,
    analytic_psi,
    hamiltonian_time_basis,
    normalization_constant,
    window,
)
from potentials import PeriodicPotential, ZeroPotential, theta_phase, v_d

EIGEN_CACHE_SIZE = 32
MAX_SPLIT_STEPS = 2 ** 24
SPLIT_TOLERANCE = 1e-9


class PropagationError(RuntimeError):
    """Raised when an engine cannot produce a result."""


@dataclass(frozen=True)
class EvolutionSpec:
    """What to evolve and how.

    Args:
        clock: Clock parameters (d, T0)
        potential: Potential V0, None for free evolution
        t: Evolution time in seconds
        method: 'exact' or 'split'
        steps: Initial number of split steps
        strang: Symmetric splitting (False gives plain Lie splitting)
        adaptive: Double the step count until successive results agree to tol
        tol: Step-doubling tolerance in l2
        coupling: Factor multiplying the potential operator
        system: Optional system attached to the clock (used by control)
    """

    clock: ClockParams
    potential: Optional[PeriodicPotential] = None
    t: float = 0.0
    method: str = "exact"
    steps: int = 1
    strang: bool = True
    adaptive: bool = True
    tol: float = SPLIT_TOLERANCE
    coupling: float = 1.0
    system: Optional[object] = None

    def __post_init__(self):
        if self.method not in ("exact", "split"):
            raise ValueError(f"Unknown method: {self.method}")
        if self.steps < 1:
            raise ValueError(f"Split needs steps >= 1, got {self.steps}")


def _free_phases(d: int, T0: float, t: float) -> np.ndarray:
    return np.exp(-1j * np.arange(d) * (2 * math.pi / T0) * t)


def potential_diagonal(pot: Optional[PeriodicPotential], d: int, T0: float) -> np.ndarray:
    # (d/T0) V_d(r) on residues r = 0..d-1, the diagonal of the potential operator
    if pot is None:
        return np.zeros(d)
    return (d / T0) * v_d(pot, d, np.arange(d, dtype=float))


def evolve_free_residues(vec: np.ndarray, T0: float, t: float) -> np.ndarray:
    energy = scipy.fft.fft(vec, norm="ortho")
    return scipy.fft.ifft(energy * _free_phases(len(vec), T0, t), norm="ortho")


def evolve_free(s: ClockState, p: ClockParams, t: float) -> ClockState:
    """exp(-i H_c t) applied through the energy basis; window follows k0 + t d/T0."""
    vec = evolve_free_residues(s.residues(), p.T0, t)
    return ClockState.from_residues(vec, s.center + t * p.d / p.T0)


@lru_cache(maxsize=EIGEN_CACHE_SIZE)
def _eigensystem(d: int, T0: float, potential: Optional[PeriodicPotential],
                 coupling: float) -> Tuple[np.ndarray, np.ndarray]:
    H = hamiltonian_time_basis(d, T0)
    if potential is not None and not isinstance(potential, ZeroPotential):
        H = H + coupling * np.diag(potential_diagonal(potential, d, T0))
    try:
        vals, vecs = scipy.linalg.eigh(H)
    except (scipy.linalg.LinAlgError, ValueError) as e:
        cond = np.linalg.cond(H)
        raise PropagationError(f"Eigensolver failed for d={d} (condition number {cond:.3e}): {e}")
    return vals, vecs


def clear_cache():
    _eigensystem.cache_clear()


def evolve_exact_residues(vec: np.ndarray, spec: EvolutionSpec) -> np.ndarray:
    vals, vecs = _eigensystem(spec.clock.d, spec.clock.T0, spec.potential, spec.coupling)
    return vecs @ (np.exp(-1j * vals * spec.t) * (vecs.conj().T @ vec))


def evolve_exact(s: ClockState, spec: EvolutionSpec) -> ClockState:
    """Reference integrator for H_c + coupling * V_d via cached eigendecomposition."""
    vec = evolve_exact_residues(s.residues(), spec)
    p = spec.clock
    return ClockState.from_residues(vec, s.center + spec.t * p.d / p.T0)


def _split_step_matrix(spec: EvolutionSpec, m: int) -> np.ndarray:
    p = spec.clock
    dt = spec.t / m
    v_diag = spec.coupling * potential_diagonal(spec.potential, p.d, p.T0)
    free = _free_phases(p.d, p.T0, dt)
    eye = np.eye(p.d, dtype=complex)
    kinetic = scipy.fft.ifft(free[:, None] * scipy.fft.fft(eye, axis=0, norm="ortho"),
                             axis=0, norm="ortho")
    if spec.strang:
        half = np.exp(-0.5j * dt * v_diag)
        return half[:, None] * kinetic * half[None, :]
    return np.exp(-1j * dt * v_diag)[:, None] * kinetic


def split_propagator(spec: EvolutionSpec, m: int) -> np.ndarray:
    """Product of m identical split steps, by repeated squaring."""
    return np.linalg.matrix_power(_split_step_matrix(spec, m), m)


def evolve_split_residues(vec: np.ndarray, spec: EvolutionSpec) -> Tuple[np.ndarray, int]:
    """Split-operator evolution of a residue vector.

    Returns:
        Tuple of (evolved vector, number of steps used)
    """
    m = spec.steps
    current = split_propagator(spec, m) @ vec
    if not spec.adaptive:
        return current, m
    while True:
        m *= 2
        if m > MAX_SPLIT_STEPS:
            raise PropagationError(
                f"Step doubling did not reach tol={spec.tol:g} within {MAX_SPLIT_STEPS} steps"
            )
        refined = split_propagator(spec, m) @ vec
        if np.linalg.norm(refined - current) < spec.tol:
            return refined, m
        current = refined


def evolve_split(s: ClockState, spec: EvolutionSpec) -> ClockState:
    vec, _ = evolve_split_residues(s.residues(), spec)
    p = spec.clock
    return ClockState.from_residues(vec, s.center + spec.t * p.d / p.T0)


def evolve(s: ClockState, spec: EvolutionSpec) -> ClockState:
    if spec.method == "split":
        return evolve_split(s, spec)
    return evolve_exact(s, spec)


def reference_state(p: ClockParams, pot: Optional[PeriodicPotential], t: float,
                    delta0: float = 0.0) -> ClockState:
    """Shifted Gaussian carrying the accumulated phase exp(-i Theta(Delta; k))."""
    shift = t * p.d / p.T0
    moved = p.shifted(shift)
    delta = delta0 + shift
    labels = window(p.d, moved.k0)
    amps = np.asarray(analytic_psi(moved, np.asarray(labels, dtype=float)), dtype=complex)
    if pot is not None:
        phases = np.array([theta_phase(pot, p.d, delta, k) for k in labels])
        amps = amps * np.exp(-1j * phases)
    return ClockState(amps=amps, window=tuple(labels), center=moved.k0)


def initial_state(p: ClockParams, pot: Optional[PeriodicPotential],
                  delta0: float = 0.0) -> ClockState:
    return reference_state(p, pot, 0.0, delta0)


def wave_function_residual(p: ClockParams, pot: Optional[PeriodicPotential], t: float,
                           evolved: ClockState, delta0: float = 0.0) -> float:
    """max over the window of |psi(x,t) - exp(-i int V_d) psi(x - t d/T0, 0)|.

    psi(x, 0) is the analytic extension of the initial state with its phase.
    """
    shift = t * p.d / p.T0
    labels = np.asarray(window(p.d, p.k0 + shift), dtype=float)
    A = normalization_constant(p)
    start = labels - shift
    initial = analytic_psi(p, start, A=A)
    if pot is not None:
        initial = initial * np.exp(-1j * np.array([theta_phase(pot, p.d, delta0, y) for y in start]))
        sweep = np.array([theta_phase(pot, p.d, shift, x) for x in labels])
        initial = initial * np.exp(-1j * sweep)
    measured = evolved.relabel(p.k0 + shift).amps
    return float(np.max(np.abs(measured - initial)))


def state_distance(a: ClockState, b: ClockState) -> float:
    """l2 distance between the physical states (window labels taken mod d)."""
    return float(np.linalg.norm(a.residues() - b.residues()))
