"""
Clock-controlled energy-preserving unitaries for chronon.

A d_s-dimensional system with Hamiltonian sum E_j |phi_j><phi_j| and
interaction sum Omega_j |phi_j><phi_j| is driven by the clock through the
potential operator. The module evolves the joint state, compares the
system's reduced state with the ideal time-dependent-Hamiltonian evolution,
and evaluates the control-side bounds.
"""

import math
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np
import scipy.linalg
from scipy.optimize import minimize_scalar

from bounds import BoundReport, amplitude_upper, bound_epsilon_v, make_report
from clock_core import (
    ClockParams,
    analytic_psi,
    gaussian_state,
    hamiltonian_time_basis,
    normalization_constant,
    pure_density,
    trace_norm,
)
from potentials import CosinePotential, PeriodicPotential, cosine_b
from propagator import EvolutionSpec, evolve_exact_residues, potential_diagonal

# Largest joint dimension d_s * d handled at desk scale
MAX_JOINT_DIM = 4096
KAPPA_GRID = 64
DENSITY_TOLERANCE = 1e-10
DEFAULT_TIME_POINTS = 201

PulseIntegral = Callable[[float], float]


class SystemSpecError(ValueError):
    """Raised for an invalid controlled system."""


@dataclass(frozen=True, eq=False)
class SystemSpec:
    """Controlled system in the joint eigenbasis of H_s and H_int.

    Args:
        energies: E_j
        interaction_phases: Omega_j, each in [-pi, pi)
        initial_state: d_s x d_s density matrix
    """

    energies: np.ndarray
    interaction_phases: np.ndarray
    initial_state: np.ndarray

    def __post_init__(self):
        energies = np.asarray(self.energies, dtype=float)
        phases = np.asarray(self.interaction_phases, dtype=float)
        rho = np.asarray(self.initial_state, dtype=complex)
        object.__setattr__(self, "energies", energies)
        object.__setattr__(self, "interaction_phases", phases)
        object.__setattr__(self, "initial_state", rho)
        d_s = len(energies)
        if d_s < 1:
            raise SystemSpecError("system needs at least one level")
        if phases.shape != (d_s,):
            raise SystemSpecError(f"expected {d_s} interaction phases, got {phases.shape}")
        if np.any(phases < -math.pi) or np.any(phases >= math.pi):
            raise SystemSpecError(f"interaction phases must lie in [-pi, pi), got {phases}")
        if rho.shape != (d_s, d_s):
            raise SystemSpecError(f"initial state must be {d_s}x{d_s}, got {rho.shape}")
        if not np.allclose(rho, rho.conj().T, atol=DENSITY_TOLERANCE):
            raise SystemSpecError("initial state is not Hermitian")
        if abs(np.trace(rho).real - 1) > DENSITY_TOLERANCE:
            raise SystemSpecError(f"initial state trace is {np.trace(rho).real}, expected 1")
        if np.linalg.eigvalsh((rho + rho.conj().T) / 2).min() < -DENSITY_TOLERANCE:
            raise SystemSpecError("initial state is not positive semidefinite")

    @property
    def d_s(self) -> int:
        return len(self.energies)

    @property
    def purity_factor(self) -> float:
        """sqrt(d_s tr rho^2)."""
        return math.sqrt(self.d_s * float(np.trace(self.initial_state @ self.initial_state).real))

    @classmethod
    def from_pure(cls, vec: Sequence[complex], energies: Sequence[float],
                  interaction_phases: Sequence[float]) -> "SystemSpec":
        v = np.asarray(vec, dtype=complex)
        v = v / np.linalg.norm(v)
        return cls(energies=energies, interaction_phases=interaction_phases,
                   initial_state=pure_density(v))

    def to_dict(self) -> Dict[str, object]:
        rho = self.initial_state
        return {
            "d_s": self.d_s,
            "energies": self.energies.tolist(),
            "interaction_phases": self.interaction_phases.tolist(),
            "initial_state_re": rho.real.tolist(),
            "initial_state_im": rho.imag.tolist(),
        }


@dataclass
class ControlRun:
    time_grid: np.ndarray
    rho_ideal: List[np.ndarray] = field(default_factory=list)
    rho_clocked: List[np.ndarray] = field(default_factory=list)
    clock_reduced: List[np.ndarray] = field(default_factory=list)
    distances: List[float] = field(default_factory=list)
    bounds: List[BoundReport] = field(default_factory=list)
    disturbance: Tuple[float, float] = (0.0, 0.0)

    def rows(self) -> List[Dict[str, object]]:
        out = []
        for t, dist, report in zip(self.time_grid, self.distances, self.bounds):
            row = {"t": float(t), "distance": dist, "bound_total": report.total,
                   "valid": report.valid}
            for key in ("eps_v", "eps_v_omega_dyn", "eps_V", "purity_factor"):
                row[key] = report.terms.get(key, float("nan"))
            out.append(row)
        return out


def random_pure_state(d_s: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-random pure state vector."""
    v = rng.normal(size=d_s) + 1j * rng.normal(size=d_s)
    return v / np.linalg.norm(v)


def pulse_from_potential(pot: Optional[PeriodicPotential], T0: float) -> PulseIntegral:
    """int_0^t g with g(t) = (2pi/T0) V0(2pi t/T0)."""
    if pot is None:
        return lambda t: 0.0
    return lambda t: pot.integral(0.0, 2 * math.pi * t / T0)


def _check_joint_dim(sys: SystemSpec, p: ClockParams):
    if sys.d_s * p.d > MAX_JOINT_DIM:
        raise SystemSpecError(
            f"joint dimension {sys.d_s * p.d} exceeds the cap of {MAX_JOINT_DIM}"
        )


def dense_footprint_bytes(d_s: int, d: int) -> int:
    """Memory of one dense complex joint matrix."""
    return (d_s * d) ** 2 * 16


def ideal_evolution(sys: SystemSpec, g_pulse: PulseIntegral, t: float) -> np.ndarray:
    """rho_mn exp(-i(E_m - E_n)t) exp(-i(Omega_m - Omega_n) int_0^t g)."""
    phase = sys.energies * t + sys.interaction_phases * g_pulse(t)
    u = np.exp(-1j * phase)
    return sys.initial_state * np.outer(u, u.conj())


def _clock_branches(sys: SystemSpec, p: ClockParams, pot: Optional[PeriodicPotential],
                    t: float) -> np.ndarray:
    """Rows are exp(-it(H_c + Omega_j V_d)) Psi_nor for each level j."""
    psi = gaussian_state(p).residues()
    cache: Dict[float, np.ndarray] = {}
    rows = []
    for omega in sys.interaction_phases:
        key = float(omega)
        if key not in cache:
            spec = EvolutionSpec(clock=p, potential=pot, t=t, coupling=key)
            cache[key] = evolve_exact_residues(psi, spec)
        rows.append(cache[key])
    return np.array(rows)


def joint_evolution(sys: SystemSpec, p: ClockParams, pot: Optional[PeriodicPotential],
                    t: float) -> Tuple[np.ndarray, np.ndarray]:
    """Reduced system and clock states after joint evolution for time t.

    The joint Hamiltonian is block diagonal in the system basis, so each
    block only needs the clock vector Phi_j evolved under H_c + Omega_j V_d.

    Returns:
        (rho_s, rho_c)
    """
    _check_joint_dim(sys, p)
    phi = _clock_branches(sys, p, pot, t)
    overlaps = phi.conj() @ phi.T  # overlaps[n, m] = <Phi_n|Phi_m>
    u = np.exp(-1j * sys.energies * t)
    rho = sys.initial_state
    rho_s = rho * np.outer(u, u.conj()) * overlaps.T
    weights = np.real(np.diag(rho))
    rho_c = np.einsum("j,ja,jb->ab", weights, phi, phi.conj())
    return rho_s, rho_c


def joint_evolution_dense(sys: SystemSpec, p: ClockParams, pot: Optional[PeriodicPotential],
                          t: float) -> Tuple[np.ndarray, np.ndarray]:
    """Same as joint_evolution through the full (d_s d)-dimensional Hamiltonian."""
    _check_joint_dim(sys, p)
    d_s, d = sys.d_s, p.d
    H_c = hamiltonian_time_basis(d, p.T0)
    V = np.diag(potential_diagonal(pot, d, p.T0)).astype(complex)
    H = (np.kron(np.diag(sys.energies), np.eye(d)) + np.kron(np.eye(d_s), H_c)
         + np.kron(np.diag(sys.interaction_phases), V))
    U = scipy.linalg.expm(-1j * t * H)
    psi = gaussian_state(p).residues()
    rho0 = np.kron(sys.initial_state, pure_density(psi))
    rho_t = (U @ rho0 @ U.conj().T).reshape(d_s, d, d_s, d)
    return np.einsum("ajbj->ab", rho_t), np.einsum("jajb->ab", rho_t)


def _mismatch_sum(p: ClockParams, pot: PeriodicPotential, t: float, kappa_bar: float,
                  A: float) -> float:
    # sum over d + 1 points y = k0 - d/2 + kappa_bar + j
    y = p.k0 - p.d / 2 + kappa_bar + np.arange(p.d + 1)
    upper = 2 * math.pi * t / p.T0
    base = pot.integral(0.0, upper)
    shifts = 2 * math.pi * y / p.d
    eps = np.array([2 * math.pi * abs(base - pot.integral(s, upper + s)) for s in shifts])
    weight = np.abs(analytic_psi(p, y, A=A)) ** 2
    return float(np.sum((eps ** 2 + eps) * weight))


def eps_V_implicit(p: ClockParams, pot: Optional[PeriodicPotential], t: float,
                   grid: int = KAPPA_GRID) -> float:
    """Potential-mismatch term, maximized over the window offset kappa_bar in [0, 1].

    The maximum is taken on a uniform grid and refined by bounded scalar
    minimization around the best grid point.
    """
    if pot is None:
        return 0.0
    A = normalization_constant(p)
    kappas = np.linspace(0.0, 1.0, grid)
    values = np.array([_mismatch_sum(p, pot, t, k, A) for k in kappas])
    best = int(np.argmax(values))
    lo = kappas[max(best - 1, 0)]
    hi = kappas[min(best + 1, grid - 1)]
    refined = minimize_scalar(lambda k: -_mismatch_sum(p, pot, t, k, A), bounds=(lo, hi),
                              method="bounded", options={"xatol": 1e-6})
    return max(float(values[best]), float(-refined.fun))


def _eps_v_pair(p: ClockParams, pot: Optional[PeriodicPotential], t: float) -> Tuple[BoundReport, BoundReport]:
    """eps_v at Omega = pi and at the potential's own Omega."""
    if isinstance(pot, CosinePotential):
        at_pi = bound_epsilon_v(p, pot, t, b=cosine_b(pot.n, math.pi))
    else:
        at_pi = bound_epsilon_v(p, pot, t)
    return at_pi, bound_epsilon_v(p, pot, t)


def _combine(name: str, sys: SystemSpec, eps_v: BoundReport, dyn: BoundReport, eps_V: float,
             valid: bool, extra: Optional[Dict[str, float]] = None,
             notes: Optional[Dict[str, object]] = None) -> BoundReport:
    pf = sys.purity_factor
    ev = eps_v.total
    terms = {
        "eps_v": ev,
        "eps_v_sq": ev ** 2,
        "eps_V": eps_V,
        "eps_v_omega_dyn": dyn.total,
        "purity_factor": pf,
    }
    terms.update(extra or {})
    weights = {"eps_v": 2 * pf, "eps_v_sq": pf, "eps_V": pf}
    return make_report(name, terms, weights, eps_v.regime, valid=valid and eps_v.valid,
                   notes=notes)


def trace_distance_bound_implicit(sys: SystemSpec, p: ClockParams,
                                  pot: Optional[PeriodicPotential], t: float) -> BoundReport:
    """sqrt(d_s tr rho^2) (2 eps_v + eps_v^2 + eps_V) with eps_v taken at Omega = pi."""
    eps_v, dyn = _eps_v_pair(p, pot, t)
    return _combine("control_implicit", sys, eps_v, dyn, eps_V_implicit(p, pot, t), True)


def _kappa_tilde(d: int, gamma_psi: float) -> float:
    if d * gamma_psi / 2 <= 1:
        return 0.0
    return (gamma_psi / 2 - 1 / d) ** 2


def tilde_eps_V(pot: PeriodicPotential, x_vr: float) -> float:
    """Fraction of the pulse area outside [x0 - x_vr, x0 + x_vr], independent of Omega."""
    if pot.omega == 0:
        return 0.0
    return 1.0 - pot.integral(pot.x0 - x_vr, pot.x0 + x_vr) / pot.omega


def eps_V_explicit(p: ClockParams, pot: CosinePotential, x_vr: float,
                   gamma_psi: float) -> Tuple[float, Dict[str, float]]:
    """Closed-form bound on eps_V; the first term is infinite when kappa_tilde = 0."""
    A2 = amplitude_upper(p) ** 2
    kt = _kappa_tilde(p.d, gamma_psi)
    tail = tilde_eps_V(pot, x_vr)
    if kt == 0:
        gaussian_part = math.inf
    else:
        gaussian_part = ((1 + 2 * math.pi) * A2 * math.exp(-2 * math.pi * kt * p.d ** 2 / p.sigma ** 2)
                         / -math.expm1(-4 * math.pi * math.sqrt(kt) * p.d / p.sigma ** 2))
    value = 4 * math.pi * (gaussian_part + 2 * tail * (1 + 8 * math.pi * tail))
    return value, {"kappa_tilde": kt, "tilde_eps_V": tail, "gaussian_part": gaussian_part}


def explicit_window_ok(p: ClockParams, pot: CosinePotential, t: float, x_vr: float,
                       gamma_psi: float) -> bool:
    """Preconditions of the explicit form: k0 = 0, admissible x0 and t outside the band."""
    reach = x_vr + math.pi * gamma_psi
    x = 2 * math.pi * t / p.T0
    if p.k0 != 0 or not 0 < gamma_psi <= 1 or not 0 < x_vr <= math.pi:
        return False
    if not reach <= pot.x0 <= 2 * math.pi - reach:
        return False
    before = 0 <= x <= pot.x0 - reach
    after = pot.x0 + reach <= x <= 2 * math.pi + pot.x0 - reach
    return before or after


def trace_distance_bound_explicit(sys: SystemSpec, p: ClockParams, pot: CosinePotential,
                                  t: float, x_vr: float, gamma_psi: float) -> BoundReport:
    """Implicit-form bound with eps_V replaced by its closed-form estimate."""
    eps_v, dyn = _eps_v_pair(p, pot, t)
    value, extra = eps_V_explicit(p, pot, x_vr, gamma_psi)
    valid = explicit_window_ok(p, pot, t, x_vr, gamma_psi)
    return _combine("control_explicit", sys, eps_v, dyn, value, valid, extra=extra,
                    notes={"x_vr": x_vr, "gamma_psi": gamma_psi})


def section_mapping(T0: float, t1: float, t2: float) -> Tuple[float, float]:
    """(x0, x_vr + pi gamma_psi) for a pulse supported on [t1, t2]."""
    return math.pi * (t1 + t2) / T0, math.pi * (t2 - t1) / T0


def section_form_bound(sys: SystemSpec, p: ClockParams, pot: CosinePotential, t: float,
                       t1: float, t2: float, x_vr: Optional[float] = None) -> BoundReport:
    """Bound for a pulse supported on [t1, t2], valid for t in [0, t1] or [t2, T0].

    Args:
        x_vr: Half-width of the peak window; defaults to half the pulse reach
    """
    x0, reach = section_mapping(p.T0, t1, t2)
    if x_vr is None:
        x_vr = reach / 2
    gamma_psi = (reach - x_vr) / math.pi
    tail = tilde_eps_V(pot, x_vr)
    valid = (0 < t1 < t2 < p.T0 and 0 < gamma_psi <= 1 and abs(x0 - pot.x0) < 1e-9
             and (0 <= t <= t1 or t2 <= t <= p.T0))
    if 0 < gamma_psi <= 1:
        eps_V_d, extra = eps_V_explicit(p, pot, x_vr, gamma_psi)
    else:
        eps_V_d, extra = math.inf, {"kappa_tilde": 0.0, "tilde_eps_V": tail, "gaussian_part": math.inf}
    pulse = 2 * math.pi * p.T0 * tail * (2 * math.pi * p.T0 * tail + 1)
    extra.update({"eps_V_d": eps_V_d, "pulse_term": pulse, "x0": x0})
    eps_v, dyn = _eps_v_pair(p, pot, t)
    return _combine("control_section", sys, eps_v, dyn, eps_V_d + pulse, valid, extra=extra,
                    notes={"t1": t1, "t2": t2, "x_vr": x_vr, "gamma_psi": gamma_psi})


def clock_disturbance(sys: SystemSpec, p: ClockParams,
                      pot: Optional[PeriodicPotential]) -> Tuple[float, float]:
    """Half trace distance between the reduced clock at 0 and at T0, and its bound."""
    _, rho_c = joint_evolution(sys, p, pot, p.T0)
    initial = pure_density(gaussian_state(p).residues())
    measured = 0.5 * trace_norm(rho_c - initial)
    # the branches see Omega_j V_d with |Omega_j| up to pi, not the potential's own Omega
    return measured, _eps_v_pair(p, pot, p.T0)[0].total


def _control_point(sys: SystemSpec, p: ClockParams, pot: Optional[PeriodicPotential],
                   t: float) -> Tuple[np.ndarray, np.ndarray, np.ndarray, BoundReport]:
    ideal = ideal_evolution(sys, pulse_from_potential(pot, p.T0), t)
    rho_s, rho_c = joint_evolution(sys, p, pot, t)
    return ideal, rho_s, rho_c, trace_distance_bound_implicit(sys, p, pot, t)


def control_run(sys: SystemSpec, p: ClockParams, pot: Optional[PeriodicPotential],
                times: Optional[Sequence[float]] = None, mapper: Callable = map) -> ControlRun:
    """Ideal versus clocked system states and the implicit bound over a time grid.

    Args:
        mapper: map-like callable used to spread grid points over workers
    """
    grid = np.linspace(0.0, p.T0, DEFAULT_TIME_POINTS) if times is None else np.asarray(times, dtype=float)
    run = ControlRun(time_grid=grid)
    for ideal, rho_s, rho_c, report in mapper(lambda t: _control_point(sys, p, pot, t), grid):
        run.rho_ideal.append(ideal)
        run.rho_clocked.append(rho_s)
        run.clock_reduced.append(rho_c)
        run.distances.append(trace_norm(ideal - rho_s))
        run.bounds.append(report)
    run.disturbance = clock_disturbance(sys, p, pot)
    return run
