"""
Periodic control potentials for chronon.

A potential V0 is a real 2pi-periodic function. From it the clock builds the
stretched potential V_d(x) = (2pi/d) V0(2pi x/d), the accumulated phase
Theta(Delta; x) and the theta-diagonal operator (d/T0) sum_k V_d(k)|theta_k><theta_k|.
"""

import math
from dataclasses import dataclass
from typing import Any, Callable, Dict, List, Optional, Tuple

import numpy as np
from scipy import integrate
from scipy.special import gammaln

from clock_core import ClockParams, window

# Bell-number constant entering the decay rate parameters
KAPPA = 0.792
# Above this value of |Omega| sqrt(n) the cosine b grows as n^{3/2}
COSINE_B_THRESHOLD = (2 * math.pi) ** 1.5 / (math.sqrt(2) * math.e ** 2)

NUMERIC_B_GRID = 4096
NUMERIC_B_KMAX = 40
QUAD_EPSREL = 1e-10


class PotentialSpecError(ValueError):
    """Raised for invalid potential parameters or JSON specs."""


def _check_omega(omega: float):
    if not -math.pi <= omega < math.pi:
        raise PotentialSpecError(f"omega must lie in [-pi, pi), got {omega}")


class PeriodicPotential:
    """A real 2pi-periodic potential V0 with period integral omega."""

    omega: float = 0.0

    def evaluate(self, x):
        raise NotImplementedError

    def integral(self, a: float, b: float) -> float:
        raise NotImplementedError

    @property
    def b_const(self) -> float:
        raise NotImplementedError

    def to_spec(self) -> Dict[str, Any]:
        raise NotImplementedError


@dataclass(frozen=True)
class ZeroPotential(PeriodicPotential):
    omega: float = 0.0

    def evaluate(self, x):
        return np.zeros_like(np.asarray(x, dtype=float))

    def integral(self, a: float, b: float) -> float:
        return 0.0

    @property
    def b_const(self) -> float:
        return 0.0

    def to_spec(self) -> Dict[str, Any]:
        return {"type": "zero"}


@dataclass(frozen=True)
class ConstantPotential(PeriodicPotential):
    """V0 = omega / (2pi)."""

    omega: float = 0.0

    def __post_init__(self):
        _check_omega(self.omega)

    def evaluate(self, x):
        return np.full_like(np.asarray(x, dtype=float), self.omega / (2 * math.pi))

    def integral(self, a: float, b: float) -> float:
        return self.omega * (b - a) / (2 * math.pi)

    @property
    def b_const(self) -> float:
        # only the k=1 term survives
        return abs(self.omega) / math.pi

    def to_spec(self) -> Dict[str, Any]:
        return {"type": "constant", "omega": self.omega}


def cosine_amplitude(n: int, omega: float) -> float:
    """A_c = omega 2^{2n} / (2pi C(2n, n)), evaluated in log space."""
    log_ratio = 2 * n * math.log(2) - (gammaln(2 * n + 1) - 2 * gammaln(n + 1))
    return omega / (2 * math.pi) * math.exp(log_ratio)


def _harmonic_weights(n: int) -> np.ndarray:
    # C(2n, n-j) / C(2n, n) for j = 1..n
    j = np.arange(1, n + 1)
    return np.exp(2 * gammaln(n + 1) - gammaln(n - j + 1) - gammaln(n + j + 1))


@dataclass(frozen=True)
class CosinePotential(PeriodicPotential):
    """V0(x) = A_c cos^{2n}((x - x0)/2), peaked at x0.

    Args:
        n: Steepness (positive integer)
        omega: Period integral
        x0: Peak location in radians
    """

    n: int
    omega: float = 1.0
    x0: float = math.pi

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 1:
            raise PotentialSpecError(f"n must be a positive integer, got {self.n}")
        _check_omega(self.omega)

    @property
    def amplitude(self) -> float:
        return cosine_amplitude(self.n, self.omega)

    def evaluate(self, x):
        y = (np.asarray(x, dtype=float) - self.x0) / 2
        return self.amplitude * np.cos(y) ** (2 * self.n)

    def integral(self, a: float, b: float) -> float:
        """Exact antiderivative from the binomial expansion of cos^{2n}."""
        j = np.arange(1, self.n + 1)
        weights = _harmonic_weights(self.n)
        upper = np.sin(j * (b - self.x0)) / j
        lower = np.sin(j * (a - self.x0)) / j
        oscillating = 2 * float(np.sum(weights * (upper - lower)))
        return self.omega / (2 * math.pi) * ((b - a) + oscillating)

    @property
    def b_const(self) -> float:
        return cosine_b(self.n, self.omega)

    def to_spec(self) -> Dict[str, Any]:
        return {"type": "cosine", "n": self.n, "omega": self.omega, "x0": self.x0}


class FunctionPotential(PeriodicPotential):
    """Generic potential from a callable, integrated by adaptive quadrature."""

    def __init__(self, func: Callable[[np.ndarray], np.ndarray],
                 b_const: Optional[float] = None, name: str = "function"):
        self.func = func
        self.name = name
        omega, _ = integrate.quad(lambda x: float(func(x)), 0.0, 2 * math.pi,
                                  epsrel=QUAD_EPSREL, limit=200)
        _check_omega(omega)
        self.omega = omega
        self._b_const = b_const

    def evaluate(self, x):
        return np.asarray(self.func(np.asarray(x, dtype=float)), dtype=float)

    def _quad(self, a: float, b: float) -> float:
        value, _ = integrate.quad(lambda x: float(self.func(x)), a, b,
                                  epsrel=QUAD_EPSREL, limit=200)
        return value

    def integral(self, a: float, b: float) -> float:
        sign = 1.0
        if b < a:
            a, b, sign = b, a, -1.0
        periods = math.floor((b - a) / (2 * math.pi))
        rest = self._quad(a + periods * 2 * math.pi, b) if b > a + periods * 2 * math.pi else 0.0
        return sign * (periods * self.omega + rest)

    @property
    def b_const(self) -> float:
        if self._b_const is None:
            self._b_const = numeric_b(self).value
        return self._b_const

    def to_spec(self) -> Dict[str, Any]:
        """Report-only: the callable itself is not serialized."""
        return {"type": "function", "name": self.name, "omega": self.omega}


@dataclass(frozen=True)
class DecayParams:
    b: float
    alpha0: float
    upsilon_bar: float
    kappa: float
    N_script: int
    zeta: float
    valid: bool


@dataclass(frozen=True)
class NumericB:
    value: float
    converged: bool
    terms: Tuple[float, ...]


@dataclass(frozen=True)
class PowerLaw:
    gamma1: float
    x_vr: float


@dataclass(frozen=True)
class FasterThanPower:
    x_vr: float
    alpha0: float = 1.0


@dataclass(frozen=True)
class SmallestClockError:
    gamma3: float
    x_vr: float


@dataclass(frozen=True)
class Schedule:
    n: int
    n_exact: float
    tag: str
    gamma: float


def potential_from_spec(spec: Dict[str, Any]) -> PeriodicPotential:
    """Build a potential from its JSON form, e.g. {"type": "cosine", "n": 60}."""
    kind = spec.get("type")
    if kind == "function":
        raise PotentialSpecError(
            f"function potential {spec.get('name', '')!r} wraps a Python callable "
            "and cannot be rebuilt from JSON")
    extra = set(spec) - {"type", "n", "omega", "x0"}
    if extra:
        raise PotentialSpecError(f"Unknown potential fields: {sorted(extra)}")
    if kind == "cosine":
        if "n" not in spec:
            raise PotentialSpecError("cosine potential needs 'n'")
        return CosinePotential(n=int(spec["n"]), omega=float(spec.get("omega", 1.0)),
                               x0=float(spec.get("x0", math.pi)))
    if kind == "zero":
        return ZeroPotential()
    if kind == "constant":
        return ConstantPotential(omega=float(spec.get("omega", 0.0)))
    raise PotentialSpecError(f"Unknown potential type: {kind!r}")


def v_d(pot: PeriodicPotential, d: int, x):
    """Stretched potential (2pi/d) V0(2pi x/d), period d in x."""
    return (2 * math.pi / d) * pot.evaluate(2 * math.pi * np.asarray(x, dtype=float) / d)


def theta_phase(pot: PeriodicPotential, d: int, delta: float, x: float) -> float:
    """Theta(Delta; x), the integral of V_d over [x - Delta, x]."""
    scale = 2 * math.pi / d
    return pot.integral(scale * (x - delta), scale * x)


def potential_operator(pot: PeriodicPotential, p: ClockParams,
                       labels: Optional[List[int]] = None) -> np.ndarray:
    """(d/T0) V_d(k) on the diagonal of the residue time basis.

    Args:
        pot: Periodic potential
        p: Clock parameters
        labels: Any d consecutive integers used to sample V_d (defaults to window(d, k0))
    """
    if labels is None:
        labels = window(p.d, p.k0)
    labels = np.asarray(labels)
    diag = np.zeros(p.d)
    diag[np.mod(labels, p.d)] = (p.d / p.T0) * v_d(pot, p.d, labels.astype(float))
    return np.diag(diag).astype(complex)


def cosine_b(n: int, omega: float) -> float:
    """Derivative-growth constant b for the cosine family."""
    if abs(omega) * math.sqrt(n) >= COSINE_B_THRESHOLD:
        return abs(omega) * n * math.sqrt(n) / COSINE_B_THRESHOLD
    return float(n)


def numeric_b(pot: PeriodicPotential, k_max: int = NUMERIC_B_KMAX,
              grid: int = NUMERIC_B_GRID) -> NumericB:
    """Estimate b = sup_k (2 max|V0^{(k-1)}|)^{1/k} by spectral differentiation.

    The result is flagged converged when the last two orders raise the
    running maximum by less than 1%.
    """
    x = 2 * math.pi * np.arange(grid) / grid
    coeffs = np.fft.fft(pot.evaluate(x))
    coeffs[np.abs(coeffs) < 1e-14 * max(np.abs(coeffs).max(), 1e-300)] = 0.0
    m = np.fft.fftfreq(grid, d=1.0 / grid)
    terms = []
    for k in range(1, k_max + 1):
        derivative = np.fft.ifft(coeffs * (1j * m) ** (k - 1)).real
        peak = float(np.max(np.abs(derivative)))
        terms.append((2 * peak) ** (1.0 / k) if peak > 0 else 0.0)
    head = max(terms[:-2]) if len(terms) > 2 else 0.0
    tail = max(terms[-2:])
    converged = tail <= 1.01 * head
    return NumericB(value=max(terms), converged=converged, terms=tuple(terms))


def alpha0(n0: float, d: int) -> float:
    """Distance of the mean energy from the spectral edge, 1 at the center."""
    return 1 - abs(1 - 2 * n0 / (d - 1))


def decay_params(pot: Optional[PeriodicPotential], p: ClockParams,
                 b: Optional[float] = None) -> DecayParams:
    """Decay-rate bookkeeping for a potential and clock state.

    Args:
        pot: Potential (None means V0 = 0)
        p: Clock parameters
        b: Override for the derivative-growth constant
    """
    if b is None:
        b = pot.b_const if pot is not None else 0.0
    a0 = alpha0(p.n0, p.d)
    log_arg = math.pi * a0 * p.sigma ** 2
    valid = b == 0 or log_arg > 1
    if b == 0:
        upsilon = 0.0
    elif log_arg > 1:
        upsilon = math.pi * a0 * KAPPA * b / math.log(log_arg)
    else:
        upsilon = math.inf
    if math.isfinite(upsilon):
        ratio = p.d / p.sigma ** 2
        n_script = math.floor(math.pi * a0 ** 2 / (2 * (upsilon + ratio) ** 2) * (p.d / p.sigma) ** 2)
    else:
        n_script = 0
    zeta = (1 + KAPPA * math.pi * b / math.log(math.pi * p.d)) ** 2 if p.d > 1 else math.inf
    return DecayParams(b=b, alpha0=a0, upsilon_bar=upsilon, kappa=KAPPA,
                       N_script=int(n_script), zeta=zeta, valid=valid)


def tilde_epsilon_v(n: int, x_vr: float) -> float:
    """Exact tail mass 2 A_c int_{x_vr}^{pi} cos^{2n}(x/2) dx for omega = 1."""
    pot = CosinePotential(n=n, omega=1.0, x0=0.0)
    return 2 * pot.integral(x_vr, math.pi)


def tilde_epsilon_v_bound(n: int, x_vr: float) -> float:
    """Convexity bound on the tail mass, valid when cos(x_vr) <= 1 - 1/n."""
    if math.cos(x_vr) > 1 - 1 / n + 1e-12:
        raise ValueError(f"cos(x_vr) <= 1 - 1/n violated for n={n}, x_vr={x_vr}")
    prefactor = (math.pi - x_vr) * math.e ** 2 / (4 * math.pi * math.sqrt(math.pi))
    return prefactor * math.sqrt(n) * math.cos(x_vr / 2) ** (2 * n)


def _chi2(d: float, x_vr: float, a0: float) -> float:
    log_cos = -2 * math.log(math.cos(x_vr / 2))
    chi1 = ((2 * math.pi) ** 1.5 * math.sqrt(2) / (2 * math.e ** 2)
            * (1 + math.log(math.pi * a0) / math.log(d))
            * log_cos ** 1.5 / (math.pi * KAPPA * a0))
    return chi1 * ((math.pi / 4) * a0 ** 2 * chi1 ** 2) ** (-3 / 8)


def schedule_n(d: float, scheme) -> Schedule:
    """Potential steepness n(d) for the three control schedules."""
    log_d = math.log(d)
    if isinstance(scheme, PowerLaw):
        gamma = scheme.gamma1
        n_exact = gamma * log_d / (-2 * math.log(math.cos(scheme.x_vr / 2)))
        tag = "power_law"
    elif isinstance(scheme, FasterThanPower):
        chi2 = _chi2(d, scheme.x_vr, scheme.alpha0)
        gamma = (math.pi / 4) * scheme.alpha0 ** 2 * chi2 ** 2 * d ** 0.25 / math.sqrt(log_d)
        n_exact = gamma * log_d / (-2 * math.log(math.cos(scheme.x_vr / 2)))
        tag = "faster_than_power"
    elif isinstance(scheme, SmallestClockError):
        gamma = scheme.gamma3
        n_exact = gamma * log_d ** (2 / 3) / (-2 * math.log(math.cos(scheme.x_vr)))
        tag = "smallest_clock_error"
    else:
        raise ValueError(f"Unknown schedule: {scheme!r}")
    return Schedule(n=max(1, int(round(n_exact))), n_exact=n_exact, tag=tag, gamma=gamma)
