"""
Analytic error bounds for chronon.

Every bound returns a BoundReport carrying the total and each named sub-term,
so a run can audit how the total was put together. The total is always a
linear combination of the terms with the weights stored in the report.
"""

import math
from dataclasses import dataclass, field
from typing import Dict, Iterable, Optional, Tuple

import numpy as np

from clock_core import ClockParamError, ClockParams, window
from potentials import KAPPA, PeriodicPotential, decay_params

SIGMA_SQRT_D = "SigmaSqrtD"
GENERAL = "General"

# Slack applied where a bound is strict, to absorb roundoff
ROUNDOFF_SLACK = 1e-12


@dataclass
class BoundReport:
    """An analytic bound with its sub-terms.

    total == sum(weights[k] * terms[k]) for every key in weights.
    """

    name: str
    total: float
    terms: Dict[str, float]
    weights: Dict[str, float]
    regime: str
    valid: bool = True
    notes: Dict[str, object] = field(default_factory=dict)

    def recombine(self) -> float:
        return float(sum(w * self.terms[k] for k, w in self.weights.items()))

    def dominates(self, measured: float, floor: float = 0.0) -> bool:
        """measured <= total (with roundoff slack) or below the numeric floor."""
        if measured < floor:
            return True
        return measured <= self.total * (1 + ROUNDOFF_SLACK)

    def to_dict(self) -> Dict[str, object]:
        return {
            "name": self.name,
            "total": self.total,
            "regime": self.regime,
            "valid": self.valid,
            "terms": dict(self.terms),
            "weights": dict(self.weights),
            "notes": dict(self.notes),
        }


def make_report(name: str, terms: Dict[str, float], weights: Dict[str, float], regime: str,
            valid: bool = True, notes: Optional[Dict[str, object]] = None) -> BoundReport:
    total = float(sum(w * terms[k] for k, w in weights.items()))
    return BoundReport(name=name, total=total, terms=terms, weights=weights,
                       regime=regime, valid=valid, notes=notes or {})


def _regime(p: ClockParams) -> str:
    return SIGMA_SQRT_D if p.is_symmetric else GENERAL


def _check(p: ClockParams):
    if not 0 < p.sigma < p.d:
        raise ClockParamError(f"sigma must lie in (0, {p.d}), got {p.sigma}")
    if not 0 < p.n0 < p.d - 1:
        raise ClockParamError(f"n0 must lie in (0, {p.d - 1}), got {p.n0}")


def _geometric(x: float) -> float:
    """1 / (1 - e^{-x})."""
    return 1.0 / -math.expm1(-x)


# --------------------------------------------------------------------------
# Normalization
# --------------------------------------------------------------------------

def _eps_bar(p: ClockParams) -> Tuple[float, float]:
    d, s2 = p.d, p.sigma ** 2
    eps1 = 2 * math.exp(-math.pi * d ** 2 / (2 * s2)) * _geometric(2 * math.pi * d / s2)
    eps2 = 2 * math.exp(-math.pi * s2 / 2) * _geometric(math.pi * s2)
    return eps1, eps2


def normalization_bracket(p: ClockParams) -> Tuple[float, float]:
    """Lower and upper bounds on A^2.

    The window sum equals sigma/sqrt2 + e with |e| <= eps1 + (sigma/sqrt2) eps2,
    the second piece being the Poisson-summed aliases.
    """
    s = p.sigma / math.sqrt(2)
    eps1, eps2 = _eps_bar(p)
    e = eps1 + s * eps2
    lower = 1 / s - e / (s * (s + e))
    upper = 1 / s + e / (s * (s - e)) if e < s else math.inf
    return lower, upper


def amplitude_upper(p: ClockParams) -> float:
    """Conservative A used inside every bound."""
    return math.sqrt(normalization_bracket(p)[1])


def renormalization_bound(p: ClockParams) -> float:
    """Bound on |A/A' - 1| for normalization constants at any two centers."""
    lower, upper = normalization_bracket(p)
    return math.sqrt(upper / lower) - 1


def _eps_nor_closed(p: ClockParams) -> float:
    d, sigma = p.d, p.sigma
    if p.is_symmetric:
        return 8 * math.sqrt(2 / d) * math.exp(-math.pi * d / 2) * _geometric(math.pi * d)
    s2 = sigma ** 2
    return (4 * math.sqrt(2) / sigma) * (
        math.exp(-math.pi * d ** 2 / (2 * s2)) * _geometric(2 * math.pi * d / s2)
        + math.exp(-math.pi * s2 / 2) * _geometric(math.pi * s2)
    )


def exact_eps_nor(p: ClockParams, t: float) -> float:
    """Ratio of window sums behind eps_nor; a diagnostic only."""
    shift = t * p.d / p.T0
    k = np.asarray(window(p.d, p.k0), dtype=float)
    k_moved = np.asarray(window(p.d, p.k0 + shift), dtype=float)
    moved = np.sum(np.exp(-2 * math.pi * (k_moved - p.k0 - shift) ** 2 / p.sigma ** 2))
    base = np.sum(np.exp(-2 * math.pi * (k - p.k0) ** 2 / p.sigma ** 2))
    return float(math.sqrt(moved / base) - 1)


def _eps_step(p: ClockParams, A: float) -> float:
    if p.is_symmetric:
        return 2 * A * math.exp(-math.pi * p.d / 4)
    return 2 * A * math.exp(-math.pi * p.d ** 2 / (4 * p.sigma ** 2))


# --------------------------------------------------------------------------
# Quasi-continuity
# --------------------------------------------------------------------------

def _eps_total(p: ClockParams, A: float, a0: float) -> float:
    d, sigma = p.d, p.sigma
    if p.is_symmetric:
        near = 2 * math.sqrt(d) * (a0 / 2 + 1 / (2 * math.pi * d) + _geometric(math.pi * a0))
        near *= math.exp(-math.pi * d * a0 ** 2 / 4)
        far = (2 * _geometric(math.pi) + 0.5 + 1 / (2 * math.pi * d)) * math.exp(-math.pi * d / 4)
        return 2 * math.pi * A * d * (near + far)
    s2 = sigma ** 2
    near = 2 * sigma * (a0 / 2 + 1 / (2 * math.pi * s2) + _geometric(math.pi * s2 * a0))
    near *= math.exp(-math.pi * s2 * a0 ** 2 / 4)
    far = (_geometric(math.pi * d / s2) + _geometric(math.pi * d ** 2 / s2)
           + d / (2 * s2) + 1 / (2 * math.pi * d))
    far *= math.exp(-math.pi * d ** 2 / (4 * s2))
    return 2 * math.pi * A * d * (near + far)


def bound_epsilon_c(p: ClockParams, t: float) -> BoundReport:
    """Free-evolution error of a Gaussian clock state after time t.

    Args:
        p: Clock parameters
        t: Evolution time in seconds

    Returns:
        BoundReport with terms eps_total, eps_step, eps_nor
    """
    _check(p)
    A = amplitude_upper(p)
    a0 = 1 - abs(1 - 2 * p.n0 / (p.d - 1))
    ticks = abs(t) * p.d / p.T0
    terms = {
        "eps_total": _eps_total(p, A, a0),
        "eps_step": _eps_step(p, A),
        "eps_nor": _eps_nor_closed(p),
        "A_upper": A,
        "alpha0": a0,
    }
    weights = {"eps_total": ticks, "eps_step": ticks + 1, "eps_nor": 1.0}
    return make_report("epsilon_c", terms, weights, _regime(p))


# --------------------------------------------------------------------------
# Clock moving through a potential
# --------------------------------------------------------------------------

def _eps_bar2(p: ClockParams, A: float, b: float, a0: float, upsilon: float,
              n_script: int) -> Tuple[float, str]:
    d, sigma = p.d, p.sigma
    if n_script >= 8 and upsilon >= 0:
        rate = (math.pi / 4) * a0 ** 2 / (d / sigma ** 2 + upsilon) ** 2 * (d / sigma) ** 2
        if p.is_symmetric:
            scale = d ** 0.75
            root = math.sqrt((math.e / 2) * a0 / (upsilon + 1))
        else:
            scale = sigma ** 1.5
            root = math.sqrt((math.e / 2) * a0 / (upsilon * sigma ** 2 / d + 1))
        value = (2 * math.pi) ** 1.25 * scale * A * (1 + math.pi ** 2 / 8) * root * math.exp(-rate)
        return value, "exponential"
    prefactor = 3 ** 1.75 / (math.sqrt(2 * math.pi) * math.e) * A * (8 + math.pi ** 2) / a0 ** 3
    slope = KAPPA * math.sqrt(6 * math.pi) / math.log(3) * b
    if p.is_symmetric:
        value = prefactor * (slope + math.sqrt(d)) ** 3 * d ** -2.5
    else:
        value = prefactor * (slope + d / sigma) ** 3 * sigma / d ** 3
    return value, "polynomial"


def _eps_T_remainder(p: ClockParams, A: float, b: float) -> float:
    d = p.d
    if p.is_symmetric:
        inner = (2 * math.pi * _geometric(math.pi) + (b + 2 * math.pi / d) * _geometric(math.pi * d)
                 + (2 * math.pi + math.pi * d + 1 / d))
        return 2 * A * inner * math.exp(-math.pi * d / 4)
    r = d / p.sigma ** 2
    inner = (2 * math.pi * _geometric(math.pi * r) + (b + 2 * math.pi / d) * _geometric(math.pi * d * r)
             + (2 * math.pi * r + math.pi * d * r + 1 / d))
    return 2 * A * inner * math.exp(-math.pi * d * r / 4)


def bound_epsilon_v(p: ClockParams, pot: Optional[PeriodicPotential], t: float,
                    b: Optional[float] = None) -> BoundReport:
    """Error of a Gaussian clock state moving through a potential for time t.

    Args:
        p: Clock parameters
        pot: Potential (None means V0 = 0)
        t: Evolution time in seconds
        b: Override for the derivative-growth constant of the potential

    Returns:
        BoundReport with terms eps_T, eps_step, eps_nor; notes record the
        eps_bar2 branch that fired
    """
    _check(p)
    decay = decay_params(pot, p, b=b)
    A = amplitude_upper(p)
    ticks = abs(t) * p.d / p.T0
    if math.isfinite(decay.upsilon_bar):
        bar2, branch = _eps_bar2(p, A, decay.b, decay.alpha0, decay.upsilon_bar, decay.N_script)
    else:
        bar2, branch = math.inf, "undefined"
    remainder = _eps_T_remainder(p, A, decay.b)
    terms = {
        "eps_T": bar2 + remainder,
        "eps_bar2": bar2,
        "eps_T_remainder": remainder,
        "eps_step": _eps_step(p, A),
        "eps_nor": _eps_nor_closed(p),
        "b": decay.b,
        "upsilon_bar": decay.upsilon_bar,
        "N_script": float(decay.N_script),
        "A_upper": A,
    }
    weights = {"eps_T": ticks, "eps_step": ticks + 1, "eps_nor": 1.0}
    return make_report("epsilon_v", terms, weights, _regime(p), valid=decay.valid,
                   notes={"eps_bar2_branch": branch})


# --------------------------------------------------------------------------
# Quasi-canonical commutation
# --------------------------------------------------------------------------

def _commutator_terms(p: ClockParams, A: float, ab: float, bb: float) -> Dict[str, float]:
    d, sigma = p.d, p.sigma
    pi = math.pi
    sym = p.is_symmetric
    s2 = d if sym else sigma ** 2
    r = d / s2
    g1 = 1 - bb
    g = 1 - ab
    main = math.exp(-pi * d * r / 4)
    if sym:
        e1 = 2 * A * math.exp(-pi * d * g1 ** 2 / 4) * _geometric(pi * g1)
        e2 = A * math.sqrt(d) * (1 + 1 / pi + bb * _geometric(pi)) * main
        e3 = 2 * pi * A * d ** 2 * math.sqrt(d) * (
            g + (1 / (pi * d)) * (2 + _geometric(pi * d * g))
            + (bb / 2) * (g + 1 / (pi * d) + (1 + ab) * _geometric(pi * d * g))
        ) * math.exp(-pi * d * g ** 2 / 4)
        e4 = d * A * (d * (pi + 1) * (1 + bb) + 2 + 2 * _geometric(pi)
                      + ab * (d * (pi + 1) + pi * bb * _geometric(pi))) * main
        e5 = 2 * math.sqrt(d) * A * main * _geometric(pi)
        e6 = 2 * pi * A * d ** 2 * math.sqrt(d) * (
            g / 2 + 1 / (2 * pi * d) + ((1 + ab) / 2) * _geometric(pi * d * g)
        ) * math.exp(-pi * d * g ** 2 / 4)
        e7 = 2 * pi * d * A * (1 + 1 / pi + ab * _geometric(pi)) * main
        e8 = pi * d * A * (g1 + 1 / pi + ab * _geometric(pi * g1)) * math.exp(-pi * d * g1 ** 2 / 4)
    else:
        e1 = 2 * A * math.exp(-pi * d ** 2 * g1 ** 2 / (4 * s2)) * _geometric(pi * d * g1 / s2)
        e2 = A * math.sqrt(d) * (1 + s2 / (pi * d) + bb * _geometric(pi * r)) * main
        e3 = 2 * pi * A * sigma * d ** 2 * (
            (s2 / d) * g + (1 / (pi * d)) * (2 + _geometric(pi * s2 * g))
            + (bb / 2) * (g + 1 / (pi * s2) + (1 + ab) * _geometric(pi * s2 * g))
        ) * math.exp(-pi * s2 * g ** 2 / 4)
        e4 = d * A * ((pi * d * r + d) * (1 + bb) + 2 + 2 * _geometric(pi * r)
                      + ab * (pi * d + s2 + pi * bb * _geometric(pi * r))) * main
        e5 = 2 * math.sqrt(d) * A * main * _geometric(pi * r)
        e6 = 2 * pi * A * d ** 2 * sigma * (
            g / 2 + 1 / (2 * pi * s2) + ((1 + ab) / 2) * _geometric(pi * s2 * g)
        ) * math.exp(-pi * s2 * g ** 2 / 4)
        e7 = 2 * pi * d * A * (r + 1 / pi + ab * _geometric(pi * r)) * main
        e8 = pi * d * A * (r * g1 + 1 / pi + ab * _geometric(pi * r * g1)) * math.exp(
            -pi * d * r * g1 ** 2 / 4)
    return {"eps1": e1, "eps2": e2, "eps3": e3, "eps4": e4,
            "eps5": e5, "eps6": e6, "eps7": e7, "eps8": e8}


def bound_commutator(p: ClockParams) -> BoundReport:
    """Bound on ||[t, H] Psi - i Psi|| for centered spectra (odd d).

    alpha_bar = |2 n0c / d| with the shifted mean energy n0c = n0 - (d-1)/2,
    beta_bar = |2 k0 / d|. Both must be below 1.
    """
    _check(p)
    if p.d % 2 == 0:
        raise ClockParamError(f"commutator bound needs odd d, got {p.d}")
    ab = abs(2 * (p.n0 - (p.d - 1) / 2) / p.d)
    bb = abs(2 * p.k0 / p.d)
    if ab >= 1 or bb >= 1:
        raise ClockParamError(f"alpha_bar and beta_bar must be below 1, got {ab}, {bb}")
    A = amplitude_upper(p)
    terms = _commutator_terms(p, A, ab, bb)
    half_pi_d = 0.5 * math.pi * p.d
    weights = {"eps8": 1.0, "eps7": 0.5, "eps6": 0.5, "eps5": half_pi_d,
               "eps4": 1.0, "eps3": 1.0, "eps2": math.pi * p.d, "eps1": math.pi * p.d}
    terms.update({"alpha_bar": ab, "beta_bar": bb, "A_upper": A})
    return make_report("commutator", terms, weights, _regime(p))


# --------------------------------------------------------------------------
# Discrete Gaussian tails
# --------------------------------------------------------------------------

def gaussian_tail(a: float, X: float, Delta: float, moment: int) -> float:
    """Bound on sum_{n=a,a+1,...} (n-X)^moment exp(-(n-X)^2/Delta^2).

    Args:
        a: First summation index
        X: Gaussian center
        Delta: Gaussian width
        moment: 0, 1 or 2

    Raises:
        ValueError: if a is not far enough past X for the requested moment
    """
    if Delta <= 0:
        raise ValueError(f"Delta must be positive, got {Delta}")
    gap = a - X
    D2 = Delta ** 2
    if moment == 0:
        if gap <= 0:
            raise ValueError(f"moment 0 needs a > X, got a={a}, X={X}")
        return math.exp(-gap ** 2 / D2) * _geometric(2 * gap / D2)
    if moment == 1:
        if gap <= Delta:
            raise ValueError(f"moment 1 needs a > X + Delta, got a={a}, X={X}, Delta={Delta}")
        return (gap + D2 / 2) * math.exp(-gap ** 2 / D2)
    if moment == 2:
        if gap <= math.sqrt(2) * Delta:
            raise ValueError(f"moment 2 needs a > X + sqrt(2) Delta, got a={a}, X={X}, Delta={Delta}")
        return (gap ** 2 + (D2 / 2) * (gap + _geometric(2 * gap / D2))) * math.exp(-gap ** 2 / D2)
    raise ValueError(f"moment must be 0, 1 or 2, got {moment}")


def unitary_error_chain(errors: Iterable[float]) -> float:
    """Errors of a chain of unitary steps add linearly."""
    total = 0.0
    for e in errors:
        if e < 0:
            raise ValueError(f"step errors must be nonnegative, got {e}")
        total += e
    return total
