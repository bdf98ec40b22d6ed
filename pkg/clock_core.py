"""
Finite clock core for chronon.
Builds the clock Hamiltonian, the time basis, Gaussian clock states,
basis conversions and state comparison metrics.
"""

import math
from dataclasses import dataclass, replace
from typing import Dict, List, Optional, Tuple

import numpy as np
import scipy.fft

TIME = "time"
ENERGY = "energy"

# Relative tolerance for detecting the symmetric case sigma == sqrt(d)
SYMMETRIC_RTOL = 1e-9
# Eigenvalues above this are clipped to zero when taking matrix square roots
PSD_TOLERANCE = 1e-10


class ClockParamError(ValueError):
    """Raised for clock parameters outside their admissible ranges."""


class BasisError(ValueError):
    """Raised when a state is handed to an operation in the wrong basis."""


class NormalizationError(ValueError):
    """Raised when a Gaussian clock state cannot be normalized."""


@dataclass(frozen=True)
class ClockParams:
    """Parameters indexing a Gaussian clock state.

    Args:
        d: Clock dimension
        T0: Clock period in seconds
        sigma: Gaussian width in time-basis units, 0 < sigma < d
        n0: Mean energy index, 0 < n0 < d - 1
        k0: State center in time-basis units
    """

    d: int
    T0: float
    sigma: float
    n0: float
    k0: float = 0.0

    def __post_init__(self):
        if int(self.d) != self.d or self.d < 1:
            raise ClockParamError(f"d must be a positive integer, got {self.d}")
        if not self.T0 > 0:
            raise ClockParamError(f"T0 must be positive, got {self.T0}")
        if not 0 < self.sigma < self.d:
            raise ClockParamError(f"sigma must lie in (0, {self.d}), got {self.sigma}")
        if not 0 < self.n0 < self.d - 1:
            raise ClockParamError(f"n0 must lie in (0, {self.d - 1}), got {self.n0}")
        if not math.isfinite(self.k0):
            raise ClockParamError(f"k0 must be finite, got {self.k0}")

    @classmethod
    def symmetric(cls, d: int, T0: float = 1.0, k0: float = 0.0) -> "ClockParams":
        """Completely symmetric state: sigma = sqrt(d), n0 centered."""
        return cls(d=d, T0=T0, sigma=math.sqrt(d), n0=(d - 1) / 2, k0=k0)

    @property
    def omega(self) -> float:
        return 2 * math.pi / self.T0

    @property
    def is_symmetric(self) -> bool:
        return math.isclose(self.sigma, math.sqrt(self.d), rel_tol=SYMMETRIC_RTOL)

    def shifted(self, dk: float) -> "ClockParams":
        """Same state family, center moved by dk time-basis units."""
        return replace(self, k0=self.k0 + dk)

    def to_dict(self) -> Dict[str, float]:
        return {"d": self.d, "T0": self.T0, "sigma": self.sigma, "n0": self.n0, "k0": self.k0}


@dataclass(frozen=True, eq=False)
class ClockState:
    """Amplitudes of a clock state over a window of absolute integer labels.

    In the time basis amps[i] is <theta_k|Psi> with k = window[i].
    In the energy basis amps[n] is <E_n|Psi> for n = 0..d-1 and the window
    is kept so that the inverse transform restores the same labels.
    """

    amps: np.ndarray
    window: Tuple[int, ...]
    basis: str = TIME
    center: float = 0.0

    @property
    def d(self) -> int:
        return len(self.window)

    def norm(self) -> float:
        return float(np.linalg.norm(self.amps))

    def residues(self) -> np.ndarray:
        """Time-basis amplitudes indexed by k mod d."""
        if self.basis != TIME:
            raise BasisError("residues() needs a time-basis state")
        out = np.zeros(self.d, dtype=complex)
        out[np.mod(np.asarray(self.window), self.d)] = self.amps
        return out

    def relabel(self, center: float) -> "ClockState":
        """Same physical state expressed on window(d, center)."""
        labels = window(self.d, center)
        amps = self.residues()[np.mod(np.asarray(labels), self.d)]
        return ClockState(amps=amps, window=tuple(labels), basis=TIME, center=center)

    @classmethod
    def from_residues(cls, vec: np.ndarray, center: float) -> "ClockState":
        d = len(vec)
        labels = window(d, center)
        amps = np.asarray(vec, dtype=complex)[np.mod(np.asarray(labels), d)]
        return cls(amps=amps, window=tuple(labels), basis=TIME, center=center)


@dataclass(frozen=True)
class StateMetrics:
    l2_error: float
    trace_distance: float
    fidelity: float


def window(d: int, k0: float) -> List[int]:
    """The d consecutive integers k with -d/2 <= k0 - k < d/2."""
    if d < 1:
        raise ClockParamError(f"d must be positive, got {d}")
    # k0 - d/2 < k <= k0 + d/2
    upper = math.floor(k0 + d / 2)
    return list(range(upper - d + 1, upper + 1))


def build_hamiltonian(p: ClockParams) -> np.ndarray:
    """Energy-diagonal clock Hamiltonian with levels n * 2pi/T0."""
    return np.diag(np.arange(p.d) * p.omega).astype(complex)


def _energy_to_time_matrix(d: int, labels: np.ndarray, n: np.ndarray) -> np.ndarray:
    # <theta_k|E_n> = exp(+i 2pi n k / d) / sqrt(d); the integer product is reduced mod d first
    phase = np.mod(np.outer(labels, n), d)
    return np.exp(2j * np.pi * phase / d) / math.sqrt(d)


def hamiltonian_time_basis(d: int, T0: float, centered: bool = False) -> np.ndarray:
    """Clock Hamiltonian in the residue time basis.

    With centered=True the energies run over -(d-1)/2 .. (d-1)/2 (odd d).
    """
    residues = np.arange(d)
    energies = centered_labels(d) if centered else residues
    U = _energy_to_time_matrix(d, residues, residues)
    return (U * (energies * 2 * math.pi / T0)) @ U.conj().T


def centered_labels(d: int) -> np.ndarray:
    """Label for each residue r: r if r <= (d-1)/2 else r - d."""
    r = np.arange(d)
    return np.where(r <= (d - 1) / 2, r, r - d)


def centered_hamiltonian(d: int, T0: float) -> np.ndarray:
    if d % 2 == 0:
        raise ClockParamError(f"centered spectra need odd d, got {d}")
    return hamiltonian_time_basis(d, T0, centered=True)


def time_operator(d: int, T0: float, centered: bool = False) -> np.ndarray:
    """Theta-diagonal time operator, labels 0..d-1 or centered."""
    labels = centered_labels(d) if centered else np.arange(d)
    return np.diag(labels * (T0 / d)).astype(complex)


def time_moments(s: ClockState, T0: float) -> Tuple[float, float]:
    """Expectation and variance of the 0..d-1 time operator."""
    prob = np.abs(s.residues()) ** 2
    prob = prob / prob.sum()
    t = np.arange(s.d) * (T0 / s.d)
    mean = float(np.dot(prob, t))
    var = float(np.dot(prob, (t - mean) ** 2))
    return mean, var


def _fft_friendly(d: int) -> bool:
    for prime in (2, 3, 5, 7):
        while d % prime == 0:
            d //= prime
    return d == 1


def dft_time_to_energy(s: ClockState, method: str = "auto") -> ClockState:
    """<E_n|Psi> = d^{-1/2} sum_k exp(-i 2pi n k/d) <theta_k|Psi> over the window labels."""
    if s.basis != TIME:
        raise BasisError("dft_time_to_energy needs a time-basis state")
    d = s.d
    if method == "auto":
        method = "fft" if _fft_friendly(d) else "direct"
    if method == "fft":
        energy = scipy.fft.fft(s.residues(), norm="ortho")
    elif method == "direct":
        M = _energy_to_time_matrix(d, np.asarray(s.window), np.arange(d))
        energy = M.conj().T @ s.amps
    else:
        raise ValueError(f"Unknown DFT method: {method}")
    return ClockState(amps=energy, window=s.window, basis=ENERGY, center=s.center)


def dft_energy_to_time(s: ClockState, method: str = "auto") -> ClockState:
    """Inverse of dft_time_to_energy onto the state's window labels."""
    if s.basis != ENERGY:
        raise BasisError("dft_energy_to_time needs an energy-basis state")
    d = s.d
    if method == "auto":
        method = "fft" if _fft_friendly(d) else "direct"
    if method == "fft":
        vec = scipy.fft.ifft(s.amps, norm="ortho")
        amps = vec[np.mod(np.asarray(s.window), d)]
    elif method == "direct":
        M = _energy_to_time_matrix(d, np.asarray(s.window), np.arange(d))
        amps = M @ s.amps
    else:
        raise ValueError(f"Unknown DFT method: {method}")
    return ClockState(amps=amps, window=s.window, basis=TIME, center=s.center)


def normalization_constant(p: ClockParams) -> float:
    """A = (sum_{k in S_d(k0)} exp(-2pi (k-k0)^2 / sigma^2))^{-1/2}."""
    k = np.asarray(window(p.d, p.k0), dtype=float)
    total = float(np.sum(np.exp(-2 * math.pi * (k - p.k0) ** 2 / p.sigma ** 2)))
    if not total > 0 or not math.isfinite(total):
        raise NormalizationError(
            f"Gaussian weight underflowed for sigma={p.sigma}, d={p.d}"
        )
    return 1.0 / math.sqrt(total)


def analytic_psi(p: ClockParams, x, A: Optional[float] = None):
    """Analytic extension A exp(-pi (x-k0)^2/sigma^2) exp(i 2pi n0 (x-k0)/d)."""
    if A is None:
        A = normalization_constant(p)
    y = np.asarray(x, dtype=float) - p.k0
    return A * np.exp(-math.pi * y ** 2 / p.sigma ** 2) * np.exp(2j * math.pi * p.n0 * y / p.d)


def analytic_psi_tilde(p: ClockParams, p_arg, A: Optional[float] = None):
    """Closed-form Fourier transform A (sigma/sqrt d) exp(-pi sigma^2 (p-n0)^2/d^2) exp(-i 2pi p k0/d)."""
    if A is None:
        A = normalization_constant(p)
    q = np.asarray(p_arg, dtype=float)
    envelope = np.exp(-math.pi * p.sigma ** 2 * (q - p.n0) ** 2 / p.d ** 2)
    return A * (p.sigma / math.sqrt(p.d)) * envelope * np.exp(-2j * math.pi * q * p.k0 / p.d)


def gaussian_state(p: ClockParams, normalized: bool = True,
                   A: Optional[float] = None) -> ClockState:
    """Gaussian clock state over window(d, k0).

    Args:
        p: Clock parameters
        normalized: Use the exact finite-sum normalization constant
        A: Amplitude used when normalized is False (defaults to 1)
    """
    if normalized:
        A = normalization_constant(p)
    elif A is None:
        A = 1.0
    labels = window(p.d, p.k0)
    amps = analytic_psi(p, np.asarray(labels, dtype=float), A=A)
    return ClockState(amps=np.asarray(amps, dtype=complex), window=tuple(labels),
                      basis=TIME, center=p.k0)


def centered_gaussian_residues(p: ClockParams) -> np.ndarray:
    """Gaussian state for the centered spectrum, as a residue vector.

    The mean energy is shifted to n0 - (d-1)/2 so that the state sits in the
    middle of the centered energy range.
    """
    n0c = p.n0 - (p.d - 1) / 2
    A = normalization_constant(p)
    labels = np.asarray(window(p.d, p.k0), dtype=float)
    y = labels - p.k0
    amps = A * np.exp(-math.pi * y ** 2 / p.sigma ** 2) * np.exp(2j * math.pi * n0c * y / p.d)
    out = np.zeros(p.d, dtype=complex)
    out[np.mod(labels.astype(int), p.d)] = amps
    return out


def commutator_residual(p: ClockParams) -> Dict[str, object]:
    """Measure [t, H] Psi - i Psi for the centered operators (odd d).

    Returns:
        Dictionary with 'residual' (l2 norm) and 'diagonal' (<theta_k|[t,H]|theta_k>)
    """
    t_hat = time_operator(p.d, p.T0, centered=True)
    h_hat = centered_hamiltonian(p.d, p.T0)
    comm = t_hat @ h_hat - h_hat @ t_hat
    psi = centered_gaussian_residues(p)
    residual = float(np.linalg.norm(comm @ psi - 1j * psi))
    return {"residual": residual, "diagonal": np.diag(comm).copy()}


def peres_spread(d: int, k: int, x: float) -> np.ndarray:
    """Coefficients on |theta_l>, l = 0..d-1, of exp(-i H x T0/d)|theta_k>."""
    l = np.arange(d)
    nearest = round(x)
    if abs(x - nearest) < 1e-12:
        out = np.zeros(d, dtype=complex)
        out[(k + int(nearest)) % d] = 1.0
        return out
    u = k + x - l
    numerator = 1 - np.exp(-2j * np.pi * u)
    denominator = 1 - np.exp(-2j * np.pi * u / d)
    return numerator / (d * denominator)


def poisson_sum_check(p: ClockParams, m_max: int = 0) -> Tuple[complex, complex]:
    """Both sides of sum_m psi(m) = sqrt(d) sum_m psi_tilde(m d), truncated.

    Returns:
        (lattice sum of psi, sqrt(d) times lattice sum of psi_tilde)
    """
    A = normalization_constant(p)
    span = m_max or int(math.ceil(abs(p.k0) + 8 * p.sigma + p.d))
    m = np.arange(-span, span + 1)
    lhs = complex(np.sum(analytic_psi(p, m, A=A)))
    rhs = complex(math.sqrt(p.d) * np.sum(analytic_psi_tilde(p, m * p.d, A=A)))
    return lhs, rhs


def pure_density(vec: np.ndarray) -> np.ndarray:
    v = np.asarray(vec, dtype=complex)
    return np.outer(v, v.conj())


def _psd_sqrt(rho: np.ndarray) -> np.ndarray:
    vals, vecs = np.linalg.eigh((rho + rho.conj().T) / 2)
    if vals.min() < -PSD_TOLERANCE:
        raise ValueError(f"Matrix is not positive semidefinite (min eigenvalue {vals.min():.3e})")
    vals = np.clip(vals, 0.0, None)
    return (vecs * np.sqrt(vals)) @ vecs.conj().T


def _check_density(rho: np.ndarray, name: str):
    if rho.ndim != 2 or rho.shape[0] != rho.shape[1]:
        raise ValueError(f"{name} must be a square matrix, got shape {rho.shape}")
    if abs(np.trace(rho).real - 1) > PSD_TOLERANCE:
        raise ValueError(f"{name} must have unit trace, got {np.trace(rho).real:.12f}")


def state_metrics(a: np.ndarray, b: np.ndarray) -> StateMetrics:
    """Frobenius error, trace distance and Uhlmann fidelity tr sqrt(sqrt(a) b sqrt(a))."""
    a = np.asarray(a, dtype=complex)
    b = np.asarray(b, dtype=complex)
    _check_density(a, "a")
    _check_density(b, "b")
    if a.shape != b.shape:
        raise ValueError(f"Shape mismatch: {a.shape} vs {b.shape}")
    diff = a - b
    trace_distance = 0.5 * float(np.sum(np.linalg.svd(diff, compute_uv=False)))
    root_a = _psd_sqrt(a)
    inner = _psd_sqrt(root_a @ b @ root_a)
    fidelity = float(np.clip(np.trace(inner).real, 0.0, 1.0))
    return StateMetrics(
        l2_error=float(np.linalg.norm(diff)),
        trace_distance=min(trace_distance, 1.0),
        fidelity=fidelity,
    )


def trace_norm(m: np.ndarray) -> float:
    """Sum of singular values."""
    return float(np.sum(np.linalg.svd(np.asarray(m, dtype=complex), compute_uv=False)))
