"""Channel model: waveguide parameters, diffusion averages and signal-to-noise ratios."""

import math
from dataclasses import dataclass

import numpy as np

from .errors import DegenerateError, DomainError, ThresholdError

THRESHOLD = math.pi
DIFFUSIVE_LIMIT = 0.2
POSITIVITY_TOL = 1e-10


@dataclass(frozen=True)
class MediumParams:
    """Dimensionless description of the amplifying waveguide.

    Attributes
    ----------
    n_modes : int
        Number of propagating modes N.
    length_ratio : float
        L / l_a, amplifying length over amplification length. The laser
        threshold sits at pi.
    mfp_ratio : float
        l / L, transport mean free path over system length.
    power_per_p0 : float
        Input power P in units of P0.
    """

    n_modes: int
    length_ratio: float
    mfp_ratio: float
    power_per_p0: float

    def __post_init__(self):
        if int(self.n_modes) != self.n_modes or self.n_modes < 1:
            raise DomainError(f"n_modes must be a positive integer, got {self.n_modes!r}")
        if not self.length_ratio >= 0:
            raise DomainError(f"length_ratio must be >= 0, got {self.length_ratio!r}")
        if self.length_ratio > THRESHOLD:
            raise ThresholdError(
                f"length_ratio={self.length_ratio!r} lies beyond the laser threshold pi"
            )
        if not self.mfp_ratio > 0:
            raise DomainError(f"mfp_ratio must be positive, got {self.mfp_ratio!r}")
        if not self.power_per_p0 > 0:
            raise DomainError(f"power_per_p0 must be positive, got {self.power_per_p0!r}")

    @classmethod
    def from_power_per_mode(cls, n_modes, length_ratio, mfp_ratio, power_per_mode):
        return cls(n_modes, length_ratio, mfp_ratio, power_per_mode * n_modes)

    @classmethod
    def from_lengths(cls, n_modes, length, mfp, amp_length, power_per_p0):
        """Build from raw lengths L, l and l_a (any common unit; l_a may be inf)."""
        return cls(n_modes, length / amp_length, mfp / length, power_per_p0)

    @property
    def power_per_mode(self):
        """P / (N P0)."""
        return self.power_per_p0 / self.n_modes

    @property
    def mfp_over_amp_length(self):
        """l / l_a."""
        return self.mfp_ratio * self.length_ratio

    @property
    def is_diffusive(self):
        """False when l is not small compared with L and l_a (advisory only)."""
        return self.mfp_ratio <= DIFFUSIVE_LIMIT and self.mfp_over_amp_length <= DIFFUSIVE_LIMIT

    def with_length_ratio(self, length_ratio):
        return MediumParams(self.n_modes, length_ratio, self.mfp_ratio, self.power_per_p0)


@dataclass(frozen=True)
class DiffusionAverages:
    tau_bar: float
    sigma_bar: float


def diffusion_averages(p):
    """Ensemble means of tau = |t_ba|^2 and sigma = sum_n |t_bn|^2 + |r_bn|^2.

    Both diverge at the laser threshold, which is rejected here even though
    ``r_eff`` has a finite limit there.
    """
    lam = p.length_ratio
    if lam >= THRESHOLD:
        raise ThresholdError("diffusion averages diverge at the laser threshold")
    if lam == 0.0:
        return DiffusionAverages(4.0 * p.mfp_ratio / (3.0 * p.n_modes), 1.0)
    k = 4.0 * p.mfp_over_amp_length / 3.0
    s = math.sin(lam)
    one_minus_cos = 2.0 * math.sin(0.5 * lam) ** 2
    tau_bar = k / (p.n_modes * s)
    sigma_bar = 1.0 + k * one_minus_cos / s
    return DiffusionAverages(tau_bar, sigma_bar)


def r_eff(p):
    """Effective signal-to-noise ratio (P/P0) tau_bar / sigma_bar.

    Finite on the closed interval [0, pi]; equals P/(2 N P0) at threshold and
    (4/3)(l/NL) P/P0 without gain.
    """
    lam = p.length_ratio
    if lam == THRESHOLD:
        return 0.5 * p.power_per_mode
    one_minus_cos = 2.0 * math.sin(0.5 * lam) ** 2
    # (3 l_a / 4 l) sin(L/l_a) written with sinc so lam -> 0 stays finite
    sinc = math.sin(lam) / lam if lam > 0 else 1.0
    bracket = one_minus_cos + 3.0 * sinc / (4.0 * p.mfp_ratio)
    return p.power_per_mode / bracket


@dataclass(frozen=True)
class ScatteringMatrix:
    """2N x 2N scattering matrix.

    Rows and columns 0..N-1 belong to the sender lead, N..2N-1 to the
    receiver lead, so ``t = s[N:, :N]`` carries sender -> receiver and
    ``r = s[N:, N:]`` is the reflection seen by the receiver.
    """

    s: np.ndarray

    def __post_init__(self):
        s = np.asarray(self.s, dtype=complex)
        if s.ndim != 2 or s.shape[0] != s.shape[1] or s.shape[0] % 2:
            raise DomainError(f"scattering matrix must be 2N x 2N, got shape {s.shape}")
        object.__setattr__(self, "s", s)

    @classmethod
    def from_blocks(cls, r_prime, t_prime, t, r):
        return cls(np.block([[r_prime, t_prime], [t, r]]))

    @property
    def n_modes(self):
        return self.s.shape[0] // 2

    @property
    def t(self):
        n = self.n_modes
        return self.s[n:, :n]

    @property
    def r(self):
        n = self.n_modes
        return self.s[n:, n:]

    @property
    def t_prime(self):
        n = self.n_modes
        return self.s[:n, n:]

    @property
    def r_prime(self):
        n = self.n_modes
        return self.s[:n, :n]

    def receiver_row(self, beta):
        n = self.n_modes
        if not 0 <= beta < n:
            raise DomainError(f"mode index {beta} outside 0..{n - 1}")
        return self.s[n + beta]

    def excess_eigenvalues(self):
        """Eigenvalues of S S^dagger - 1, ascending."""
        ssd = self.s @ self.s.conj().T
        return np.linalg.eigvalsh(ssd - np.eye(ssd.shape[0]))

    def min_excess_eigenvalue(self):
        return float(self.excess_eigenvalues()[0])

    def unitarity_violation(self):
        """max |(S S^dagger - 1)_ij|."""
        ssd = self.s @ self.s.conj().T
        return float(np.max(np.abs(ssd - np.eye(ssd.shape[0]))))

    def is_super_unitary(self, tol=POSITIVITY_TOL):
        scale = np.linalg.norm(self.s, 2) ** 2
        return self.min_excess_eigenvalue() >= -tol * scale


def snr_instance(s, alpha, beta, power_per_p0):
    """Signal-to-noise ratio at the receiver for one scattering matrix.

    R = (P/P0) |t_ba|^2 / sum_n (|t_bn|^2 + |r_bn|^2); mode indices are
    zero-based.
    """
    n = s.n_modes
    if not 0 <= alpha < n:
        raise DomainError(f"mode index {alpha} outside 0..{n - 1}")
    row = s.receiver_row(beta)
    weights = np.abs(row) ** 2
    denom = math.fsum(weights)
    if denom == 0.0:
        raise DegenerateError(f"receiver row {beta} of S vanishes")
    return power_per_p0 * weights[alpha] / denom


def fd_noise_weight(s, beta):
    """Spontaneous-emission weight sum_n |U_bn|^2 = sum_n |S_bn|^2 - 1.

    Negative values indicate a lossy (sub-unitary) row, which the amplifier
    formulas do not cover.
    """
    row = s.receiver_row(beta)
    return math.fsum(np.abs(row) ** 2) - 1.0
