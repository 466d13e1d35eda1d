"""Closed-form capacities of the amplifying disordered waveguide, in bits per use."""

import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate

from .errors import DomainError, QuadratureError, ThresholdError
from .medium import THRESHOLD, MediumParams, diffusion_averages, r_eff
from .specfun import EULER_GAMMA, LN2, _ein, exp_gamma0, g_entropy, g_scalar

METHODS = (
    "heterodyne_closed",
    "heterodyne_instance",
    "holevo_closed",
    "holevo_instance",
    "c0_reference",
    "c_infinity",
    "approximation",
    "mc_oracle",
    "quadrature_oracle",
)

# Below this sigma_bar - 1 the Holevo closed form is handed to quadrature.
SIGMA_EXCESS_CUTOFF = 1e-8
# Switch to the cancellation-free branch of the Holevo formula below this (sigma_bar - 1)/a.
_STABLE_BRANCH = 1.0


@dataclass(frozen=True)
class CapacityResult:
    bits: float
    method: str
    err_estimate: float = 0.0

    def __post_init__(self):
        if self.method not in METHODS:
            raise ValueError(f"unknown method tag {self.method!r}")

    def __float__(self):
        return float(self.bits)


def c_heterodyne_instance(r):
    """log2(1 + R) for a single disorder realisation."""
    if r < 0:
        raise DomainError(f"signal-to-noise ratio must be >= 0, got {r!r}")
    return CapacityResult(math.log1p(r) / LN2, "heterodyne_instance")


def _heterodyne_avg_bits(reff):
    if reff == 0.0:
        return 0.0
    return exp_gamma0(1.0 / reff) / LN2


def c_heterodyne_avg(reff):
    """Heterodyne capacity averaged over Rayleigh-distributed transmission.

    C = exp(1/R_eff) Gamma(0; 1/R_eff) / ln 2; approaches R_eff/ln 2 for small
    and log2 R_eff - gamma/ln 2 for large R_eff.
    """
    if reff < 0:
        raise DomainError(f"r_eff must be >= 0, got {reff!r}")
    return CapacityResult(_heterodyne_avg_bits(reff), "heterodyne_closed")


def c0_reference(reff):
    """log2(1 + R_eff), the capacity if transmission did not fluctuate."""
    if reff < 0:
        raise DomainError(f"r_eff must be >= 0, got {reff!r}")
    return CapacityResult(math.log1p(reff) / LN2, "c0_reference")


def c_infinity(power_per_mode):
    """Capacity at the laser threshold; depends only on P/(N P0)."""
    if not power_per_mode > 0:
        raise DomainError(f"power_per_mode must be positive, got {power_per_mode!r}")
    return CapacityResult(_heterodyne_avg_bits(0.5 * power_per_mode), "c_infinity")


def c_holevo_instance(tau, sigma, power_per_p0):
    """Holevo capacity g(tau P/P0 + sigma - 1) - g(sigma - 1) for one realisation."""
    if tau < 0:
        raise DomainError(f"tau must be >= 0, got {tau!r}")
    if sigma < 1:
        raise DomainError(f"sigma must be >= 1, got {sigma!r}")
    noise = sigma - 1.0
    bits = g_entropy(tau * power_per_p0 + noise) - g_entropy(noise)
    return CapacityResult(max(bits, 0.0), "holevo_instance")


def holevo_avg_from_moments(a, sigma_bar):
    """Rayleigh average of the Holevo capacity with mean signal a = tau_bar P/P0.

    Closed form
        a [log2(sigma/(sigma-1)) + (E(sigma/a) - E((sigma-1)/a)) / ln 2],
    with E(x) = exp(x) Gamma(0; x). For small (sigma-1)/a the two diverging
    pieces are combined analytically so nothing cancels.
    """
    s = sigma_bar - 1.0
    z = s / a
    first = exp_gamma0(sigma_bar / a)
    if z < _STABLE_BRANCH:
        # -ln s - E(z) = ln(s) (e^z - 1) + e^z (gamma - ln a - Ein(z))
        rest = math.log1p(s) + math.log(s) * math.expm1(z) + math.exp(z) * (
            EULER_GAMMA - math.log(a) - _ein(z)
        )
        return a * (rest + first) / LN2
    log_term = -math.log1p(-1.0 / sigma_bar)
    return a * (log_term + first - exp_gamma0(z)) / LN2


def c_holevo_avg(p):
    """Disorder-averaged Holevo capacity for an amplifying medium below threshold."""
    if p.length_ratio >= THRESHOLD:
        raise ThresholdError("Holevo average diverges term by term at the laser threshold")
    avg = diffusion_averages(p)
    if avg.sigma_bar - 1.0 < SIGMA_EXCESS_CUTOFF:
        res = _holevo_quad(avg.tau_bar * p.power_per_p0, avg.sigma_bar - 1.0, 1e-12)
        return CapacityResult(res[0], "holevo_closed", res[1])
    bits = holevo_avg_from_moments(avg.tau_bar * p.power_per_p0, avg.sigma_bar)
    return CapacityResult(max(bits, 0.0), "holevo_closed")


def _holevo_quad(a, noise, abs_tol):
    """int_0^inf exp(-u) [g(a u + noise) - g(noise)] du with scipy's adaptive QUADPACK."""
    if a == 0.0:
        return 0.0, 0.0
    g0 = g_scalar(noise)
    exp = math.exp

    def integrand(u):
        return exp(-u) * (g_scalar(a * u + noise) - g0)

    # the integrand is ~ u ln u at the origin when noise = 0; a breakpoint at
    # u ~ 1/a lets QUADPACK resolve the kink in g for large a.
    pts = sorted({min(1.0 / a, 50.0), 1.0, 10.0})
    total = 0.0
    err = 0.0
    edges = [0.0] + pts + [math.inf]
    for lo, hi in zip(edges[:-1], edges[1:]):
        if hi <= lo:
            continue
        val, e = integrate.quad(
            integrand, lo, hi, epsabs=abs_tol / 10, epsrel=1e-13, limit=200, full_output=1
        )[:2]
        total += val
        err += e
    if not err <= abs_tol:
        raise QuadratureError(f"Holevo quadrature error {err:.3e} exceeds {abs_tol:.3e}")
    return total, err


def c_holevo_noamp(tau_bar, power_per_p0, abs_tol=1e-9):
    """Rayleigh-averaged Holevo capacity without amplification (sigma = 1).

    Evaluated by adaptive quadrature; ``err_estimate`` carries the bound.
    """
    if not tau_bar > 0:
        raise DomainError(f"tau_bar must be positive, got {tau_bar!r}")
    bits, err = _holevo_quad(tau_bar * power_per_p0, 0.0, abs_tol)
    return CapacityResult(max(bits, 0.0), "holevo_closed", err)


def holevo_initial_decrease_term(p):
    """(4 l L^2 / 3 l_a^2) log2(pi l_a / L), in bits (zero without gain)."""
    lam = p.length_ratio
    if lam == 0.0:
        return 0.0
    return 4.0 * p.mfp_ratio * lam**2 / 3.0 * math.log2(math.pi / lam)


def c_holevo_initial_decrease(p):
    """Weak-gain approximation C_H(0) - (4 l L^2/3 l_a^2) log2(pi l_a/L)."""
    if p.length_ratio >= 0.3:
        raise DomainError("initial-decrease expansion is only valid for length_ratio < 0.3")
    base = c_holevo_noamp(diffusion_averages(p.with_length_ratio(0.0)).tau_bar, p.power_per_p0)
    return CapacityResult(base.bits - holevo_initial_decrease_term(p), "approximation", base.err_estimate)


def increase_factor_report(mfp_ratio, power_per_mode):
    """Compare C_inf / C(0) with the published weak- and strong-power forms.

    Returns a dict with the exact ratio and both approximations; the
    approximations only hold in their own regimes (P << N P0 and
    P >> N P0 L/l respectively).
    """
    p0 = MediumParams.from_power_per_mode(1, 0.0, mfp_ratio, power_per_mode)
    c_zero = c_heterodyne_avg(r_eff(p0)).bits
    c_inf = c_infinity(power_per_mode).bits
    inv_mfp = 1.0 / mfp_ratio
    strong = math.nan
    if power_per_mode > 1.0:
        strong = 1.0 + math.log(inv_mfp) / math.log(power_per_mode)
    return {
        "ratio": c_inf / c_zero,
        "weak_power": 3.0 * inv_mfp / 8.0,
        "strong_power": strong,
    }


def capacity_curve(params, length_ratios):
    """Heterodyne and Holevo averages along a gain sweep at fixed l/L and P."""
    rows = []
    for lam in np.asarray(length_ratios, dtype=float):
        p = params.with_length_ratio(float(lam))
        het = c_heterodyne_avg(r_eff(p)).bits
        if lam == 0.0:
            hol = c_holevo_noamp(diffusion_averages(p).tau_bar, p.power_per_p0).bits
        else:
            hol = c_holevo_avg(p).bits
        rows.append((float(lam), het, hol))
    return rows
