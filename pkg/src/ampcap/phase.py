"""Where strong amplification helps the Holevo capacity: the A/B phase diagram.

Region A has C_inf > C_H(0) (amplification up to threshold raises the
capacity), region B the opposite. Coordinates are l/L and P/(N P0); the
number of modes drops out because tau_bar P/P0 = (4/3)(l/L)(P/(N P0)).
"""

import math
from dataclasses import dataclass

import numpy as np

from .capacity import c_holevo_noamp, c_infinity
from .errors import NoSignChangeError
from .specfun import EULER_GAMMA

SATURATION_MFP = 3.0 / (8.0 * math.e)
BOUNDARY_TOL = 1e-9
SCAN_PER_DECADE = 200
SCAN_RANGE = (1e-6, 1e6)


@dataclass(frozen=True)
class SeparatrixPoint:
    mfp_ratio: float
    power_per_mode: float
    residual: float
    branch_info: str = ""

    @property
    def solved(self):
        return math.isfinite(self.power_per_mode)


def capacity_gap(mfp_ratio, power_per_mode, n_modes=1):
    """C_inf - C_H(0) in bits at the given l/L and P/(N P0)."""
    tau_bar = 4.0 * mfp_ratio / (3.0 * n_modes)
    power_per_p0 = power_per_mode * n_modes
    return c_infinity(power_per_mode).bits - c_holevo_noamp(tau_bar, power_per_p0, abs_tol=1e-11).bits


def region_of(p, tol=BOUNDARY_TOL):
    """'A', 'B' or 'boundary' for the medium described by ``p`` (gain is ignored)."""
    gap = capacity_gap(p.mfp_ratio, p.power_per_mode, p.n_modes)
    if gap > tol:
        return "A"
    if gap < -tol:
        return "B"
    return "boundary"


def small_power_asymptote(mfp_ratio):
    """P/(N P0) = (3L/4l) exp(-3L/8l + gamma), the separatrix for P << N P0."""
    inv = 1.0 / mfp_ratio
    return 0.75 * inv * math.exp(-0.375 * inv + EULER_GAMMA)


def separatrix(mfp_ratio, bracket, tol=BOUNDARY_TOL, max_iter=200):
    """Root of C_inf - C_H(0) in P/(N P0) at fixed l/L.

    Bisection in log-power until the bracket is tight, then secant steps
    kept inside the bracket until |residual| <= tol.
    """
    lo, hi = float(bracket[0]), float(bracket[1])
    f_lo = capacity_gap(mfp_ratio, lo)
    f_hi = capacity_gap(mfp_ratio, hi)
    if f_lo == 0.0:
        return SeparatrixPoint(mfp_ratio, lo, f_lo)
    if f_hi == 0.0:
        return SeparatrixPoint(mfp_ratio, hi, f_hi)
    if (f_lo > 0) == (f_hi > 0):
        raise NoSignChangeError(
            f"no sign change of C_inf - C_H(0) on [{lo:g}, {hi:g}] at l/L={mfp_ratio:g}: "
            f"ends {f_lo:.3e}, {f_hi:.3e}",
            f_lo,
            f_hi,
        )
    x_lo, x_hi = math.log(lo), math.log(hi)
    for _ in range(max_iter):
        if x_hi - x_lo < 1e-3:
            break
        x_mid = 0.5 * (x_lo + x_hi)
        f_mid = capacity_gap(mfp_ratio, math.exp(x_mid))
        if (f_mid > 0) == (f_lo > 0):
            x_lo, f_lo = x_mid, f_mid
        else:
            x_hi, f_hi = x_mid, f_mid
    best_x, best_f = (x_lo, f_lo) if abs(f_lo) < abs(f_hi) else (x_hi, f_hi)
    for _ in range(max_iter):
        if abs(best_f) <= tol:
            break
        x_new = x_hi - f_hi * (x_hi - x_lo) / (f_hi - f_lo)
        if not x_lo < x_new < x_hi:
            x_new = 0.5 * (x_lo + x_hi)
        f_new = capacity_gap(mfp_ratio, math.exp(x_new))
        if (f_new > 0) == (f_lo > 0):
            x_lo, f_lo = x_new, f_new
        else:
            x_hi, f_hi = x_new, f_new
        if abs(f_new) < abs(best_f):
            best_x, best_f = x_new, f_new
        if x_hi - x_lo <= 1e-15 * max(1.0, abs(x_hi)):
            break
    return SeparatrixPoint(mfp_ratio, math.exp(best_x), best_f)


def scan_sign_changes(mfp_ratio, power_range=SCAN_RANGE, per_decade=SCAN_PER_DECADE):
    """All brackets (low, high) on a log-power grid where C_inf - C_H(0) flips sign."""
    lo, hi = power_range
    n = int(round(per_decade * math.log10(hi / lo))) + 1
    grid = np.logspace(math.log10(lo), math.log10(hi), n)
    gaps = np.array([capacity_gap(mfp_ratio, x) for x in grid])
    sign = np.sign(gaps)
    flips = np.flatnonzero(sign[:-1] * sign[1:] < 0)
    return [(float(grid[i]), float(grid[i + 1])) for i in flips], gaps


def scan_range(mfp_ratio, power_range=SCAN_RANGE):
    """Scan interval, stretched down to three decades below the small-power asymptote."""
    lo, hi = power_range
    guess = small_power_asymptote(mfp_ratio)
    if guess > 0:
        lo = min(lo, guess * 1e-3)
    return max(lo, 1e-280), hi


def separatrix_curve(mfp_grid, power_range=SCAN_RANGE, per_decade=SCAN_PER_DECADE, tol=BOUNDARY_TOL):
    """Separatrix points for each l/L, in grid order.

    The log-power scan starts below the small-power asymptote and runs to
    ``power_range[1]``. Every sign change found is solved, so a grid value
    with two crossings yields two points (``branch_info`` 'root i/n'). Grid
    values without a crossing yield a single unsolved point with NaN power
    and ``branch_info`` describing the region seen across the scan.
    """
    out = []
    for m in mfp_grid:
        m = float(m)
        rng = scan_range(m, power_range)
        brackets, gaps = scan_sign_changes(m, rng, per_decade)
        if not brackets:
            region = "A" if gaps[0] > 0 else "B"
            out.append(
                SeparatrixPoint(
                    m,
                    math.nan,
                    math.nan,
                    f"no-root: region {region} for P/NP0 in [{rng[0]:g}, {rng[1]:g}]",
                )
            )
            continue
        for i, b in enumerate(brackets):
            pt = separatrix(m, b, tol=tol)
            out.append(SeparatrixPoint(m, pt.power_per_mode, pt.residual, f"root {i + 1}/{len(brackets)}"))
    return out


def saturation_mfp(power_max=SCAN_RANGE[1], tol=1e-10):
    """Largest l/L whose separatrix lies below P/(N P0) = power_max.

    For l/L above this value the point (l/L, power_max) is in region B; the
    result approaches 3/(8e) as power_max grows.
    """
    lo, hi = 1e-3, 0.5
    f_lo = capacity_gap(lo, power_max)
    f_hi = capacity_gap(hi, power_max)
    if (f_lo > 0) == (f_hi > 0):
        raise NoSignChangeError("saturation bracket does not straddle the separatrix", f_lo, f_hi)
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if (capacity_gap(mid, power_max) > 0) == (f_lo > 0):
            lo = mid
        else:
            hi = mid
    return lo
