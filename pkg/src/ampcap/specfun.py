"""Special functions used by the capacity formulas.

``gamma0`` is the incomplete gamma function Gamma(0; x), identical to the
exponential integral E1(x). Below ``x = 1`` it is summed from its power
series, above from the continued fraction (modified Lentz). The product
``exp(x) * Gamma(0; x)`` is returned directly by ``exp_gamma0`` so that it
never overflows for large arguments.
"""

import math

import numpy as np

from .errors import DomainError

EULER_GAMMA = 0.5772156649015329
LN2 = math.log(2.0)

_EPS = 2.220446049250313e-16
_FPMIN = 1e-300
_SERIES_CROSSOVER = 1.0
_MAX_ITER = 1_000_000


def _check_positive(x):
    x = float(x)
    if not x > 0.0:
        raise DomainError(f"argument must be positive, got {x!r}")
    return x


def _ein(x):
    """Entire part of E1: sum_{k>=1} (-1)^(k+1) x^k / (k k!)."""
    total = 0.0
    term = 1.0
    k = 0
    while True:
        k += 1
        term *= -x / k
        contrib = term / k
        total -= contrib
        if abs(contrib) <= _EPS * abs(total):
            return total
        if k > _MAX_ITER:
            raise ArithmeticError("power series for E1 did not converge")


def gamma0_series(x):
    """Gamma(0; x) from the power series -gamma - ln x + Ein(x).

    Accurate for small and moderate x; cancellation grows like exp(x)
    so the result loses digits above x ~ 3.
    """
    x = _check_positive(x)
    return -EULER_GAMMA - math.log(x) + _ein(x)


def exp_gamma0_cf(x):
    """exp(x) * Gamma(0; x) from the continued fraction.

    Converges for every x > 0 but the iteration count grows like 1/x,
    so it is the method of choice only for x >= 1.
    """
    x = _check_positive(x)
    b = x + 1.0
    c = 1.0 / _FPMIN
    d = 1.0 / b
    h = d
    for i in range(1, _MAX_ITER):
        an = -float(i) * i
        b += 2.0
        d = an * d + b
        if abs(d) < _FPMIN:
            d = _FPMIN
        c = b + an / c
        if abs(c) < _FPMIN:
            c = _FPMIN
        d = 1.0 / d
        delta = c * d
        h *= delta
        if abs(delta - 1.0) <= _EPS:
            return h
    raise ArithmeticError(f"continued fraction for E1 did not converge at x={x}")


def gamma0_cf(x):
    """Gamma(0; x) from the continued fraction, see ``exp_gamma0_cf``."""
    return exp_gamma0_cf(x) * math.exp(-float(x))


def gamma0(x):
    """Incomplete gamma function Gamma(0; x) = int_x^inf exp(-t)/t dt.

    Raises DomainError for x <= 0. Underflows to 0.0 for x beyond ~745.
    """
    x = _check_positive(x)
    if x < _SERIES_CROSSOVER:
        return gamma0_series(x)
    return gamma0_cf(x)


def exp_gamma0(x):
    """exp(x) * Gamma(0; x), finite for all x > 0.

    Lies in the bracket (1/(x+1), 1/x) and behaves like 1/x - 1/x**2 for
    large x; ``exp(x)`` is never formed above the series crossover.
    """
    x = _check_positive(x)
    if x < _SERIES_CROSSOVER:
        return math.exp(x) * gamma0_series(x)
    return exp_gamma0_cf(x)


def g_scalar(x):
    """Scalar fast path of ``g_entropy`` without domain checks."""
    if x == 0.0:
        return 0.0
    if x < 1.0:
        # 1/x would overflow for subnormal x
        return ((1.0 + x) * math.log1p(x) - x * math.log(x)) / LN2
    return (math.log1p(x) + x * math.log1p(1.0 / x)) / LN2


def g_entropy(x):
    """Entropy in bits of a Gaussian state with mean photon number x.

    g(x) = (x+1) log2(x+1) - x log2 x, with g(0) = 0. Accepts scalars or
    arrays; negative arguments raise DomainError.
    """
    arr = np.asarray(x, dtype=float)
    if np.any(arr < 0) or np.any(np.isnan(arr)):
        raise DomainError("g_entropy requires x >= 0")
    safe = np.where(arr > 0, arr, 1.0)
    small = arr < 1.0
    # x log1p(1/x) = x log1p(x) - x log x, used below 1 where 1/x may overflow
    tail = np.where(small, arr * np.log1p(arr) - arr * np.log(safe), arr * np.log1p(1.0 / np.where(small, 1.0, safe)))
    out = (np.log1p(arr) + tail) / LN2
    if np.ndim(out) == 0:
        return float(out)
    return out
