"""Independent numerical checks of the closed forms.

Monte Carlo averages over the Rayleigh law of tau, an adaptive
Gauss-Legendre quadrature of the same average, and a sampling estimate of
the mutual information of the Gaussian heterodyne channel.

Random numbers come from Philox streams keyed by ``(master_seed,
stream_id, block)``; samples are generated in fixed blocks of
``BLOCK_SIZE`` so that sample ``i`` is the same whatever the total count or
the number of worker threads.
"""

import heapq
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .capacity import CapacityResult
from .errors import DomainError, QuadratureError
from .medium import diffusion_averages
from .specfun import LN2, g_entropy

BLOCK_SIZE = 1 << 16
KINDS = ("heterodyne", "holevo")
_U64 = 1 << 64


@dataclass(frozen=True)
class RngSpec:
    master_seed: int = 0
    stream_id: int = 0

    def __post_init__(self):
        for name in ("master_seed", "stream_id"):
            v = getattr(self, name)
            if int(v) != v or not 0 <= v < _U64:
                raise DomainError(f"{name} must be a 64-bit unsigned integer, got {v!r}")

    def block_generator(self, block):
        seq = np.random.SeedSequence(self.master_seed, spawn_key=(self.stream_id, block))
        return np.random.Generator(np.random.Philox(seq))


@dataclass(frozen=True)
class McEstimate:
    mean: float
    std_error: float
    n_samples: int

    def contains(self, value, n_sigma=4.0):
        return abs(value - self.mean) <= n_sigma * self.std_error


def _blocks(n):
    return [(b, min(BLOCK_SIZE, n - b * BLOCK_SIZE)) for b in range((n + BLOCK_SIZE - 1) // BLOCK_SIZE)]


def _map_blocks(fn, n, workers):
    blocks = _blocks(n)
    if workers is None or workers <= 1 or len(blocks) == 1:
        parts = [fn(b, k) for b, k in blocks]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(lambda bk: fn(*bk), blocks))
    return np.concatenate(parts)


def summarize(values):
    """Mean and standard error with a fixed-order exact summation."""
    values = np.asarray(values, dtype=float)
    n = values.size
    mean = math.fsum(values) / n
    if n == 1:
        return McEstimate(mean, 0.0, 1)
    var = math.fsum((values - mean) ** 2) / (n - 1)
    return McEstimate(mean, math.sqrt(var / n), n)


def _unit_exponential(rng, block, k):
    # 1 - U lies in (0, 1], so the log is finite
    u = 1.0 - rng.block_generator(block).random(k)
    return -np.log(u)


def sample_tau(tau_bar, n, rng=RngSpec(), workers=1):
    """n draws of tau from the exponential (Rayleigh-intensity) law with mean tau_bar."""
    if not tau_bar > 0:
        raise DomainError(f"tau_bar must be positive, got {tau_bar!r}")
    if n < 1:
        raise DomainError("n must be >= 1")
    unit = _map_blocks(lambda b, k: _unit_exponential(rng, b, k), int(n), workers)
    return tau_bar * unit


def _moments(p):
    avg = diffusion_averages(p)
    return p.power_per_p0 * avg.tau_bar, avg.sigma_bar


def _integrand(kind, signal, sigma_bar):
    """Capacity as a function of x = tau / tau_bar, plus its derivative.

    ``signal`` is tau_bar P/P0; sigma stays fixed at sigma_bar.
    """
    if sigma_bar < 1:
        raise DomainError(f"sigma_bar must be >= 1, got {sigma_bar!r}")
    if kind == "heterodyne":
        snr = signal / sigma_bar

        def f(x):
            return np.log1p(snr * x) / LN2

        def df(x):
            return snr / ((1.0 + snr * x) * LN2)

        return f, df
    if kind == "holevo":
        a = signal
        noise = sigma_bar - 1.0
        g0 = g_entropy(noise)

        def f(x):
            return g_entropy(a * np.asarray(x, dtype=float) + noise) - g0

        def df(x):
            return a * np.log1p(1.0 / (a * x + noise)) / LN2

        return f, df
    raise DomainError(f"unknown capacity kind {kind!r}; expected one of {KINDS}")


def mc_average_capacity(kind, p, n, rng=RngSpec(), workers=1):
    """Monte Carlo average of the per-instance capacity over tau at fixed sigma_bar."""
    f, _ = _integrand(kind, *_moments(p))
    unit = _map_blocks(lambda b, k: _unit_exponential(rng, b, k), int(n), workers)
    return summarize(f(unit))


_GL_LO = np.polynomial.legendre.leggauss(10)
_GL_HI = np.polynomial.legendre.leggauss(21)


def _gl_pair(h, lo, hi):
    mid = 0.5 * (lo + hi)
    half = 0.5 * (hi - lo)
    x_lo = mid + half * _GL_LO[0]
    x_hi = mid + half * _GL_HI[0]
    q_lo = half * np.dot(_GL_LO[1], h(x_lo))
    q_hi = half * np.dot(_GL_HI[1], h(x_hi))
    return q_hi, abs(q_hi - q_lo)


def adaptive_gauss_legendre(h, lo, hi, abs_tol, max_intervals=5000):
    """Globally adaptive 10/21-point Gauss-Legendre quadrature on [lo, hi].

    The interval with the largest error estimate is bisected until the
    summed estimate drops below ``abs_tol``. Returns (value, error).
    """
    q, e = _gl_pair(h, lo, hi)
    heap = [(-e, lo, hi, q)]
    total_err = e
    count = 1
    while total_err > abs_tol:
        if count >= max_intervals:
            raise QuadratureError(
                f"adaptive quadrature stalled at error {total_err:.3e} (target {abs_tol:.3e})"
            )
        neg_e, a, b, _ = heapq.heappop(heap)
        m = 0.5 * (a + b)
        if not a < m < b:
            raise QuadratureError("adaptive quadrature ran out of floating point resolution")
        ql, el = _gl_pair(h, a, m)
        qr, er = _gl_pair(h, m, b)
        heapq.heappush(heap, (-el, a, m, ql))
        heapq.heappush(heap, (-er, m, b, qr))
        total_err += el + er + neg_e
        count += 1
    # recompute in a fixed order so the result does not depend on heap history
    items = sorted(heap, key=lambda it: it[1])
    value = math.fsum(it[3] for it in items)
    err = math.fsum(-it[0] for it in items)
    return value, err


def _tail_cut(f, df, bound):
    # f is concave and increasing: int_X^inf e^-x f <= e^-X (f(X) + f'(X))
    x = 20.0
    while True:
        tail = math.exp(-x) * (float(f(x)) + float(df(x)))
        if tail < bound or x > 800:
            return x, tail
        x += 5.0


def quad_average_capacity(kind, p, abs_tol=1e-10):
    """Deterministic Rayleigh average of the per-instance capacity.

    Integrates exp(-x) c(tau_bar x) on [0, X] adaptively and bounds the tail
    beyond X analytically; ``err_estimate`` is the sum of both.
    """
    return quad_average_moments(kind, *_moments(p), abs_tol=abs_tol)


def quad_average_moments(kind, signal, sigma_bar, abs_tol=1e-10):
    """``quad_average_capacity`` for given tau_bar P/P0 and sigma_bar."""
    if not abs_tol > 0:
        raise DomainError("abs_tol must be positive")
    if signal == 0.0:
        return CapacityResult(0.0, "quadrature_oracle", 0.0)
    f, df = _integrand(kind, signal, sigma_bar)
    cut, tail = _tail_cut(f, df, abs_tol / 10)

    def h(x):
        return np.exp(-x) * f(x)

    value, err = adaptive_gauss_legendre(h, 0.0, cut, abs_tol - tail)
    return CapacityResult(max(value, 0.0), "quadrature_oracle", err + tail)


def _mi_block(r, rng, block, k):
    gen = rng.block_generator(block)
    z = gen.standard_normal((k, 4)) * math.sqrt(0.5)
    mu = z[:, 0] + 1j * z[:, 1]
    noise = z[:, 2] + 1j * z[:, 3]
    nu = math.sqrt(r) * mu + noise
    return math.log1p(r) / LN2 + (np.abs(nu) ** 2 / (1.0 + r) - np.abs(noise) ** 2) / LN2


def mutual_info_gaussian(r, n, rng=RngSpec(), workers=1):
    """Sampling estimate of the mutual information of the Gaussian channel.

    Input mu and noise are unit-variance complex Gaussians, nu = sqrt(r) mu +
    noise, and log2 P(nu|mu)/p(nu) is averaged using the exact marginal of
    nu (variance 1 + r). The estimate converges to log2(1 + r).
    """
    if not r > 0:
        raise DomainError(f"r must be positive, got {r!r}")
    values = _map_blocks(lambda b, k: _mi_block(r, rng, b, k), int(n), workers)
    return summarize(values)
