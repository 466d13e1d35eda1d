"""Microscopic waveguide: a disordered tight-binding strip with uniform gain.

Square lattice, hopping -1, on-site energies uniform in [-W/2, W/2] plus a
uniform imaginary part +i*gain, attached to clean semi-infinite leads of the
same width. Because the leads and the hopping are uniform across the strip,
all work is done in the basis of transverse sine modes, where the lead
self-energies are diagonal. The scattering matrix follows from the
recursive Green function (slice by slice, never a transfer-matrix product)
and the Fisher-Lee relation

    S = -1 + i sqrt(v) G sqrt(v)

restricted to propagating modes. Disorder realisations are processed in
fixed-size chunks with one batched recursion per chunk, so the result of a
sample never depends on how many worker threads ran the ensemble.
"""

import csv
import io
import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np
from scipy import stats as sps

from .errors import DomainError, FitQualityError, LasingInstabilityError
from .medium import POSITIVITY_TOL, ScatteringMatrix

CHUNK = 16
COND_LIMIT = 1e12
UNITARITY_TOL = 1e-10


@dataclass(frozen=True)
class LatticeSpec:
    width: int
    length: int
    disorder_strength: float = 0.0
    gain: float = 0.0
    energy: float = 0.0
    seed: int = 0

    def __post_init__(self):
        if int(self.width) != self.width or self.width < 1:
            raise DomainError(f"width must be a positive integer, got {self.width!r}")
        if int(self.length) != self.length or self.length < 1:
            raise DomainError(f"length must be a positive integer, got {self.length!r}")
        if self.disorder_strength < 0:
            raise DomainError("disorder_strength must be >= 0")
        if self.gain < 0:
            raise DomainError("gain must be >= 0 (absorption is not modelled)")
        if not 0 <= self.seed < 1 << 64:
            raise DomainError("seed must be a 64-bit unsigned integer")
        if lead_modes(self.width, self.energy).n_open < 1:
            raise DomainError(f"no propagating modes at energy {self.energy}")

    def replace(self, **changes):
        return LatticeSpec(**{**asdict(self), **changes})

    @property
    def n_modes(self):
        return lead_modes(self.width, self.energy).n_open


@dataclass(frozen=True)
class LeadModes:
    eps: np.ndarray  # transverse energies
    sigma: np.ndarray  # lead self-energy per transverse mode
    velocity: np.ndarray  # 2 sin q for open modes, 0 otherwise
    open_idx: np.ndarray
    basis: np.ndarray  # columns are transverse sine modes

    @property
    def n_open(self):
        return int(self.open_idx.size)


def lead_modes(width, energy):
    y = np.arange(1, width + 1)
    k = np.arange(1, width + 1)
    basis = np.sqrt(2.0 / (width + 1)) * np.sin(np.outer(y, k) * np.pi / (width + 1))
    eps = -2.0 * np.cos(k * np.pi / (width + 1))
    c = (eps - energy) / 2.0  # cos q
    is_open = np.abs(c) < 1.0
    lam = np.empty(width, dtype=complex)
    q = np.arccos(np.clip(c[is_open], -1.0, 1.0))
    lam[is_open] = np.exp(1j * q)
    ce = c[~is_open]
    lam[~is_open] = ce - np.sign(ce) * np.sqrt(ce * ce - 1.0)
    velocity = np.zeros(width)
    velocity[is_open] = 2.0 * np.sin(q)
    return LeadModes(eps, -lam, velocity, np.flatnonzero(is_open), basis)


def _sample_rng(seed, index):
    seq = np.random.SeedSequence(seed, spawn_key=(index,))
    return np.random.Generator(np.random.Philox(seq))


def disorder_potential(spec, index):
    """On-site energies (length, width) of disorder realisation ``index``."""
    if spec.disorder_strength == 0.0:
        return np.zeros((spec.length, spec.width))
    half = 0.5 * spec.disorder_strength
    return _sample_rng(spec.seed, index).uniform(-half, half, size=(spec.length, spec.width))


def _slice_matrices(spec, modes, potentials):
    """E - H_j in the transverse-mode basis, shape (batch, length, W, W)."""
    phi = modes.basis
    h = np.einsum("ym,bjy,yn->bjmn", phi, potentials, phi).astype(complex)
    diag = spec.energy - modes.eps - 1j * spec.gain
    idx = np.arange(spec.width)
    out = -h
    out[..., idx, idx] += diag
    return out


def _recursive_green(a, sigma_left, sigma_right):
    """Corner blocks G_11, G_1L, G_L1, G_LL of the full Green function.

    ``a`` holds E - H_j per slice (batch, L, W, W); slices couple through
    hopping -1, so the left-connected recursion reads
    G_jj = (A_j - G_{j-1,j-1})^-1. Returns the four blocks and a
    conditioning measure for the last inversion: the norm of G_LL times the
    natural scale of that slice (|A_L| + |Sigma| + 1 for the hopping).
    This catches singularities of the whole system even when the last
    block is small, where the plain condition number would not.
    """
    n_slices = a.shape[1]
    idx = np.arange(a.shape[-1])
    first = a[:, 0].copy()
    first[..., idx, idx] -= sigma_left
    if n_slices == 1:
        first[..., idx, idx] -= sigma_right
    g_jj = np.linalg.inv(first)
    g_11 = g_jj
    g_j1 = g_jj
    g_1j = g_jj
    for j in range(1, n_slices):
        m = a[:, j] - g_jj
        if j == n_slices - 1:
            m[..., idx, idx] -= sigma_right
        g_new = np.linalg.inv(m)
        g_11 = g_11 + g_1j @ g_new @ g_j1
        g_j1 = -(g_new @ g_j1)
        g_1j = -(g_1j @ g_new)
        g_jj = g_new
    scale = np.linalg.norm(a[:, -1], 2, axis=(1, 2)) + np.max(np.abs(sigma_right)) + 1.0
    cond = np.linalg.norm(g_jj, 2, axis=(1, 2)) * scale
    return g_11, g_1j, g_j1, g_jj, cond


def _scattering_batch(spec, modes, potentials):
    a = _slice_matrices(spec, modes, potentials)
    g_11, g_1l, g_l1, g_ll, cond = _recursive_green(a, modes.sigma, modes.sigma)
    op = modes.open_idx
    sv = np.sqrt(modes.velocity[op])
    scale = 1j * np.outer(sv, sv)
    eye = np.eye(op.size)
    sub = np.ix_(op, op)
    r_left = -eye + scale * g_11[(slice(None),) + sub]
    t_prime = scale * g_1l[(slice(None),) + sub]
    t = scale * g_l1[(slice(None),) + sub]
    r_right = -eye + scale * g_ll[(slice(None),) + sub]
    s = np.concatenate(
        [np.concatenate([r_left, t_prime], axis=2), np.concatenate([t, r_right], axis=2)], axis=1
    )
    return s, cond


def _check_instability(spec, s, cond, offset=0):
    bad = np.flatnonzero(~np.isfinite(cond) | (cond > COND_LIMIT) | ~np.all(np.isfinite(s), axis=(1, 2)))
    if bad.size:
        i = offset + int(bad[0])
        raise LasingInstabilityError(
            f"sample {i}: linear problem singular (condition number {cond[bad[0]]:.3e})", i
        )
    eye = np.eye(s.shape[-1])
    excess = s @ np.conj(np.swapaxes(s, 1, 2)) - eye
    min_eig = np.linalg.eigvalsh(excess)[:, 0]
    viol = np.max(np.abs(excess), axis=(1, 2))
    if spec.gain > 0:
        scale = np.linalg.norm(s, 2, axis=(1, 2)) ** 2
        bad = np.flatnonzero(min_eig < -POSITIVITY_TOL * scale)
        if bad.size:
            i = offset + int(bad[0])
            raise LasingInstabilityError(
                f"sample {i}: S is no longer super-unitary (min eig {min_eig[bad[0]]:.3e}); "
                "gain is beyond the lasing threshold of this realisation",
                i,
            )
    return min_eig, viol


def scattering_matrix(spec, index=0):
    """Full 2N x 2N scattering matrix of disorder realisation ``index``.

    The left lead (first N rows/columns) is the sender, the right lead the
    receiver.
    """
    modes = lead_modes(spec.width, spec.energy)
    pot = disorder_potential(spec, index)[None]
    s, cond = _scattering_batch(spec, modes, pot)
    _check_instability(spec, s, cond, offset=index)
    return ScatteringMatrix(s[0])


@dataclass
class EnsembleStats:
    spec: LatticeSpec
    alpha: int
    beta: int
    n_modes: int
    tau_samples: np.ndarray
    sigma_samples: np.ndarray
    transmission_samples: np.ndarray
    min_eig_samples: np.ndarray
    unitarity_samples: np.ndarray
    tau_bar_hat: float = field(init=False)
    sigma_bar_hat: float = field(init=False)
    min_eig_ssdagger: float = field(init=False)

    def __post_init__(self):
        self.tau_bar_hat = math.fsum(self.tau_samples) / self.n_samples
        self.sigma_bar_hat = math.fsum(self.sigma_samples) / self.n_samples
        self.min_eig_ssdagger = float(np.min(self.min_eig_samples))

    @property
    def n_samples(self):
        return int(self.tau_samples.size)

    @property
    def unitarity_max_violation(self):
        return float(np.max(self.unitarity_samples))

    def stderr(self, values):
        values = np.asarray(values)
        if values.size < 2:
            return 0.0
        return float(np.std(values, ddof=1) / math.sqrt(values.size))

    def ks_exponential(self):
        """KS test of tau against an exponential law with the sample mean."""
        res = sps.kstest(self.tau_samples, "expon", args=(0.0, self.tau_bar_hat))
        return float(res.statistic), float(res.pvalue)

    def summary(self):
        ks_stat, ks_p = self.ks_exponential()
        return {
            "spec": asdict(self.spec),
            "alpha": self.alpha,
            "beta": self.beta,
            "n_modes": self.n_modes,
            "n_samples": self.n_samples,
            "tau_bar_hat": self.tau_bar_hat,
            "tau_bar_stderr": self.stderr(self.tau_samples),
            "sigma_bar_hat": self.sigma_bar_hat,
            "sigma_bar_stderr": self.stderr(self.sigma_samples),
            "mean_transmission": math.fsum(self.transmission_samples) / self.n_samples,
            "min_eig_ssdagger": self.min_eig_ssdagger,
            "unitarity_max_violation": self.unitarity_max_violation,
            "ks_statistic": ks_stat,
            "ks_pvalue": ks_p,
        }

    def to_csv(self):
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["sample_index", "tau", "sigma", "min_eig", "seed"])
        for i in range(self.n_samples):
            w.writerow(
                [
                    i,
                    f"{self.tau_samples[i]:.8e}",
                    f"{self.sigma_samples[i]:.8e}",
                    f"{self.min_eig_samples[i]:.8e}",
                    self.spec.seed,
                ]
            )
        return buf.getvalue()

    def to_json(self):
        return json.dumps(self.summary(), indent=2, sort_keys=True)


def _chunk_observables(spec, modes, alpha, beta, start, stop):
    pot = np.stack([disorder_potential(spec, i) for i in range(start, stop)])
    s, cond = _scattering_batch(spec, modes, pot)
    min_eig, viol = _check_instability(spec, s, cond, offset=start)
    n = modes.n_open
    weights = np.abs(s[:, n + beta, :]) ** 2
    tau = weights[:, alpha]
    sigma = weights.sum(axis=1)
    trans = np.sum(np.abs(s[:, n:, :n]) ** 2, axis=(1, 2))
    return tau, sigma, trans, min_eig, viol


def run_ensemble(spec, n_samples, alpha=None, beta=None, workers=1):
    """Disorder ensemble of scattering matrices summarised per sample.

    Mode indices are zero-based and default to the middle propagating mode.
    Raises LasingInstabilityError (carrying the sample index) when any
    realisation is at or beyond its lasing threshold.
    """
    if n_samples < 1:
        raise DomainError("n_samples must be >= 1")
    modes = lead_modes(spec.width, spec.energy)
    n = modes.n_open
    alpha = n // 2 if alpha is None else alpha
    beta = n // 2 if beta is None else beta
    for name, v in (("alpha", alpha), ("beta", beta)):
        if not 0 <= v < n:
            raise DomainError(f"{name}={v} outside 0..{n - 1}")
    bounds = [(i, min(i + CHUNK, n_samples)) for i in range(0, n_samples, CHUNK)]

    def work(b):
        return _chunk_observables(spec, modes, alpha, beta, *b)

    if workers and workers > 1 and len(bounds) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(work, bounds))
    else:
        parts = [work(b) for b in bounds]
    cols = [np.concatenate(c) for c in zip(*parts)]
    return EnsembleStats(spec, alpha, beta, n, *cols)


@dataclass(frozen=True)
class MfpFit:
    mfp: float
    residual: float
    diffusive: bool
    lengths: tuple
    mean_transmission: tuple
    contact: float


def calibrate_mfp(spec, lengths, n_samples, workers=1, max_residual=0.1):
    """Transport mean free path (lattice units) from a length sweep at zero gain.

    Fits N / <T> = c + 3 L / (4 l), i.e. <T> = (4/3) N l / L plus a contact
    term, where T = sum_nm |t_nm|^2. A non-positive slope (ballistic
    sample) returns l = inf with ``diffusive=False``.
    """
    if spec.gain != 0:
        raise DomainError("mean free path calibration requires gain = 0")
    lengths = tuple(int(x) for x in lengths)
    if len(lengths) < 2:
        raise DomainError("need at least two lengths")
    means = []
    n_modes = spec.n_modes
    for length in lengths:
        st = run_ensemble(spec.replace(length=length), n_samples, workers=workers)
        means.append(math.fsum(st.transmission_samples) / st.n_samples)
    means = np.array(means)
    x = np.array(lengths, dtype=float)
    y = n_modes / means
    slope, intercept = np.polyfit(x, y, 1)
    if slope <= 1e-3 * max(intercept, 1e-300) / x.max():
        return MfpFit(math.inf, 0.0, False, lengths, tuple(means), float(intercept))
    fitted = n_modes / (intercept + slope * x)
    residual = float(np.max(np.abs(fitted - means) / means))
    if residual > max_residual:
        raise FitQualityError(f"mean free path fit residual {residual:.3f} exceeds {max_residual}")
    mfp = 3.0 / (4.0 * slope)
    return MfpFit(float(mfp), residual, True, lengths, tuple(means), float(intercept))


def snr_instances(stats, power_per_p0):
    """Per-sample R = (P/P0) tau / sigma with each sample's own sigma."""
    return power_per_p0 * stats.tau_samples / stats.sigma_samples


def snr_histogram(stats, power_per_p0, bins=None):
    """Histogram of per-sample signal-to-noise ratios as (low, high, count) triples."""
    r = snr_instances(stats, power_per_p0)
    if bins is None:
        bins = max(1, int(math.ceil(math.sqrt(r.size))))
    counts, edges = np.histogram(r, bins=bins)
    return [(float(edges[i]), float(edges[i + 1]), int(counts[i])) for i in range(counts.size)]
