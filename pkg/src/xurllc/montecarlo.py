"""Monte Carlo checks: channel draws with LS estimation, the optimal linear
detector, empirical SINR, and a slotted FCFS queue driven by the service model."""

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .channel import sinr_cdf
from .errors import DomainError
from .fbc import achievable_rate_array
from .snc import FIXED_RATE

# Stream purposes; each (seed, purpose, ue) triple owns one generator.
CHANNEL, ESTIMATION, ARRIVALS, DECODING, FADING, DROP, SHADOWING = range(7)
WARMUP_FRACTION = 0.1
COND_LIMIT = 1e12


class IllConditionedWarning(RuntimeWarning):
    pass


def stream(seed, purpose, ue=0):
    return np.random.default_rng(np.random.SeedSequence([int(seed), purpose, ue]))


def _complex_normal(rng, shape):
    z = rng.standard_normal(shape + (2,))
    return (z[..., 0] + 1j * z[..., 1]) / math.sqrt(2.0)


@dataclass(frozen=True)
class ChannelRealization:
    h_small: np.ndarray   # H', N_T x M
    h_est: np.ndarray     # LS estimate of H'
    d: np.ndarray         # conditional mean of H given the estimate
    e: np.ndarray         # H - D
    g: np.ndarray         # D D^H + I / omega
    omega: float


def _draw_batch(config, large_scale, n_draws, seed):
    """(n_draws, N_T, M) arrays of H' and its LS estimate, one stream per UE."""
    n_t, n_ue = config.n_antennas, config.n_ues
    lb = large_scale.pathloss * large_scale.shadow
    noise_var = 1.0 / (config.snr * config.pilot_len * lb)
    h = np.empty((n_draws, n_t, n_ue), dtype=complex)
    w = np.empty_like(h)
    for m in range(n_ue):
        h[:, :, m] = _complex_normal(stream(seed, CHANNEL, m), (n_draws, n_t))
        w[:, :, m] = math.sqrt(noise_var[m]) * _complex_normal(stream(seed, ESTIMATION, m),
                                                               (n_draws, n_t))
    return h, h + w


def draw_channel(config, large_scale, seed):
    """One block-fading realization. Equals draw 0 of :func:`empirical_sinr` with the same seed."""
    h, h_est = _draw_batch(config, large_scale, 1, seed)
    h, h_est = h[0], h_est[0]
    lb = large_scale.pathloss * large_scale.shadow
    d = h_est * (large_scale.delta * np.sqrt(lb))[None, :]
    e = h * np.sqrt(lb)[None, :] - d
    g = d @ d.conj().T + np.eye(config.n_antennas) / large_scale.omega
    return ChannelRealization(h, h_est, d, e, g, large_scale.omega)


def optimal_detector(realization):
    """Rows L*_m = d_m^H G^{-1}, returned as an M x N_T array."""
    g = realization.g
    cond = np.linalg.cond(g)
    if not cond < COND_LIMIT:
        warnings.warn(f"detector Gram matrix is ill-conditioned (cond ~ {cond:.2e})",
                      IllConditionedWarning, stacklevel=2)
    # G is Hermitian, so (G^{-1} d)^H = d^H G^{-1}.
    return np.linalg.solve(g, realization.d).conj().T


def sinr_for_detector(realization, m, row):
    """Post-detection SINR of UE ``m`` with an arbitrary detector row."""
    proj = np.abs(row @ realization.d) ** 2
    signal = proj[m]
    interference = proj.sum() - signal
    noise = np.vdot(row, row).real / realization.omega
    return float(signal / (interference + noise))


def optimal_sinr(realization):
    """Closed form s/(1 - s) with s = d_m^H G^{-1} d_m, for every UE."""
    x = np.linalg.solve(realization.g, realization.d)
    s = np.einsum("nm,nm->m", realization.d.conj(), x).real
    return s / (1.0 - s)


def empirical_sinr(config, large_scale, n_draws, seed):
    """(n_draws, M) optimal-detector SINR samples.

    Uses D^H (D D^H + cI)^{-1} D = K (K + cI)^{-1} with K = D^H D, so each
    draw only needs an M x M solve.
    """
    if n_draws < 1:
        raise DomainError("n_draws must be >= 1")
    _, h_est = _draw_batch(config, large_scale, n_draws, seed)
    lb = large_scale.pathloss * large_scale.shadow
    d = h_est * (large_scale.delta * np.sqrt(lb))[None, None, :]
    k = np.einsum("bni,bnj->bij", d.conj(), d)
    ridge = np.eye(config.n_ues) / large_scale.omega
    # K and (K + cI)^{-1} commute, so solving from the left gives the same S.
    s = np.linalg.solve(k + ridge[None], k)
    diag = np.einsum("bii->bi", s).real
    return diag / (1.0 - diag)


@dataclass(frozen=True)
class GammaFitReport:
    n: int
    ks: float
    threshold: float
    mean_rel_err: float
    var_rel_err: float

    @property
    def consistent(self):
        return self.ks < self.threshold


def ks_distance(samples, cdf_values):
    """Two-sided Kolmogorov-Smirnov statistic from sorted samples' model cdf values."""
    n = len(cdf_values)
    i = np.arange(1, n + 1)
    return float(max(np.max(i / n - cdf_values), np.max(cdf_values - (i - 1) / n)))


def validate_gamma_fit(samples, model):
    x = np.sort(np.asarray(samples, dtype=float))
    if x.size < 1000:
        raise DomainError("need at least 1000 samples")
    cdf = sinr_cdf(model, x)
    mean, var = x.mean(), x.var(ddof=1)
    return GammaFitReport(
        n=x.size,
        ks=ks_distance(x, cdf),
        threshold=1.36 / math.sqrt(x.size),
        mean_rel_err=float(abs(mean - model.mean) / model.mean),
        var_rel_err=float(abs(var - model.variance) / model.variance),
    )


@dataclass(frozen=True)
class QueueTrace:
    arrivals: np.ndarray
    service: np.ndarray
    delays: np.ndarray     # virtual delay per post-warm-up slot; inf if unresolved by T
    horizon: int
    seed: int
    warmup: int
    unstable: bool

    @property
    def backlog(self):
        x = np.concatenate([[0.0], np.cumsum(self.arrivals - self.service)])
        return x - np.minimum.accumulate(x)


def service_draws(service, n, seed, ue=0):
    """Bits served in each of ``n`` slots."""
    coin = stream(seed, DECODING, ue).random(n)
    if service.variant == FIXED_RATE:
        return np.where(coin >= service.expected_ep, service.payload, 0.0)
    g = service.sinr
    gamma = stream(seed, FADING, ue).gamma(g.shape, g.scale, size=n)
    bits = service.blocklength * achievable_rate_array(gamma, service.eps, service.blocklength)
    return np.where(coin >= service.eps, bits, 0.0)


def simulate_queue(arrival_rate, service, horizon, seed, *, ue=0):
    """Slotted FCFS queue with Poisson arrivals.

    Arrivals of slot t may leave in slot t. Departures follow the Lindley
    recursion and the virtual delay of slot t is the smallest w with
    A(0, t) <= D(0, t + w).
    """
    horizon = int(horizon)
    if horizon < 1:
        raise DomainError("horizon must be >= 1")
    if arrival_rate < 0:
        raise DomainError("arrival rate must be non-negative")
    a = stream(seed, ARRIVALS, ue).poisson(arrival_rate, size=horizon).astype(float)
    s = service_draws(service, horizon, seed, ue)

    x = np.concatenate([[0.0], np.cumsum(a - s)])
    backlog = x - np.minimum.accumulate(x)
    cum_a = np.concatenate([[0.0], np.cumsum(a)])
    cum_d = cum_a - backlog

    warmup = int(WARMUP_FRACTION * horizon)
    t = np.arange(warmup, horizon + 1)
    tol = 1e-9 * max(1.0, cum_a[-1])
    idx = np.searchsorted(cum_d, cum_a[t] - tol, side="left")
    delays = np.where(idx <= horizon, idx - t, np.inf).astype(float)
    delays = np.maximum(delays, 0.0)

    mean_service = s.mean()
    unstable = bool(arrival_rate > 0 and arrival_rate >= mean_service)
    if unstable:
        warnings.warn("mean arrivals meet or exceed mean service; queue is unstable",
                      RuntimeWarning, stacklevel=2)
    for arr in (a, s, delays):
        arr.setflags(write=False)
    return QueueTrace(a, s, delays, horizon, int(seed), warmup, unstable)


def violation_frequency(trace, target_delay, *, strict=False):
    """Fraction of sampled slots with W >= d (or W > d when ``strict``)."""
    w = trace.delays
    hit = w > target_delay if strict else w >= target_delay
    return float(np.mean(hit))


def binomial_se(p, n):
    return math.sqrt(max(p * (1.0 - p), 0.0) / n)
