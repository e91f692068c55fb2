"""Large-scale fading and the Gamma approximation of post-detection SINR."""

import math
from dataclasses import dataclass, field, replace

import numpy as np

from .errors import ConvergenceError, DomainError
from .special import gammainc_lower


def db_to_linear(db):
    return 10.0 ** (db / 10.0)


@dataclass(frozen=True)
class SystemConfig:
    """Uplink massive MU-MIMO scenario.

    Powers are in watts. ``noise_power`` is the per-antenna receiver noise the
    transmit power is normalised by; every SNR-like quantity uses
    ``tx_power / noise_power``. ``distances`` and ``shadows`` pin the UE
    geometry; when left as None the UEs sit at equally spaced distances in
    [d_min, d_max] with no shadowing.
    """

    n_antennas: int = 50
    n_ues: int = 12
    bandwidth: float = 480e3
    slot_duration: float = 0.5e-3
    pilot_len: int = 70
    tx_power: float = 0.5
    noise_power: float = 0.025
    pathloss_const: float = field(default_factory=lambda: db_to_linear(-12.0))
    pathloss_exp: float = 2.5
    d_min: float = 35.0
    d_max: float = 95.0
    shadow_sigma: float = 0.0
    circuit_power: float = 0.5
    amp_eff: float = 0.5
    p_max: float = 2.0
    distances: tuple | None = None
    shadows: tuple | None = None

    def __post_init__(self):
        n_cu = self.blocklength
        checks = [
            (self.n_ues >= 1, "n_ues >= 1"),
            (self.n_antennas >= self.n_ues, "n_antennas >= n_ues"),
            (n_cu >= 2, "blocklength = bandwidth * slot_duration >= 2"),
            (self.n_ues <= self.pilot_len <= n_cu - 1,
             f"n_ues <= pilot_len <= blocklength - 1 = {n_cu - 1}"),
            (self.tx_power > 0, "tx_power > 0"),
            (self.noise_power > 0, "noise_power > 0"),
            (self.pathloss_const > 0, "pathloss_const > 0"),
            (0 < self.d_min <= self.d_max, "0 < d_min <= d_max"),
            (self.shadow_sigma >= 0, "shadow_sigma >= 0"),
            (self.circuit_power > 0, "circuit_power > 0"),
            (0 < self.amp_eff <= 1, "0 < amp_eff <= 1"),
            (self.p_max > 0, "p_max > 0"),
        ]
        for ok, what in checks:
            if not ok:
                raise DomainError(f"SystemConfig violates {what}")
        for name in ("distances", "shadows"):
            vals = getattr(self, name)
            if vals is not None:
                vals = tuple(float(v) for v in vals)
                object.__setattr__(self, name, vals)
                if len(vals) != self.n_ues:
                    raise DomainError(f"{name} needs {self.n_ues} entries, got {len(vals)}")

    @property
    def blocklength(self):
        """Channel uses per slot, N_CU = B * t_DE."""
        return int(round(self.bandwidth * self.slot_duration))

    @property
    def data_len(self):
        return self.blocklength - self.pilot_len

    @property
    def snr(self):
        return self.tx_power / self.noise_power

    def ue_distances(self):
        if self.distances is not None:
            return np.array(self.distances)
        return np.linspace(self.d_min, self.d_max, self.n_ues)

    def ue_shadows(self):
        if self.shadows is not None:
            return np.array(self.shadows)
        return np.ones(self.n_ues)

    def with_(self, **changes):
        return replace(self, **changes)


def random_distances(config, rng):
    """Uniform random drop on [d_min, d_max], sorted for readability."""
    return np.sort(rng.uniform(config.d_min, config.d_max, size=config.n_ues))


def draw_shadows(config, rng):
    """Log-normal shadowing with 10 log10(beta) ~ N(0, sigma^2)."""
    if config.shadow_sigma == 0:
        return np.ones(config.n_ues)
    return db_to_linear(rng.normal(0.0, config.shadow_sigma, size=config.n_ues))


@dataclass(frozen=True)
class UeLargeScale:
    distances: np.ndarray
    pathloss: np.ndarray
    shadow: np.ndarray
    delta: np.ndarray
    composite: np.ndarray
    omega: float

    @property
    def n_ues(self):
        return self.pathloss.size


def derive_large_scale(config, distances=None, shadows=None):
    d = config.ue_distances() if distances is None else np.asarray(distances, dtype=float)
    beta = config.ue_shadows() if shadows is None else np.asarray(shadows, dtype=float)
    if d.shape != (config.n_ues,) or beta.shape != (config.n_ues,):
        raise DomainError("distances and shadows need one entry per UE")
    tol = 1e-9 * config.d_max
    if np.any(d < config.d_min - tol) or np.any(d > config.d_max + tol):
        raise DomainError(f"distances must lie in [{config.d_min}, {config.d_max}]")
    if np.any(~(beta > 0)) or not np.all(np.isfinite(beta)):
        raise DomainError("shadow fading must be finite and positive")

    lam = config.pathloss_const * (d / config.d_min) ** (-config.pathloss_exp)
    lb = lam * beta
    pilot_snr = config.snr * config.pilot_len * lb
    delta = pilot_snr / (pilot_snr + 1.0)
    omega = 1.0 / (np.sum(lb / (pilot_snr + 1.0)) + 1.0 / config.snr)
    out = UeLargeScale(d, lam, beta, delta, lb * delta, float(omega))
    for arr in (out.distances, out.pathloss, out.shadow, out.delta, out.composite):
        arr.setflags(write=False)
    return out


@dataclass(frozen=True)
class GammaSinrModel:
    """Gamma law with shape ``shape`` (mu) and scale ``scale`` (nu)."""

    shape: float
    scale: float
    psi: float = 0.0
    kappa: float = 0.0

    def __post_init__(self):
        if not (self.shape > 0 and self.scale > 0 and math.isfinite(self.shape)
                and math.isfinite(self.scale)):
            raise DomainError(f"invalid Gamma parameters ({self.shape}, {self.scale})")

    @property
    def mean(self):
        return self.shape * self.scale

    @property
    def variance(self):
        return self.shape * self.scale ** 2


def _psi_map(psi, a, n_t, m):
    den = a * (n_t - m + 1 + (m - 1) * psi) + 1.0
    return np.sum(1.0 / den) / (m - 1)


def fit_gamma_sinr(config, large_scale, m, *, tol=1e-12, max_iter=10_000):
    """Gamma shape/scale for UE ``m`` under the optimal linear detector."""
    n_t, n_ue = config.n_antennas, config.n_ues
    if not 0 <= m < n_ue:
        raise DomainError(f"UE index {m} out of range")
    w_lam = large_scale.omega * large_scale.composite[m]
    if n_ue == 1:
        return GammaSinrModel(float(n_t), float(w_lam))

    a = np.delete(large_scale.omega * large_scale.composite, m)
    psi = 0.0
    step = None
    damping = 1.0
    residual = math.inf
    for _ in range(max_iter):
        target = _psi_map(psi, a, n_t, n_ue)
        residual = abs(target - psi)
        if residual < tol:
            psi = target
            break
        new_step = target - psi
        if step is not None and new_step * step < 0:
            damping = 0.5
        step = new_step
        psi += damping * new_step
    else:
        raise ConvergenceError(f"psi fixed point for UE {m} did not converge", residual=residual)

    base = n_t - n_ue + 1
    den = a * (base + (n_ue - 1) * psi) + 1.0
    kappa = np.sum((a * psi + 1.0 / (n_ue - 1)) / den ** 2) / (1.0 + np.sum(a / den ** 2))
    num = base + (n_ue - 1) * psi
    den_k = base + (n_ue - 1) * kappa
    return GammaSinrModel(float(num ** 2 / den_k), float(den_k / num * w_lam),
                          float(psi), float(kappa))


def fit_all(config, large_scale=None):
    ls = derive_large_scale(config) if large_scale is None else large_scale
    return [fit_gamma_sinr(config, ls, m) for m in range(config.n_ues)]


def _log_pdf(model, x):
    mu, nu = model.shape, model.scale
    with np.errstate(divide="ignore"):
        return (mu - 1.0) * np.log(x) - x / nu - math.lgamma(mu) - mu * math.log(nu)


def sinr_pdf(model, x):
    xa = np.asarray(x, dtype=float)
    if np.any(xa < 0):
        raise DomainError("SINR density is defined for x >= 0")
    with np.errstate(invalid="ignore", over="ignore"):
        out = np.exp(_log_pdf(model, xa))
    if model.shape == 1.0:
        out = np.where(xa == 0, 1.0 / model.scale, out)
    out = np.nan_to_num(out, nan=0.0)
    return float(out) if np.ndim(x) == 0 else out


def sinr_cdf(model, x):
    xa = np.asarray(x, dtype=float)
    if np.any(xa < 0):
        raise DomainError("SINR distribution is defined for x >= 0")
    if xa.ndim == 0:
        return gammainc_lower(model.shape, float(xa) / model.scale)
    flat = [gammainc_lower(model.shape, v / model.scale) for v in xa.ravel()]
    return np.array(flat).reshape(xa.shape)
