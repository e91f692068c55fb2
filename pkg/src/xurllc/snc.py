"""MGF-based stochastic network calculus for a single FCFS hop.

The arrival process is Poisson per slot; the service process is one of two
per-slot models:

``fixed_eps``
    rate adapts to the SINR at a fixed decoding error probability. The inverse
    MGF uses the Gamma Laplace transform (1 + nu*Theta)^-mu for the SINR term,
    or, with ``laplace=False``, the exact integral of f(gamma)^-Theta.
``fixed_rate``
    a fixed payload R*r either gets through (probability 1 - E) or not.
"""

import math
from dataclasses import dataclass

import numpy as np

from .channel import GammaSinrModel, _log_pdf, sinr_cdf
from .errors import DomainError, NumericError
from .fbc import LOG2E, achievable_rate_array, gamma_zero
from .quadrature import integrate

FIXED_EPS = "fixed_eps"
FIXED_RATE = "fixed_rate"
_LOG_MAX = math.log(np.finfo(float).max)


@dataclass(frozen=True)
class QosSpec:
    theta: float
    blocklength: int
    target_delay: int
    arrival_rate: float

    def __post_init__(self):
        if not self.theta > 0:
            raise DomainError("QoS exponent must be positive")
        if self.target_delay < 0 or int(self.target_delay) != self.target_delay:
            raise DomainError("target delay is a non-negative slot count")
        if self.arrival_rate < 0:
            raise DomainError("arrival rate must be non-negative")

    @property
    def normalized_exponent(self):
        return self.theta * self.blocklength / math.log(2.0)


@dataclass(frozen=True)
class ServiceModel:
    variant: str
    blocklength: int
    sinr: GammaSinrModel | None = None
    eps: float | None = None
    rate: float | None = None
    expected_ep: float | None = None
    laplace: bool = True

    def __post_init__(self):
        if self.blocklength < 1:
            raise DomainError("blocklength must be >= 1")
        if self.variant == FIXED_EPS:
            if self.sinr is None or self.eps is None:
                raise DomainError("fixed-eps service needs a SINR model and eps")
            if not 0 < self.eps <= 1:
                raise DomainError("eps must lie in (0, 1]")
        elif self.variant == FIXED_RATE:
            if self.rate is None or self.expected_ep is None:
                raise DomainError("fixed-rate service needs a rate and an expected EP")
            if self.rate < 0 or not 0 <= self.expected_ep <= 1:
                raise DomainError("rate >= 0 and 0 <= expected EP <= 1 required")
        else:
            raise DomainError(f"unknown service variant {self.variant!r}")

    @classmethod
    def fixed_eps(cls, sinr, eps, blocklength, *, laplace=True):
        return cls(FIXED_EPS, blocklength, sinr=sinr, eps=eps, laplace=laplace)

    @classmethod
    def fixed_rate(cls, rate, expected_ep, blocklength, sinr=None):
        return cls(FIXED_RATE, blocklength, sinr=sinr, rate=rate, expected_ep=expected_ep)

    @property
    def payload(self):
        """Bits delivered by one successful fixed-rate slot."""
        return self.blocklength * self.rate

    def mean_service(self):
        """Mean bits served per slot."""
        if self.variant == FIXED_RATE:
            return self.payload * (1.0 - self.expected_ep)
        mu, nu = self.sinr.shape, self.sinr.scale
        upper = mu * nu + 40.0 * math.sqrt(mu) * nu
        res = integrate(lambda x: achievable_rate_array(x, self.eps, self.blocklength)
                        * np.exp(_log_pdf(self.sinr, x)), 0.0, upper,
                        abs_tol=1e-12, rel_tol=1e-10)
        return self.blocklength * (1.0 - self.eps) * res.value


@dataclass(frozen=True)
class SdvpBound:
    value: float
    stable: bool
    theta: float
    numerator: float
    denominator: float


def arrival_mgf(arrival_rate, theta):
    """MGF of one slot's Poisson arrivals, exp(lambda (e^theta - 1))."""
    if arrival_rate < 0 or theta < 0:
        raise DomainError("arrival rate and theta must be non-negative")
    expo = arrival_rate * math.expm1(theta) if theta < _LOG_MAX else math.inf
    if expo > _LOG_MAX:
        raise NumericError(f"arrival MGF overflows at theta={theta}, rate={arrival_rate}")
    return math.exp(expo)


def log_arrival_mgf(arrival_rate, theta):
    if theta >= _LOG_MAX:
        return math.inf
    return arrival_rate * math.expm1(theta)


def gamma_laplace(model, s):
    """E[exp(-s * gamma)] for the Gamma SINR law, (1 + nu s)^-mu."""
    return math.exp(-model.shape * math.log1p(model.scale * s))


def _exact_rate_term(service, big_theta, g0):
    model = service.sinr
    mu, nu = model.shape, model.scale
    upper = mu * nu + 40.0 * math.sqrt(mu) * nu
    if g0 >= upper:
        return 0.0
    n = service.blocklength

    def integrand(x):
        r = achievable_rate_array(x, service.eps, n)
        return np.exp(-big_theta * r / LOG2E + _log_pdf(model, x))

    sd = math.sqrt(mu) * nu
    brk = [mu * nu + k * sd for k in (-4, -2, 0, 2, 4)]
    return integrate(integrand, g0, upper, abs_tol=1e-300, rel_tol=1e-10, breakpoints=brk).value


def service_inv_mgf(service, theta):
    """Per-slot inverse MGF E[exp(-theta s)] of the service increment."""
    if theta < 0:
        raise DomainError("theta must be non-negative")
    if theta == 0:
        return 1.0
    if service.variant == FIXED_RATE:
        hit = math.exp(-theta * service.payload)
        return hit + (1.0 - hit) * service.expected_ep
    eps = service.eps
    if eps >= 1.0:
        return 1.0
    big_theta = theta * service.blocklength / math.log(2.0)
    g0 = gamma_zero(eps, service.blocklength)
    outage = eps + (1.0 - eps) * sinr_cdf(service.sinr, g0)
    if service.laplace:
        return outage + (1.0 - eps) * gamma_laplace(service.sinr, big_theta)
    return outage + (1.0 - eps) * _exact_rate_term(service, big_theta, g0)


def min_deconv_mgf(arrival_fn, service_fn, theta, s, t):
    """Finite-horizon min-deconvolution sum over u = 0..min(s, t)."""
    if s < 0 or t < 0:
        raise DomainError("s and t must be non-negative")
    ma = arrival_fn(theta)
    ms = service_fn(theta)
    return math.fsum(ma ** (t - u) * ms ** (s - u) for u in range(min(s, t) + 1))


def min_deconv_closed_form(ma, ms, s, t):
    """Geometric-series upper bound of the min-deconvolution sum (needs ma*ms < 1)."""
    if not ma * ms < 1:
        return math.inf
    tau = max(0, s - t)
    return ma ** (t - s) * (ma * ms) ** tau / (1.0 - ma * ms)


def _log_bound_terms(qos_theta, arrival_rate, target_delay, service):
    log_ma = log_arrival_mgf(arrival_rate, qos_theta)
    ms = service_inv_mgf(service, qos_theta)
    log_ms = math.log(ms) if ms > 0 else -math.inf
    return log_ma, log_ms


def _bound_from_logs(theta, log_ma, log_ms, d_th):
    log_prod = log_ma + log_ms
    if not log_prod < 0:
        return SdvpBound(1.0, False, theta, math.nan, math.nan)
    denom = -math.expm1(log_prod)
    log_num = d_th * log_ms if d_th > 0 else 0.0
    numer = math.exp(log_num)
    log_val = log_num - math.log(denom)
    value = 1.0 if log_val >= 0 else math.exp(log_val)
    return SdvpBound(value, True, theta, numer, denom)


def ub_sdvp_at_theta(qos, service):
    """Closed-form delay-violation bound at the QoS exponent in ``qos``."""
    log_ma, log_ms = _log_bound_terms(qos.theta, qos.arrival_rate, qos.target_delay, service)
    return _bound_from_logs(qos.theta, log_ma, log_ms, qos.target_delay)


def _log_bound(log10_theta, service, arrival_rate, d_th):
    theta = 10.0 ** log10_theta
    log_ma, log_ms = _log_bound_terms(theta, arrival_rate, d_th, service)
    log_prod = log_ma + log_ms
    if not log_prod < 0:
        return math.inf
    return d_th * log_ms - math.log(-math.expm1(log_prod))


def _golden_min(f, lo, hi, tol):
    inv = (math.sqrt(5.0) - 1.0) / 2.0
    a, b = lo, hi
    c = b - inv * (b - a)
    d = a + inv * (b - a)
    fc, fd = f(c), f(d)
    while b - a > tol:
        if fc <= fd:
            b, d, fd = d, c, fc
            c = b - inv * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + inv * (b - a)
            fd = f(d)
    return (c, fc) if fc <= fd else (d, fd)


def stability_edge(service, arrival_rate, lo=-6.0, hi=2.0, n_grid=161):
    """log10(theta) at which the stability product crosses 1, or None.

    The stable set is an interval starting at theta = 0 because
    log M_a + log M_s is convex in theta and vanishes at 0.
    """
    def log_prod(lt):
        la, ls = _log_bound_terms(10.0 ** lt, arrival_rate, 0, service)
        return la + ls

    grid = np.linspace(lo, hi, n_grid)
    vals = [log_prod(g) for g in grid]
    stable = [v < 0 for v in vals]
    if not stable[0]:
        return None
    if all(stable):
        return hi
    k = stable.index(False)
    a, b = grid[k - 1], grid[k]
    for _ in range(60):
        mid = 0.5 * (a + b)
        if log_prod(mid) < 0:
            a = mid
        else:
            b = mid
    return a


def ub_sdvp_inf(service, arrival_rate, target_delay, *, log10_range=(-6.0, 2.0), tol=1e-6):
    """Bound minimised over the QoS exponent (golden section on log10 theta)."""
    if target_delay < 0:
        raise DomainError("target delay must be non-negative")
    lo, hi = log10_range
    edge = stability_edge(service, arrival_rate, lo, hi)
    if edge is None:
        return SdvpBound(1.0, False, math.nan, math.nan, math.nan)
    lt, _ = _golden_min(lambda x: _log_bound(x, service, arrival_rate, target_delay),
                        lo, edge, tol)
    theta = 10.0 ** lt
    return ub_sdvp_at_theta(QosSpec(theta, service.blocklength, target_delay, arrival_rate),
                            service)
