"""Finite-blocklength rate and error-probability quantities (normal approximation)."""

import math

import numpy as np
from scipy import special as _sp

from .channel import _log_pdf
from .errors import DomainError, NumericError
from .quadrature import integrate
from .special import log_q_func, q_inv

LOG2E = 1.0 / math.log(2.0)


def capacity(gamma):
    """Shannon capacity log2(1 + gamma) in bits per channel use."""
    if np.ndim(gamma) == 0:
        return math.log1p(gamma) * LOG2E
    return np.log1p(gamma) * LOG2E


def dispersion(gamma):
    """Channel dispersion (1 - (1 + gamma)^-2) (log2 e)^2."""
    g = np.asarray(gamma, dtype=float)
    v = g * (2.0 + g) / (1.0 + g) ** 2 * LOG2E ** 2
    return float(v) if np.ndim(gamma) == 0 else v


def _penalty(gamma, eps, blocklength):
    return math.sqrt(dispersion(gamma) / blocklength) * q_inv(eps)


def gamma_zero(eps, blocklength, *, bracket=(1e-12, 1e4), rel_tol=1e-10):
    """SINR at which the normal-approximation rate crosses zero.

    Bisection on log(gamma). For eps >= 0.5 the penalty is non-positive and
    the threshold is 0.
    """
    if not 0.0 < eps < 1.0:
        raise DomainError(f"eps must lie in (0, 1), got {eps!r}")
    if blocklength < 1:
        raise DomainError("blocklength must be >= 1")
    if eps >= 0.5:
        return 0.0

    def excess(g):
        return capacity(g) - _penalty(g, eps, blocklength)

    lo, hi = bracket
    # Near eps = 0.5 the root sits below the nominal bracket; walk down.
    while excess(lo) > 0 and lo > 1e-300:
        lo *= 1e-12
    if excess(lo) > 0 or excess(hi) <= 0:
        raise NumericError(f"gamma_zero: no sign change on [{lo:g}, {hi:g}]")
    llo, lhi = math.log(lo), math.log(hi)
    while lhi - llo > rel_tol:
        mid = 0.5 * (llo + lhi)
        if excess(math.exp(mid)) > 0:
            lhi = mid
        else:
            llo = mid
    return math.exp(0.5 * (llo + lhi))


def achievable_rate(gamma, eps, blocklength):
    """Normal-approximation rate, clamped to zero at or below gamma_zero."""
    if gamma < 0:
        raise DomainError("SINR must be non-negative")
    if not 0.0 < eps < 1.0:
        raise DomainError(f"eps must lie in (0, 1), got {eps!r}")
    if gamma == 0:
        return 0.0
    return max(0.0, capacity(gamma) - _penalty(gamma, eps, blocklength))


def achievable_rate_array(gamma, eps, blocklength):
    g = np.asarray(gamma, dtype=float)
    r = capacity(g) - np.sqrt(dispersion(g) / blocklength) * q_inv(eps)
    return np.maximum(r, 0.0)


def _ep_argument(gamma, rate, blocklength):
    g = np.asarray(gamma, dtype=float)
    v = dispersion(g)
    with np.errstate(divide="ignore", invalid="ignore"):
        arg = math.sqrt(blocklength) * (capacity(g) - rate) / np.sqrt(v)
    # gamma = 0: no channel, certain failure for any positive rate.
    arg = np.where(g > 0, arg, -np.inf if rate > 0 else 0.0)
    return arg


def decoding_ep(gamma, rate, blocklength):
    """Decoding error probability at SINR ``gamma`` for a fixed rate.

    The Q argument keeps its sign, so below capacity-equals-rate the result
    exceeds 1/2.
    """
    if np.any(np.asarray(gamma) < 0):
        raise DomainError("SINR must be non-negative")
    if rate < 0:
        raise DomainError("rate must be non-negative")
    arg = _ep_argument(gamma, rate, blocklength)
    out = 0.5 * _sp.erfc(arg / math.sqrt(2.0))
    return float(out) if np.ndim(gamma) == 0 else out


def log_decoding_ep(gamma, rate, blocklength):
    """Natural log of :func:`decoding_ep`, finite where the value underflows."""
    arg = _ep_argument(gamma, rate, blocklength)
    return log_q_func(arg)


def log_decoding_success(gamma, rate, blocklength):
    """Natural log of 1 - :func:`decoding_ep`, resolved where the EP rounds to 1."""
    arg = _ep_argument(gamma, rate, blocklength)
    return log_q_func(-arg)


def strictly_decreasing_ep(gamma, rate, blocklength):
    """True if the decoding EP strictly decreases along the increasing grid ``gamma``.

    A step counts as a decrease if either log EP falls or log(1 - EP) rises,
    so the check survives the EP rounding to 0 or 1 in double precision.
    """
    lp = log_decoding_ep(gamma, rate, blocklength)
    ls = log_decoding_success(gamma, rate, blocklength)
    return bool(np.all((np.diff(lp) < 0) | (np.diff(ls) > 0)))


def expected_ep(model, rate, blocklength, *, abs_tol=1e-10, rel_tol=1e-10):
    """Average decoding error probability over the Gamma SINR law.

    Integrated on [0, mean + 40 sqrt(shape) scale]. The relative target keeps
    very small averages (1e-20 and below) meaningful, which the pilot search
    relies on when comparing neighbouring candidates.
    """
    if rate < 0:
        raise DomainError("rate must be non-negative")
    mu, nu = model.shape, model.scale
    upper = mu * nu + 40.0 * math.sqrt(mu) * nu
    rate_knee = 2.0 ** rate - 1.0
    sd = math.sqrt(mu) * nu
    brk = [rate_knee, max(mu - 1.0, 0.0) * nu] + [mu * nu + k * sd for k in (-4, -2, 2, 4)]
    sqrt_n = math.sqrt(blocklength)

    def log_integrand(x):
        v = x * (2.0 + x) / (1.0 + x) ** 2 * LOG2E ** 2
        arg = sqrt_n * (np.log1p(x) * LOG2E - rate) / np.sqrt(v)
        return log_q_func(arg) + _log_pdf(model, x)

    def integrand(x):
        return np.exp(log_integrand(x))

    # Deep in the tail the mass sits in a narrow bump far from the mean;
    # locate it on a coarse grid so the first panels cannot straddle it.
    grid = np.linspace(0.0, upper, 2001)[1:]
    lg = log_integrand(grid)
    peak = int(np.argmax(lg))
    live = np.flatnonzero(lg > lg[peak] - 50.0)
    brk += [grid[peak], grid[max(live[0] - 1, 0)], grid[min(live[-1] + 1, grid.size - 1)]]

    res = integrate(integrand, 0.0, upper, abs_tol=1e-300, rel_tol=rel_tol, breakpoints=brk)
    if res.error > abs_tol:
        raise NumericError(f"expected_ep: achieved error {res.error:.3e} exceeds {abs_tol:.1e}")
    return res.value

