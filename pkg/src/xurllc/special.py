"""Special functions: Gaussian tail pair and the regularized incomplete gamma."""

import math
import sys

import numpy as np
from scipy import special as _sp

from .errors import ConvergenceError, DomainError

_SQRT2 = math.sqrt(2.0)
_SQRT2PI = math.sqrt(2.0 * math.pi)

# Acklam's rational approximation to the standard normal quantile.
_A = (-3.969683028665376e01, 2.209460984245205e02, -2.759285104469687e02,
      1.383577518672690e02, -3.066479806614716e01, 2.506628277459239e00)
_B = (-5.447609879822406e01, 1.615858368580409e02, -1.556989798598866e02,
      6.680131188771972e01, -1.328068155288572e01)
_C = (-7.784894002430293e-03, -3.223964580411365e-01, -2.400758277161838e00,
      -2.549732539343734e00, 4.374664141464968e00, 2.938163982698783e00)
_D = (7.784695709041462e-03, 3.224671290700398e-01, 2.445134137142996e00,
      3.754408661907416e00)
_P_LOW = 0.02425


def q_func(x):
    """Gaussian tail probability Q(x) = P(Z > x). Accepts scalars or arrays."""
    if np.ndim(x) == 0:
        return 0.5 * math.erfc(float(x) / _SQRT2)
    return 0.5 * _sp.erfc(np.asarray(x, dtype=float) / _SQRT2)


def log_q_func(x):
    """log Q(x), finite far into the tail where Q itself underflows."""
    out = _sp.log_ndtr(-np.asarray(x, dtype=float))
    return float(out) if np.ndim(x) == 0 else out


def _normal_quantile(p):
    if p < _P_LOW:
        q = math.sqrt(-2.0 * math.log(p))
        return (((((_C[0] * q + _C[1]) * q + _C[2]) * q + _C[3]) * q + _C[4]) * q + _C[5]) / \
               ((((_D[0] * q + _D[1]) * q + _D[2]) * q + _D[3]) * q + 1.0)
    if p <= 1.0 - _P_LOW:
        q = p - 0.5
        r = q * q
        return (((((_A[0] * r + _A[1]) * r + _A[2]) * r + _A[3]) * r + _A[4]) * r + _A[5]) * q / \
               (((((_B[0] * r + _B[1]) * r + _B[2]) * r + _B[3]) * r + _B[4]) * r + 1.0)
    q = math.sqrt(-2.0 * math.log1p(-p))
    return -(((((_C[0] * q + _C[1]) * q + _C[2]) * q + _C[3]) * q + _C[4]) * q + _C[5]) / \
        ((((_D[0] * q + _D[1]) * q + _D[2]) * q + _D[3]) * q + 1.0)


def q_inv(p):
    """Inverse of the Gaussian tail, Q^{-1}(p) for 0 < p < 1.

    Rational starting point followed by Halley refinement on Q itself, so the
    result is good to ~1e-15 relative even deep in the tail.
    """
    p = float(p)
    if not 0.0 < p < 1.0:
        raise DomainError(f"q_inv needs 0 < p < 1, got {p!r}")
    if p == 0.5:
        return 0.0
    # Solve on the side where p is small to keep precision.
    lower = p < 0.5
    tail = p if lower else 1.0 - p
    x = -_normal_quantile(tail)  # Q(x) = tail, x > 0
    for _ in range(2):
        err = 0.5 * math.erfc(x / _SQRT2) - tail
        u = -err * _SQRT2PI * math.exp(0.5 * x * x)
        x = x - u / (1.0 + 0.5 * x * u)
    return x if lower else -x


def gammainc_lower(a, x, rel_tol=1e-15, max_iter=10_000):
    """Regularized lower incomplete gamma P(a, x).

    Series for x < a + 1, Lentz continued fraction for the complement
    otherwise.
    """
    a = float(a)
    x = float(x)
    if a <= 0.0:
        raise DomainError(f"shape must be positive, got {a!r}")
    if x < 0.0:
        raise DomainError(f"x must be non-negative, got {x!r}")
    if x == 0.0:
        return 0.0
    if math.isinf(x):
        return 1.0
    if x < a + 1.0:
        return _gamma_series(a, x, rel_tol, max_iter)
    return 1.0 - _gamma_cf(a, x, rel_tol, max_iter)


def gammainc_upper(a, x, rel_tol=1e-15, max_iter=10_000):
    """Regularized upper incomplete gamma Q(a, x) = 1 - P(a, x)."""
    a = float(a)
    x = float(x)
    if a <= 0.0:
        raise DomainError(f"shape must be positive, got {a!r}")
    if x < 0.0:
        raise DomainError(f"x must be non-negative, got {x!r}")
    if x == 0.0:
        return 1.0
    if math.isinf(x):
        return 0.0
    if x < a + 1.0:
        return 1.0 - _gamma_series(a, x, rel_tol, max_iter)
    return _gamma_cf(a, x, rel_tol, max_iter)


def _log_prefactor(a, x):
    return -x + a * math.log(x) - math.lgamma(a)


def _gamma_series(a, x, rel_tol, max_iter):
    ap = a
    term = 1.0 / a
    total = term
    for _ in range(max_iter):
        ap += 1.0
        term *= x / ap
        total += term
        if abs(term) < abs(total) * rel_tol:
            return min(1.0, total * math.exp(_log_prefactor(a, x)))
    raise ConvergenceError(f"incomplete gamma series stalled at a={a}, x={x}",
                           residual=abs(term / total))


def _gamma_cf(a, x, rel_tol, max_iter):
    tiny = sys.float_info.min / sys.float_info.epsilon
    b = x + 1.0 - a
    c = 1.0 / tiny
    d = 1.0 / b
    h = d
    for i in range(1, max_iter + 1):
        an = -i * (i - a)
        b += 2.0
        d = an * d + b
        if abs(d) < tiny:
            d = tiny
        c = b + an / c
        if abs(c) < tiny:
            c = tiny
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < rel_tol:
            return min(1.0, math.exp(_log_prefactor(a, x)) * h)
    raise ConvergenceError(f"incomplete gamma continued fraction stalled at a={a}, x={x}",
                           residual=abs(delta - 1.0))
