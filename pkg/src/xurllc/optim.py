"""Pilot-length search, EP-based effective capacity and energy-efficiency maximisation."""

import math
from dataclasses import dataclass, field
from threading import Lock

import numpy as np

from .channel import derive_large_scale, fit_all
from .errors import ConvergenceError, DomainError
from .fbc import expected_ep
from .snc import ServiceModel, service_inv_mgf

TAU = (math.sqrt(5.0) - 1.0) / 2.0


@dataclass(frozen=True)
class PilotSearchResult:
    n_opt: int
    value: float
    iterations: int
    trace: tuple = ()


@dataclass(frozen=True)
class EeSolution:
    theta_ee: float
    rho: float
    iterations: int
    trace: tuple
    n_pilot: int
    ep_ec: float = math.nan
    f_value: float = math.nan


def iteration_bound(lo, hi, tau=0.618):
    """Iteration budget for :func:`ifgss` on [lo, hi]."""
    if hi - lo < 1:
        return 0
    return math.ceil(math.log(hi - lo) / math.log(1.0 / tau)) + 2


def _probes(lower, upper, tau):
    w = upper - lower
    n1 = upper - math.floor(tau * w)
    n2 = lower + math.ceil(tau * w)
    if not lower <= n1 < n2 <= upper:
        # Rounding collapsed the pair; fall back to the two middle integers.
        n1 = (lower + upper) // 2
        n2 = n1 + 1
    return n1, n2


def ifgss(objective, lo, hi, *, tau=TAU):
    """Integer golden-section minimisation of a unimodal ``objective`` on [lo, hi].

    Probes are the floor/ceil-rounded golden-section points and one probe is
    carried over per iteration. Once the bracket holds three integers or fewer
    the remaining candidates are compared directly, because the rounded probes
    can no longer separate them. Ties shrink the bracket from above. Objective
    values are cached, so each integer is evaluated at most once.
    """
    lo, hi = int(lo), int(hi)
    if lo > hi:
        raise DomainError(f"empty search range [{lo}, {hi}]")
    cache = {}

    def f(n):
        if n not in cache:
            cache[n] = float(objective(n))
        return cache[n]

    lower, upper = lo, hi
    trace = [(lower, upper)]
    if lower == upper:
        return PilotSearchResult(lower, f(lower), 0, tuple(trace))

    it = 0
    n1, n2 = _probes(lower, upper, tau)
    while upper - lower > 2:
        it += 1
        if f(n2) >= f(n1):
            upper, n2 = n2, n1
            n1 = upper - math.floor(tau * (upper - lower))
        else:
            lower, n1 = n1, n2
            n2 = lower + math.ceil(tau * (upper - lower))
        if not lower <= n1 < n2 <= upper:
            n1, n2 = _probes(lower, upper, tau)
        trace.append((lower, upper))

    it += 1
    best = min(range(lower, upper + 1), key=lambda n: (f(n), n))
    trace.append((best, best))
    return PilotSearchResult(best, f(best), it, tuple(trace))


def exhaustive_search(objective, lo, hi):
    """Reference argmin by full enumeration (lowest index wins ties)."""
    values = [(float(objective(n)), n) for n in range(int(lo), int(hi) + 1)]
    value, n = min(values)
    return PilotSearchResult(n, value, hi - lo + 1, tuple(values))


def _rates(rate, n_ues):
    r = np.broadcast_to(np.asarray(rate, dtype=float), (n_ues,))
    if np.any(r < 0):
        raise DomainError("rates must be non-negative")
    return r


def per_ue_ep(config, rho, rate, n_pilot):
    """Per-UE expected decoding error probability at pilot length ``n_pilot``."""
    n_cu = config.blocklength
    if not config.n_ues <= n_pilot <= n_cu - 1:
        raise DomainError(f"pilot length {n_pilot} outside [{config.n_ues}, {n_cu - 1}]")
    cfg = config.with_(tx_power=rho, pilot_len=int(n_pilot))
    models = fit_all(cfg, derive_large_scale(cfg))
    data_len = n_cu - int(n_pilot)
    rates = _rates(rate, config.n_ues)
    return np.array([expected_ep(g, r, data_len) for g, r in zip(models, rates)])


def pilot_objective(config, rho, rate, n_pilot):
    """Summed expected decoding error probability across UEs."""
    return float(np.sum(per_ue_ep(config, rho, rate, n_pilot)))


def service_models(config, rate, n_pilot, eps_values):
    data_len = config.blocklength - int(n_pilot)
    rates = _rates(rate, config.n_ues)
    return [ServiceModel.fixed_rate(r, min(1.0, max(0.0, e)), data_len)
            for r, e in zip(rates, eps_values)]


def ep_ec(service, theta):
    """Effective capacity -(1/theta) log of the service inverse MGF, bits/slot."""
    if not theta > 0:
        raise DomainError("theta must be positive")
    m = service_inv_mgf(service, theta)
    return -math.log(m) / theta if m < 1.0 else 0.0


def sum_inv_mgf(config, rho, rate, theta, n_pilot):
    eps = per_ue_ep(config, rho, rate, n_pilot)
    return math.fsum(service_inv_mgf(s, theta) for s in service_models(config, rate, n_pilot, eps))


def sum_ep_ec(config, rho, rate, theta, n_pilot):
    eps = per_ue_ep(config, rho, rate, n_pilot)
    return math.fsum(ep_ec(s, theta) for s in service_models(config, rate, n_pilot, eps))


def total_power(rho, circuit_power, amp_eff):
    if rho < 0 or not circuit_power > 0 or not 0 < amp_eff <= 1:
        raise DomainError("need rho >= 0, P_c > 0 and 0 < phi <= 1")
    return circuit_power + rho / amp_eff


def ep_ee(epec, ptot):
    return epec / ptot


class EnergyEfficiencyProblem:
    """EP-EC and EP-EE as functions of transmit power.

    The pilot length at each power is the IFGSS minimiser of the summed
    decoding error probability. Pilot searches are cached on rho rounded to
    1e-6; EP-EC itself is evaluated at the exact rho.
    """

    def __init__(self, config, rate, theta, *, verify_exhaustive=False):
        if not theta > 0:
            raise DomainError("theta must be positive")
        self.config = config
        self.rate = rate
        self.theta = theta
        self.verify_exhaustive = verify_exhaustive
        self._pilot_cache = {}
        self._lock = Lock()
        self.evaluations = 0

    def pilot_search(self, rho):
        key = round(rho * 1e6)
        with self._lock:
            hit = self._pilot_cache.get(key)
        if hit is not None:
            return hit
        rho_q = key * 1e-6 if key > 0 else rho
        lo, hi = self.config.n_ues, self.config.blocklength - 1

        def objective(n):
            return pilot_objective(self.config, rho_q, self.rate, n)

        res = ifgss(objective, lo, hi)
        if self.verify_exhaustive:
            ref = exhaustive_search(objective, lo, hi)
            if ref.n_opt != res.n_opt:
                raise ConvergenceError(
                    f"IFGSS picked {res.n_opt}, exhaustive search {ref.n_opt} at rho={rho}")
        with self._lock:
            self._pilot_cache[key] = res
        return res

    def ep_ec_at(self, rho):
        """(sum EP-EC, pilot length) at transmit power ``rho``."""
        self.evaluations += 1
        n_opt = self.pilot_search(rho).n_opt
        return sum_ep_ec(self.config, rho, self.rate, self.theta, n_opt), n_opt

    def power(self, rho):
        return total_power(rho, self.config.circuit_power, self.config.amp_eff)

    def ep_ee_at(self, rho):
        return ep_ee(self.ep_ec_at(rho)[0], self.power(rho))

    def dinkelbach(self, rho, vartheta):
        return dinkelbach_objective(rho, vartheta, self)


def dinkelbach_objective(rho, vartheta, problem):
    """F(rho | vartheta) = EP-EC(rho) - vartheta * P_tot(rho)."""
    if not 0 < rho <= problem.config.p_max * (1 + 1e-12):
        raise DomainError(f"rho={rho} outside (0, P_max]")
    return problem.ep_ec_at(rho)[0] - vartheta * problem.power(rho)


@dataclass
class GssResult:
    x: float
    fx: float
    iterations: int
    trace: list = field(default_factory=list)


def gss_maximize(f, lo, hi, tol=1e-5, *, max_iter=10_000):
    """Golden-section maximisation; stops once the bracket is narrower than ``tol``.

    Returns the midpoint of the final bracket and f evaluated there.
    """
    if not lo < hi:
        raise DomainError("need lo < hi")
    a, b = float(lo), float(hi)
    x1 = b - TAU * (b - a)
    x2 = a + TAU * (b - a)
    f1, f2 = f(x1), f(x2)
    trace = [(a, b)]
    it = 0
    while b - a >= tol:
        if it >= max_iter:
            raise ConvergenceError("golden-section search hit its iteration cap", trace=trace)
        it += 1
        if f1 > f2:
            b, x2, f2 = x2, x1, f1
            x1 = b - TAU * (b - a)
            f1 = f(x1)
        else:
            a, x1, f1 = x1, x2, f2
            x2 = a + TAU * (b - a)
            f2 = f(x2)
        trace.append((a, b))
    x = 0.5 * (a + b)
    return GssResult(x, f(x), it, trace)


def odisc(problem, *, bounds=None, eps_inner=1e-5, eps_outer=1e-5, max_iter=100):
    """Dinkelbach outer loop with golden-section inner search over transmit power."""
    lo, hi = bounds if bounds is not None else (1e-6, problem.config.p_max)
    vartheta = 0.0
    trace = []
    rho_prev = None
    for n in range(1, max_iter + 1):
        inner = gss_maximize(lambda x: dinkelbach_objective(x, vartheta, problem), lo, hi, eps_inner)
        rho_n, f_n = inner.x, inner.fx
        trace.append((vartheta, rho_n, f_n))
        if f_n < eps_outer:
            rho_star = rho_n if rho_prev is None else rho_prev
            epec, n_pilot = problem.ep_ec_at(rho_star)
            return EeSolution(vartheta, rho_star, n, tuple(trace), n_pilot, epec, f_n)
        epec, _ = problem.ep_ec_at(rho_n)
        vartheta = ep_ee(epec, problem.power(rho_n))
        rho_prev = rho_n
    raise ConvergenceError(f"ODISC did not converge in {max_iter} iterations", trace=trace)
