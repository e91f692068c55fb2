"""Oracle suites run by ``xurllc validate``.

Each suite compares a closed form or search against an independent route
(quadrature, enumeration, grid search, simulation) and reports named checks.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from .channel import GammaSinrModel, SystemConfig, _log_pdf, derive_large_scale, fit_all
from .fbc import achievable_rate, decoding_ep, gamma_zero, strictly_decreasing_ep
from .montecarlo import (binomial_se, empirical_sinr, simulate_queue, validate_gamma_fit,
                         violation_frequency)
from .optim import (EnergyEfficiencyProblem, exhaustive_search, gss_maximize, ifgss, odisc,
                    pilot_objective)
from .quadrature import integrate
from .snc import (QosSpec, ServiceModel, arrival_mgf, gamma_laplace, min_deconv_closed_form,
                  min_deconv_mgf, service_inv_mgf, ub_sdvp_at_theta, ub_sdvp_inf)
from .special import q_func, q_inv

FAULTS = ("mu-double",)


@dataclass
class SuiteResult:
    name: str
    checks: list = field(default_factory=list)

    def check(self, label, ok, info=""):
        self.checks.append((label, bool(ok), info))

    @property
    def passed(self):
        return all(ok for _, ok, _ in self.checks)


def laplace_quadrature(model, big_theta):
    """Laplace transform of the Gamma density by adaptive quadrature."""
    mu, nu = model.shape, model.scale
    upper = mu * nu + 60.0 * math.sqrt(mu) * nu + 60.0 * nu
    brk = [max(mu - 1.0, 0.0) * nu / (1.0 + nu * big_theta)]
    res = integrate(lambda x: np.exp(-big_theta * x + _log_pdf(model, x)), 0.0, upper,
                    abs_tol=1e-300, rel_tol=1e-12, breakpoints=brk)
    return res.value


def suite_quadrature(seed=0, **_):
    r = SuiteResult("quadrature")
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(100):
        model = GammaSinrModel(rng.uniform(1.0, 60.0), 10 ** rng.uniform(-2, 1))
        big_theta = 10 ** rng.uniform(-2, 1)
        exact = gamma_laplace(model, big_theta)
        worst = max(worst, abs(laplace_quadrature(model, big_theta) - exact) / exact)
    r.check("laplace identity, 100 random triples", worst <= 1e-8, f"max rel err {worst:.2e}")
    val = integrate(lambda x: x ** 5 - 3 * x, 0.0, 2.0).value
    r.check("polynomial integral", abs(val - (64 / 6 - 6)) < 1e-12, f"{val!r}")
    return r


def suite_fbc(seed=0, **_):
    r = SuiteResult("fbc")
    rng = np.random.default_rng(seed)
    for p in (1e-9, 1e-5, 0.01, 0.3, 0.7):
        x = q_inv(p)
        r.check(f"Q(Q^-1({p:g})) round trip", abs(q_func(x) - p) <= 1e-13 * max(p, 1e-300) + 1e-16)
    for eps, n in ((1e-6, 170), (1e-3, 400), (0.1, 50)):
        g0 = gamma_zero(eps, n)
        r.check(f"rate vanishes at gamma_0 (eps={eps:g}, n={n})",
                achievable_rate(g0 * (1 - 1e-6), eps, n) == 0.0
                and achievable_rate(g0 * (1 + 1e-6), eps, n) > 0.0)
    grid = np.linspace(1e-3, 50.0, 1000)
    decreasing = True
    for _ in range(20):
        rate, n = rng.uniform(0.05, 2.0), int(rng.integers(20, 500))
        decreasing &= strictly_decreasing_ep(grid, rate, n)
    r.check("decoding EP strictly decreasing in SINR", decreasing)
    r.check("decoding EP above 1/2 below capacity knee", decoding_ep(0.01, 1.0, 100) > 0.5)
    return r


def suite_snc(seed=0, **_):
    r = SuiteResult("snc")
    rng = np.random.default_rng(seed)
    model = GammaSinrModel(40.0, 0.5)
    service = ServiceModel.fixed_eps(model, 1e-3, 200)
    theta, lam = 0.05, 40.0
    ma, ms = arrival_mgf(lam, theta), service_inv_mgf(service, theta)
    ok = ma * ms < 1
    for s in range(20):
        for t in range(s + 1):
            direct = min_deconv_mgf(lambda th: ma, lambda th: ms, theta, s, t)
            ok &= direct <= min_deconv_closed_form(ma, ms, s, t) * (1 + 1e-12)
    r.check("direct min-deconvolution sum <= geometric closed form", ok)
    dominated = True
    for _ in range(50):
        g = GammaSinrModel(rng.uniform(2, 60), 10 ** rng.uniform(-1, 0.5))
        svc = ServiceModel.fixed_eps(g, 10 ** rng.uniform(-6, -1), int(rng.integers(100, 500)))
        lam_i, d = rng.uniform(1, 80), int(rng.integers(0, 20))
        inf_b = ub_sdvp_inf(svc, lam_i, d).value
        fixed = ub_sdvp_at_theta(QosSpec(0.2, svc.blocklength, d, lam_i), svc).value
        dominated &= inf_b <= fixed * (1 + 1e-9)
    r.check("inf-bound never exceeds the theta = 0.2 bound (50 scenarios)", dominated)
    bounds = [ub_sdvp_at_theta(QosSpec(theta, 200, d, lam), service).value for d in range(21)]
    r.check("bound strictly decreasing in target delay", all(np.diff(bounds) < 0))
    return r


def suite_optim(seed=0, **_):
    r = SuiteResult("optim")
    cfg = SystemConfig()

    def objective(n):
        return pilot_objective(cfg, 0.5, 0.2, n)

    res = ifgss(objective, cfg.n_ues, cfg.blocklength - 1)
    ref = exhaustive_search(objective, cfg.n_ues, cfg.blocklength - 1)
    r.check("IFGSS equals exhaustive argmin (N_CU = 240)", res.n_opt == ref.n_opt,
            f"ifgss {res.n_opt}, exhaustive {ref.n_opt}")
    r.check("IFGSS within 14 iterations", res.iterations <= 14, f"{res.iterations}")
    g = gss_maximize(lambda x: -(x - 1.0) ** 2, 0.0, 2.0, 1e-5)
    r.check("GSS on a concave quadratic", abs(g.x - 1.0) <= 1e-5, f"{g.x!r}")
    return r


def suite_odisc(seed=0, **_):
    r = SuiteResult("odisc")
    cfg = SystemConfig()
    problem = EnergyEfficiencyProblem(cfg, 0.2, 0.2)
    sol = odisc(problem)
    grid = np.linspace(1e-6, cfg.p_max, 400)
    brute = max(problem.ep_ee_at(x) for x in grid)
    rel = (brute - sol.theta_ee) / brute
    r.check("ODISC within 1e-3 of a 400-point grid", rel <= 1e-3, f"rel gap {rel:.2e}")
    varthetas = [t[0] for t in sol.trace]
    r.check("vartheta non-decreasing", all(np.diff(varthetas) >= 0))
    r.check("converged within 10 outer iterations", sol.iterations <= 10, f"{sol.iterations}")
    return r


def suite_queue(seed=0, horizon=200_000, **_):
    """Empirical P(W >= d) against the bound over a grid of fixed-rate queues."""
    r = SuiteResult("queue")
    worst = -math.inf
    count = 0
    for lam in (10.0, 20.0, 25.0):
        for p_err in (0.05, 0.2):
            service = ServiceModel.fixed_rate(0.2, p_err, 170)
            trace = simulate_queue(lam, service, horizon, seed)
            for theta in (0.02, 0.05):
                for d in (1, 3, 6):
                    b = ub_sdvp_at_theta(QosSpec(theta, 170, d, lam), service).value
                    f = violation_frequency(trace, d)
                    se = binomial_se(b, trace.delays.size)
                    worst = max(worst, (f - b) / se if se > 0 else (math.inf if f > b else -math.inf))
                    count += 1
    r.check(f"bound dominance over {count} (lambda, eps, theta, d) combinations",
            worst <= 3.0, f"worst excess {worst:.2f} standard errors")
    return r


def suite_gamma_fit(seed=0, fault=None, **_):
    r = SuiteResult("gamma_fit")
    cfg = SystemConfig()
    ls = derive_large_scale(cfg)
    models = fit_all(cfg, ls)
    if fault == "mu-double":
        models = [GammaSinrModel(2.0 * g.shape, g.scale) for g in models]
    samples = empirical_sinr(cfg, ls, 10_000, seed)
    worst = 0.0
    finite = True
    for m, g in enumerate(models):
        rep = validate_gamma_fit(samples[:, m], g)
        worst = max(worst, rep.ks)
        finite &= all(math.isfinite(v) for v in (rep.ks, rep.mean_rel_err, rep.var_rel_err))
    r.check("KS distance below 0.05 for every UE", worst < 0.05, f"max KS {worst:.4f}")
    r.check("report fields finite", finite)
    return r


SUITES = {
    "quadrature": suite_quadrature,
    "fbc": suite_fbc,
    "snc": suite_snc,
    "optim": suite_optim,
    "odisc": suite_odisc,
    "queue": suite_queue,
    "gamma_fit": suite_gamma_fit,
}


def run_validation(names=None, seed=0, fault=None):
    names = list(SUITES) if not names else names
    unknown = [n for n in names if n not in SUITES]
    if unknown:
        raise KeyError(f"unknown suite(s): {', '.join(unknown)}")
    if fault is not None and fault not in FAULTS:
        raise KeyError(f"unknown fault {fault!r}")
    return [SUITES[n](seed=seed, fault=fault) for n in names]
