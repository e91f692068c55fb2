"""Acceptance criteria, each at its stated tolerance and runtime budget.

Every test records a one-line PASS/FAIL summary (shown at the end of the
pytest run) before asserting.
"""

import io
import math
import time
from dataclasses import replace

import numpy as np
import pytest

from xurllc.channel import GammaSinrModel, SystemConfig, derive_large_scale, fit_all
from xurllc.config import apply_settings
from xurllc.fbc import strictly_decreasing_ep
from xurllc.montecarlo import (binomial_se, draw_channel, empirical_sinr, optimal_detector,
                               simulate_queue, sinr_for_detector, validate_gamma_fit,
                               violation_frequency)
from xurllc.optim import (EnergyEfficiencyProblem, ep_ec, exhaustive_search, ifgss, odisc,
                          per_ue_ep, pilot_objective, service_models)
from xurllc.recipes import RECIPES, placed_config, run_sweep
from xurllc.snc import QosSpec, ServiceModel, gamma_laplace, service_inv_mgf, ub_sdvp_at_theta
from xurllc.validation import laplace_quadrature

pytestmark = pytest.mark.slow


def test_criterion_01_laplace_identity(report):
    t0 = time.perf_counter()
    rng = np.random.default_rng(2024)
    worst = 0.0
    for _ in range(100):
        model = GammaSinrModel(rng.uniform(1.0, 60.0), 10 ** rng.uniform(-2, 1))
        big_theta = 10 ** rng.uniform(-2, 1)
        exact = gamma_laplace(model, big_theta)
        worst = max(worst, abs(laplace_quadrature(model, big_theta) - exact) / exact)
    dt = time.perf_counter() - t0
    ok = worst <= 1e-8 and dt < 5
    report(1, ok, f"max rel err {worst:.2e} (<= 1e-8), {dt:.1f} s (< 5 s)")
    assert ok


def test_criterion_02_ifgss_optimality(report):
    t0 = time.perf_counter()
    scenario = RECIPES["fig2a"].scenario()
    cfg = placed_config(scenario)
    lo, hi = cfg.n_ues, cfg.blocklength - 1

    def objective(n):
        return pilot_objective(cfg, cfg.tx_power, scenario.rate, n)

    res = ifgss(objective, lo, hi)
    ref = exhaustive_search(objective, lo, hi)
    dt = time.perf_counter() - t0
    ok = res.n_opt == ref.n_opt and res.iterations <= 14 and 60 <= res.n_opt <= 80 and dt < 60
    report(2, ok, f"IFGSS N*={res.n_opt} in {res.iterations} iterations, exhaustive "
                  f"N*={ref.n_opt}, {dt:.1f} s")
    assert ok


def _fig3_point(n_antennas):
    scenario = apply_settings(RECIPES["fig3"].scenario(),
                              {"n_antennas": n_antennas, "tx_power": 0.5, "rate": 0.2})
    cfg = placed_config(scenario)
    res = ifgss(lambda n: pilot_objective(cfg, 0.5, 0.2, n), cfg.n_ues, cfg.blocklength - 1)
    return res.n_opt, res.value


def test_criterion_03_antenna_scaling(report):
    t0 = time.perf_counter()
    n30, e30 = _fig3_point(30)
    n50, e50 = _fig3_point(50)
    dt = time.perf_counter() - t0
    orders = math.log10(e30 / e50)
    drop = (n30 - n50) / n30
    ok = orders >= 2 and drop >= 0.4 and dt < 120
    report(3, ok, f"sum EP {e30:.2e} -> {e50:.2e} ({orders:.1f} orders, need >= 2); "
                  f"N* {n30} -> {n50} ({100 * drop:.0f}% drop, need >= 40%); {dt:.1f} s")
    assert ok


def test_criterion_04_bound_dominance(report):
    t0 = time.perf_counter()
    scenario = apply_settings(RECIPES["fig4"].scenario(), {"theta": 0.2, "arrival_rate": 40.0})
    cfg = placed_config(scenario)
    n_opt = ifgss(lambda n: pilot_objective(cfg, cfg.tx_power, scenario.rate, n),
                  cfg.n_ues, cfg.blocklength - 1).n_opt
    at_opt = cfg.with_(pilot_len=n_opt)
    data_len = cfg.blocklength - n_opt
    # the UE with the weakest channel carries the largest bound
    worst = min(fit_all(at_opt, derive_large_scale(at_opt)), key=lambda g: g.mean)
    service = ServiceModel.fixed_eps(worst, scenario.eps, data_len, laplace=scenario.laplace)
    excess = -math.inf
    worst_case = ""
    for seed in range(5):
        trace = simulate_queue(40.0, service, 1_000_000, seed)
        for d in (2, 6, 10, 14):
            b = ub_sdvp_at_theta(QosSpec(0.2, data_len, d, 40.0), service).value
            f = violation_frequency(trace, d)
            se = binomial_se(b, trace.delays.size)
            z = (f - b) / se if se > 0 else (math.inf if f > b else -math.inf)
            if z > excess:
                excess, worst_case = z, f"seed {seed}, d={d}: freq {f:.2e}, bound {b:.2e}"
    dt = time.perf_counter() - t0
    ok = excess <= 3.0 and dt < 300
    report(4, ok, f"worst excess {excess:.2f} SE (<= 3) at {worst_case}; {dt:.0f} s")
    assert ok


def test_criterion_05_eps_u_shape(report):
    t0 = time.perf_counter()
    recipe = RECIPES["fig5"]
    scenario = apply_settings(recipe.scenario(), recipe.series[0])
    table = run_sweep(scenario)
    eps = np.array(table.column("value"), dtype=float)
    bound = np.array(table.column("ub_sdvp"), dtype=float)
    k = int(np.argmin(bound))
    dt = time.perf_counter() - t0
    interior = 0 < k < eps.size - 1
    ok = interior and 0.005 <= eps[k] <= 0.05 and dt < 120
    report(5, ok, f"argmin eps {eps[k]:.3g} (index {k} of {eps.size}, interior={interior}), "
                  f"bound range {bound.min():.2e}..{bound.max():.2e}; {dt:.0f} s")
    assert ok


def test_criterion_06_argmax_invariance(report):
    t0 = time.perf_counter()
    cfg = SystemConfig()
    rng = np.random.default_rng(0)
    mismatches = []
    for _ in range(10):
        rho, rate, theta = rng.uniform(0.05, 2.0), rng.uniform(0.1, 0.6), 10 ** rng.uniform(-2, 0)
        best_ec, best_ms = (-math.inf, None), (math.inf, None)
        for n in range(cfg.n_ues, cfg.blocklength):
            services = service_models(cfg, rate, n, per_ue_ep(cfg, rho, rate, n))
            ec = math.fsum(ep_ec(s, theta) for s in services)
            ms = math.fsum(service_inv_mgf(s, theta) for s in services)
            if ec > best_ec[0]:
                best_ec = (ec, n)
            if ms < best_ms[0]:
                best_ms = (ms, n)
        if best_ec[1] != best_ms[1]:
            mismatches.append(f"{best_ec[1]} vs {best_ms[1]}")
    dt = time.perf_counter() - t0
    ok = not mismatches and dt < 120
    report(6, ok, f"{10 - len(mismatches)}/10 scenarios agree"
                  + (f" (EP-EC vs M-bar argmax: {', '.join(mismatches)})" if mismatches else "")
                  + f"; {dt:.0f} s")
    assert ok


def test_criterion_07_odisc(report):
    t0 = time.perf_counter()
    scenario = RECIPES["fig2b"].scenario()
    cfg = placed_config(scenario)
    problem = EnergyEfficiencyProblem(cfg, scenario.rate, scenario.theta)
    sol = odisc(problem, bounds=(scenario.lower_b, cfg.p_max))
    grid = np.linspace(scenario.lower_b, cfg.p_max, 2000)
    brute = max(problem.ep_ee_at(x) for x in grid)
    rel = abs(brute - sol.theta_ee) / brute
    varthetas = [v for v, _, _ in sol.trace]
    monotone = all(b >= a for a, b in zip(varthetas, varthetas[1:]))
    dt = time.perf_counter() - t0
    ok = rel <= 1e-3 and monotone and sol.iterations <= 10 and dt < 300
    report(7, ok, f"vartheta* {sol.theta_ee:.6g} vs grid {brute:.6g} (rel {rel:.1e}), "
                  f"{sol.iterations} outer iterations, monotone={monotone}; {dt:.0f} s")
    assert ok


def test_criterion_08_monotonicity_properties(report):
    t0 = time.perf_counter()
    rng = np.random.default_rng(8)
    grid = np.linspace(1e-3, 50.0, 1000)
    ep_ok = all(strictly_decreasing_ep(grid, rng.uniform(0.05, 2.0), int(rng.integers(20, 500)))
                for _ in range(20))
    cfg = SystemConfig()
    real = draw_channel(cfg, derive_large_scale(cfg), seed=8)
    rows = optimal_detector(real)
    worse = 0
    for _ in range(100):
        m = int(rng.integers(cfg.n_ues))
        best = rows[m]
        delta = rng.uniform(1e-4, 1.0) * np.linalg.norm(best) * (
            rng.standard_normal(best.size) + 1j * rng.standard_normal(best.size))
        if sinr_for_detector(real, m, best + delta) > sinr_for_detector(real, m, best) * (1 + 1e-12):
            worse += 1
    dt = time.perf_counter() - t0
    ok = ep_ok and worse == 0 and dt < 60
    report(8, ok, f"EP strictly decreasing on 20 grids: {ep_ok}; "
                  f"perturbations improving SINR: {worse}/100; {dt:.1f} s")
    assert ok


def test_criterion_09_gamma_fidelity(report):
    t0 = time.perf_counter()
    cfg = SystemConfig(n_antennas=50)
    ls = derive_large_scale(cfg)
    samples = empirical_sinr(cfg, ls, 10_000, seed=0)
    ks = [validate_gamma_fit(samples[:, m], g).ks for m, g in enumerate(fit_all(cfg, ls))]
    dt = time.perf_counter() - t0
    ok = max(ks) < 0.05 and dt < 60
    report(9, ok, f"max KS over {cfg.n_ues} UEs {max(ks):.4f} (< 0.05); {dt:.1f} s")
    assert ok


def _csv(table):
    buf = io.StringIO()
    table.to_csv(buf)
    return buf.getvalue().encode()


def test_criterion_10_determinism(report):
    checks = {}
    sweep = apply_settings(RECIPES["fig4"].scenario(), {"delay_ms": "1, 5", "shadow_db": 6,
                                                         "random_drop": True, "seed": 11})
    sweep = replace(sweep, sweep=replace(sweep.sweep, stop=2.0))
    checks["sweep"] = _csv(run_sweep(sweep)) == _csv(run_sweep(sweep))
    checks["sweep, 2 workers"] = _csv(run_sweep(replace(sweep, workers=2))) == _csv(run_sweep(sweep))
    fig2a = RECIPES["fig2a"]
    checks["fig2a"] = _csv(fig2a.run(fig2a.scenario())) == _csv(fig2a.run(fig2a.scenario()))
    service = ServiceModel.fixed_eps(GammaSinrModel(8.0, 0.3), 0.01, 150)
    a, b = (simulate_queue(20.0, service, 100_000, 5) for _ in range(2))
    checks["queue"] = a.delays.tobytes() == b.delays.tobytes()
    cfg = SystemConfig()
    ls = derive_large_scale(cfg)
    checks["sinr"] = (empirical_sinr(cfg, ls, 500, 5).tobytes()
                      == empirical_sinr(cfg, ls, 500, 5).tobytes())
    ok = all(checks.values())
    report(10, ok, ", ".join(f"{k}: {'identical' if v else 'DIFFERS'}" for k, v in checks.items()))
    assert ok
