"""Sweep evaluation and the named figure recipes."""

import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace

import numpy as np

from .channel import derive_large_scale, draw_shadows, fit_all, random_distances
from .config import Scenario, SweepAxis, apply_settings
from .errors import ConvergenceError, DomainError, NumericError
from .montecarlo import DROP, SHADOWING, stream
from .optim import (EnergyEfficiencyProblem, ep_ec, ep_ee, exhaustive_search, ifgss, odisc,
                    per_ue_ep, pilot_objective, service_models, total_power)
from .snc import QosSpec, ServiceModel, ub_sdvp_at_theta, ub_sdvp_inf

_RECOVERABLE = (NumericError, ConvergenceError, DomainError)


@dataclass
class Table:
    columns: list
    rows: list

    def to_csv(self, fh):
        fh.write(",".join(self.columns) + "\n")
        for row in self.rows:
            fh.write(",".join(_csv_cell(row.get(c)) for c in self.columns) + "\n")

    def to_json(self, fh):
        records = [{c: _json_cell(row.get(c)) for c in self.columns} for row in self.rows]
        json.dump({"columns": self.columns, "rows": records}, fh, indent=1, allow_nan=False)
        fh.write("\n")

    def column(self, name):
        return [row.get(name) for row in self.rows]


def _csv_cell(v):
    if v is None:
        return ""
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (float, np.floating)):
        # repr gives the shortest string that round-trips
        return repr(float(v))
    text = str(v)
    if any(ch in text for ch in ',"\n'):
        text = '"' + text.replace('"', '""') + '"'
    return text


def _json_cell(v):
    if isinstance(v, (float, np.floating)):
        v = float(v)
        return v if math.isfinite(v) else None
    if isinstance(v, np.integer):
        return int(v)
    if isinstance(v, np.bool_):
        return bool(v)
    return v


def placed_config(scenario):
    """SystemConfig with UE distances and shadowing pinned for this scenario.

    Distances are equally spaced unless ``random_drop`` is set. Shadowing is
    drawn from the scenario seed whenever sigma > 0.
    """
    cfg = scenario.system
    changes = {}
    if scenario.random_drop:
        changes["distances"] = random_distances(cfg, stream(scenario.seed, DROP))
    if cfg.shadow_sigma > 0:
        changes["shadows"] = draw_shadows(cfg, stream(scenario.seed, SHADOWING))
    return cfg.with_(**changes) if changes else cfg


def delay_columns(scenario):
    k = len(scenario.delay_ms)
    if k == 1:
        return ["d_th"], ["ub_sdvp"]
    return [f"d_th_{i}" for i in range(k)], [f"ub_sdvp_{i}" for i in range(k)]


def point_columns(scenario):
    d_cols, b_cols = delay_columns(scenario)
    ue_cols = [f"ep_ue{m}" for m in range(scenario.system.n_ues)]
    cols = ["sweep", "value", "seed", "n_pilot", "ifgss_iterations", "sum_ep", *ue_cols]
    for dc, bc in zip(d_cols, b_cols):
        cols += [dc, bc]
    cols += ["ep_ec", "ep_ee", "theta_ee", "rho_opt", "n_pilot_ee", "odisc_iterations",
             "exhaustive_match", "error"]
    return cols


def worst_ue_bound(scenario, models, data_len, d_slots):
    """Largest UB-SDVP across UEs for the fixed-eps service."""
    worst = 0.0
    for g in models:
        service = ServiceModel.fixed_eps(g, scenario.eps, data_len, laplace=scenario.laplace)
        if scenario.inf_theta:
            b = ub_sdvp_inf(service, scenario.arrival_rate, d_slots)
        else:
            b = ub_sdvp_at_theta(QosSpec(scenario.theta, data_len, d_slots, scenario.arrival_rate),
                                 service)
        worst = max(worst, b.value)
    return worst


def evaluate_point(scenario, label=None, value=None):
    """One output row. Recoverable numeric failures go into the ``error`` column."""
    cols = point_columns(scenario)
    row = dict.fromkeys(cols, math.nan)
    row.update(sweep=label or "", value=value if value is not None else "",
               seed=scenario.seed, exhaustive_match="", error="", odisc_iterations=0,
               ifgss_iterations=0)
    d_cols, b_cols = delay_columns(scenario)
    for dc, d in zip(d_cols, scenario.delay_slots()):
        row[dc] = d
    try:
        _fill_point(scenario, row, b_cols)
    except _RECOVERABLE as exc:
        row["error"] = f"{type(exc).__name__}: {exc}"
    return row


def _fill_point(scenario, row, b_cols):
    cfg = placed_config(scenario)
    rho, rate = cfg.tx_power, scenario.rate
    lo, hi = cfg.n_ues, cfg.blocklength - 1

    def objective(n):
        return pilot_objective(cfg, rho, rate, n)

    search = ifgss(objective, lo, hi)
    n_opt = search.n_opt
    row.update(n_pilot=n_opt, ifgss_iterations=search.iterations)
    if scenario.verify_exhaustive:
        row["exhaustive_match"] = exhaustive_search(objective, lo, hi).n_opt == n_opt

    eps = per_ue_ep(cfg, rho, rate, n_opt)
    row["sum_ep"] = math.fsum(eps)
    for m, e in enumerate(eps):
        row[f"ep_ue{m}"] = float(e)

    at_opt = cfg.with_(pilot_len=n_opt)
    models = fit_all(at_opt, derive_large_scale(at_opt))
    data_len = cfg.blocklength - n_opt
    for bc, d in zip(b_cols, scenario.delay_slots()):
        row[bc] = worst_ue_bound(scenario, models, data_len, d)

    capacity = math.fsum(ep_ec(s, scenario.theta) for s in service_models(cfg, rate, n_opt, eps))
    row["ep_ec"] = capacity
    row["ep_ee"] = ep_ee(capacity, total_power(rho, cfg.circuit_power, cfg.amp_eff))

    if scenario.optimize_power:
        problem = EnergyEfficiencyProblem(cfg, rate, scenario.theta,
                                          verify_exhaustive=scenario.verify_exhaustive)
        sol = odisc(problem, bounds=(scenario.lower_b, cfg.p_max), eps_inner=scenario.eps_inner,
                    eps_outer=scenario.eps_outer, max_iter=scenario.max_iter)
        row.update(theta_ee=sol.theta_ee, rho_opt=sol.rho, n_pilot_ee=sol.n_pilot,
                   odisc_iterations=sol.iterations)


def _evaluate_args(args):
    return evaluate_point(*args)


def sweep_points(scenario):
    if scenario.sweep is None:
        return [(scenario, None, None)]
    axis = scenario.sweep
    return [(scenario.with_value(axis.name, v), axis.name, v) for v in axis.values()]


def run_sweep(scenario):
    """Evaluate every sweep point; rows come back in axis order."""
    points = sweep_points(scenario)
    if scenario.workers > 1 and len(points) > 1:
        with ProcessPoolExecutor(max_workers=scenario.workers) as pool:
            rows = list(pool.map(_evaluate_args, points))
    else:
        rows = [evaluate_point(*p) for p in points]
    return Table(point_columns(scenario), rows)


# ---------------------------------------------------------------------------
# Figure recipes

@dataclass(frozen=True)
class Recipe:
    name: str
    summary: str
    settings: dict
    runner: object
    series: tuple = ()
    sweep: tuple | None = None

    def scenario(self, base=None):
        s = apply_settings(base or Scenario(), self.settings)
        if self.sweep is not None:
            s = replace(s, sweep=SweepAxis(*self.sweep))
        return s

    def run(self, scenario):
        return self.runner(self, scenario)


def _run_series(recipe, scenario):
    series = recipe.series or ({},)
    keys = sorted({k for s in series for k in s})
    tables = [run_sweep(apply_settings(scenario, s)) for s in series]
    columns = keys + tables[0].columns
    rows = []
    for s, table in zip(series, tables):
        for r in table.rows:
            rows.append({**{k: s.get(k, "") for k in keys}, **r})
    return Table(columns, rows)


def _run_fig2a(recipe, scenario):
    cfg = placed_config(scenario)
    res = ifgss(lambda n: pilot_objective(cfg, cfg.tx_power, scenario.rate, n),
                cfg.n_ues, cfg.blocklength - 1)
    rows = [{"iteration": i, "lower": lo, "upper": hi, "n_opt": res.n_opt,
             "seed": scenario.seed} for i, (lo, hi) in enumerate(res.trace)]
    return Table(["iteration", "lower", "upper", "n_opt", "seed"], rows)


def _run_fig2b(recipe, scenario):
    cfg = placed_config(scenario)
    problem = EnergyEfficiencyProblem(cfg, scenario.rate, scenario.theta,
                                      verify_exhaustive=scenario.verify_exhaustive)
    sol = odisc(problem, bounds=(scenario.lower_b, cfg.p_max), eps_inner=scenario.eps_inner,
                eps_outer=scenario.eps_outer, max_iter=scenario.max_iter)
    rows = []
    for i, (vartheta, rho, f_val) in enumerate(sol.trace, 1):
        rows.append({"iteration": i, "vartheta": vartheta, "rho": rho, "f_value": f_val,
                     "n_pilot": problem.pilot_search(rho).n_opt, "ep_ee": problem.ep_ee_at(rho),
                     "seed": scenario.seed})
    return Table(["iteration", "vartheta", "rho", "f_value", "n_pilot", "ep_ee", "seed"], rows)


def _run_fig3(recipe, scenario):
    columns = ["n_antennas", "tx_power", "rate", "pilot_len", "sum_ep", "ifgss_opt",
               "exhaustive_opt", "seed"]
    rows = []
    for s in recipe.series:
        sc = apply_settings(scenario, s)
        cfg = placed_config(sc)
        lo, hi = cfg.n_ues, cfg.blocklength - 1
        values = {n: pilot_objective(cfg, cfg.tx_power, sc.rate, n) for n in range(lo, hi + 1)}
        best = ifgss(values.__getitem__, lo, hi).n_opt
        ex = min(values, key=lambda n: (values[n], n))
        for n, v in values.items():
            rows.append({"n_antennas": cfg.n_antennas, "tx_power": cfg.tx_power, "rate": sc.rate,
                         "pilot_len": n, "sum_ep": v, "ifgss_opt": n == best,
                         "exhaustive_opt": n == ex, "seed": sc.seed})
    return Table(columns, rows)


_FIG4_BASE = {"n_cu": 500, "tx_power": 0.5, "n_antennas": 50, "eps": 1e-6, "theta": 0.2,
              "arrival_rate": 40.0}

RECIPES = {r.name: r for r in [
    Recipe("fig2a", "IFGSS bracket per iteration (N_CU = 240)",
           {"n_cu": 240, "tx_power": 0.5, "rate": 0.2, "n_antennas": 50, "theta": 0.2},
           _run_fig2a),
    Recipe("fig2b", "ODISC outer iterations: EP-EE, power and pilot length (N_CU = 500)",
           {"n_cu": 500, "rate": 0.2, "n_antennas": 50, "theta": 0.2}, _run_fig2b),
    Recipe("fig3", "summed decoding EP versus pilot length (N_CU = 240)",
           {"n_cu": 240, "theta": 0.2}, _run_fig3,
           series=({"n_antennas": 30, "tx_power": 0.5, "rate": 0.2},
                   {"n_antennas": 50, "tx_power": 0.5, "rate": 0.2},
                   {"n_antennas": 50, "tx_power": 1.0, "rate": 0.2},
                   {"n_antennas": 50, "tx_power": 0.5, "rate": 0.3})),
    Recipe("fig4", "UB-SDVP versus target delay", _FIG4_BASE, _run_series,
           series=({"n_cu": 500, "arrival_rate": 40.0}, {"n_cu": 400, "arrival_rate": 40.0},
                   {"n_cu": 500, "arrival_rate": 60.0}),
           sweep=("delay_ms", 0.5, 10.0, 0.5)),
    Recipe("fig5", "UB-SDVP versus decoding error probability (d_th = 5 ms)",
           {**_FIG4_BASE, "delay_ms": 5.0}, _run_series,
           series=({"tx_power": 0.5, "n_antennas": 50}, {"tx_power": 1.0, "n_antennas": 50},
                   {"tx_power": 0.5, "n_antennas": 70}),
           sweep=("eps", 1e-4, 0.2, 8, True)),
    Recipe("fig6", "UB-SDVP versus number of BS antennas (d_th = 5 ms)",
           {**_FIG4_BASE, "delay_ms": 5.0}, _run_series,
           series=({"shadow_db": 0.0}, {"shadow_db": 6.0}),
           sweep=("n_antennas", 20, 100, 10)),
    Recipe("fig7", "EP-EC versus blocklength for several QoS exponents",
           {"tx_power": 1.5, "rate": 0.2, "n_antennas": 45, "shadow_db": 6.0}, _run_series,
           series=({"theta": 0.05}, {"theta": 0.2}, {"theta": 1.0}),
           sweep=("n_cu", 200, 1000, 100)),
    Recipe("fig8", "maximum EP-EE and optimal power versus achievable rate (N_CU = 500)",
           {"n_cu": 500, "theta": 0.2, "optimize_power": True}, _run_series,
           series=({"n_antennas": 40}, {"n_antennas": 50}),
           sweep=("rate", 0.1, 0.5, 0.1)),
    Recipe("fig9", "maximum EP-EE and optimal power versus blocklength and QoS exponent",
           {"rate": 0.2, "shadow_db": 6.0, "optimize_power": True}, _run_series,
           series=({"theta": 0.1}, {"theta": 0.5}),
           sweep=("n_cu", 200, 600, 100)),
]}
