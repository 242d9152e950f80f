"""Turn scenarios into result rows (analytic and/or Monte Carlo) and write them out."""

import csv
import json
import math
from dataclasses import asdict, dataclass, replace

from . import analytic
from .mcengine import estimate_power_mc

COLUMNS = ("case", "strategy", "n", "n1", "n2", "N", "M", "c", "d", "sigma_eps", "sigma_delta",
           "alpha", "factor_index", "measure_index", "power_analytic", "power_mc", "mc_se",
           "effect_size", "fraction_exceeded", "seed", "replications")

MODES = ("analytic", "mc", "both")


@dataclass
class ResultRow:
    case: str
    strategy: str
    n: int
    n1: int
    n2: int
    N: int
    M: int
    c: float
    d: float
    sigma_eps: float
    sigma_delta: float
    alpha: float
    factor_index: int
    measure_index: int
    power_analytic: float = None
    power_mc: float = None
    mc_se: float = None
    effect_size: float = None
    fraction_exceeded: float = None
    seed: int = None
    replications: int = None


def case_label(s):
    suffix = s.criteria or s.disorder
    return f"{s.case}:{suffix}" if suffix else s.case


def with_bonferroni(scenario):
    """Divide alpha by the number of tested targets."""
    return replace(scenario, alpha=scenario.alpha / len(scenario.targets))


def analytic_target(scenario, target):
    """Closed-form ``(power, effect_size, fraction_exceeded)`` for one target.

    Returns ``None`` when no closed form exists (several diagnostic criteria).
    Effect size is Cohen's d for the group test and rho(x_hat, y) for the
    correlation test.
    """
    j, i = target
    model = scenario.model
    if scenario.is_category:
        cols = scenario.rule.columns(model.n_measures)
        if len(cols) != 1:
            return None
        m = cols[0]
        h, d = scenario.rule.thresholds[0], scenario.rule.margin
    else:
        m = i - 1
    rho = analytic.population_correlations(model.weights[m], model.measurement_sd, j - 1,
                                           row_noise_sd=model.row_noise_sd[m])
    if not scenario.is_category:
        power = analytic.correlation_power(rho.rho_xhat_y, scenario.n, scenario.alpha)
        return power, rho.rho_xhat_y, None
    moments = analytic.conditional_moments(rho.rho_xhat_y, h, d, model.measurement_sd)
    d_eff = analytic.category_effect_size(moments)
    power = analytic.category_power(d_eff, scenario.n1, scenario.n2, scenario.alpha)
    frac = analytic.fraction_exceeded(rho.rho_xy, h, d)
    return power, d_eff, frac


def scenario_rows(scenario, mode="both", reps=10_000, seed=0, workers=1, progress=False,
                  time_budget=None):
    """One :class:`ResultRow` per target of ``scenario``."""
    if mode not in MODES:
        raise ValueError(f"mode must be one of {MODES}")
    mc = {}
    if mode in ("mc", "both"):
        mc = estimate_power_mc(scenario, reps, seed, workers=workers, progress=progress,
                               time_budget=time_budget)
    rows = []
    for target in scenario.targets:
        j, i = target
        row = ResultRow(case=case_label(scenario), strategy=scenario.strategy, n=scenario.n,
                        n1=scenario.n1, n2=scenario.n2, N=scenario.model.n_factors,
                        M=scenario.model.n_measures, c=scenario.c, d=scenario.d,
                        sigma_eps=scenario.sigma_eps, sigma_delta=scenario.sigma_delta,
                        alpha=scenario.alpha, factor_index=j, measure_index=i)
        if mode in ("analytic", "both"):
            res = analytic_target(scenario, target)
            if res is not None:
                row.power_analytic, row.effect_size, row.fraction_exceeded = res
        if target in mc:
            est = mc[target]
            row.power_mc = est.p_hat
            row.mc_se = est.std_error
            row.seed = seed
            row.replications = reps
            if row.effect_size is None:
                row.effect_size = est.mean_effect_size
        rows.append(row)
    return rows


def format_value(v):
    """Text form used in CSV output: 9 significant digits, scientific below 1e-4."""
    if v is None:
        return ""
    if isinstance(v, bool):
        return str(v).lower()
    if isinstance(v, int):
        return str(v)
    if isinstance(v, float):
        if v == 0.0:
            return "0"
        if not math.isfinite(v):
            return str(v)
        if abs(v) < 1e-4:
            return format(v, ".8e")
        return format(v, ".9g")
    return str(v)


def write_table(columns, records, fh):
    """CSV with the fixed numeric format. ``records`` are mappings keyed by column."""
    writer = csv.writer(fh, lineterminator="\n")
    writer.writerow(columns)
    for rec in records:
        writer.writerow([format_value(rec.get(c)) for c in columns])


def write_csv(rows, fh):
    write_table(COLUMNS, [asdict(r) for r in rows], fh)


def write_json(rows, fh):
    json.dump([{c: asdict(r)[c] for c in COLUMNS} for r in rows], fh, indent=1)
    fh.write("\n")
