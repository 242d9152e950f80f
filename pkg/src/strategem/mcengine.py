"""Monte Carlo rejection rates for a scenario.

Replication ``r`` always draws from substream ``r`` of the master seed, so a
result depends only on the seed and the replication count, never on how the
replications are spread over worker processes.
"""

import math
import os
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from .distrib import RandomStream, normal_quantile, student_t_isf
from .exceptions import DegenerateDataError, DomainError, PartialResultError
from .genmodel import sample_cohort
from .hyptest import pearson_r_columns, pooled_t_columns, r_to_t
from .strategy import GroupLabel, classify_many, draw_case_control, plan_recruitment

BLOCK = 256
FRACTION_CHUNK = 10_000


@dataclass(frozen=True)
class PowerEstimate:
    p_hat: float
    replications: int
    std_error: float
    ci95: tuple
    rejected_count: int
    mean_effect_size: float = math.nan


def wilson_interval(count, total, z=None):
    z = normal_quantile(0.975) if z is None else z
    p = count / total
    denom = 1.0 + z * z / total
    centre = (p + z * z / (2 * total)) / denom
    half = z * math.sqrt(p * (1 - p) / total + z * z / (4 * total * total)) / denom
    return max(0.0, centre - half), min(1.0, centre + half)


def make_estimate(count, total, mean_effect=math.nan):
    """Point estimate, binomial standard error and 95% interval for ``count`` of ``total``."""
    count, total = int(count), int(total)
    p = count / total
    se = math.sqrt(p * (1.0 - p) / total)
    if min(count, total - count) < 10:
        lo, hi = wilson_interval(count, total)
        lo, hi = min(lo, p), max(hi, p)
    else:
        z = normal_quantile(0.975)
        lo, hi = max(0.0, p - z * se), min(1.0, p + z * se)
    return PowerEstimate(p_hat=p, replications=total, std_error=se, ci95=(lo, hi),
                         rejected_count=count, mean_effect_size=mean_effect)


def critical_value(scenario):
    """|t| above which the two-sided test rejects at the scenario's alpha."""
    df = scenario.n - 2
    return student_t_isf(scenario.alpha / 2.0, df)


def _run_block(scenario, plan, t_crit, master_seed, start, stop):
    """Rejection flags and effect sizes for replications ``start..stop-1``."""
    k = len(scenario.targets)
    reject = np.zeros((stop - start, k), dtype=bool)
    effect = np.zeros((stop - start, k))
    if scenario.is_category:
        cols = [j - 1 for j, _ in scenario.targets]
        for row, r in enumerate(range(start, stop)):
            stream = RandomStream(master_seed, r)
            control, patient = draw_case_control(scenario.model, scenario.rule, scenario.n1,
                                                 scenario.n2, stream, plan=plan)
            t, d = pooled_t_columns(patient[:, cols], control[:, cols])
            reject[row] = np.abs(t) > t_crit
            effect[row] = d
    else:
        by_measure = {}
        for pos, (j, i) in enumerate(scenario.targets):
            by_measure.setdefault(i - 1, []).append((pos, j - 1))
        n = scenario.n
        for row, r in enumerate(range(start, stop)):
            cohort = sample_cohort(scenario.model, n, RandomStream(master_seed, r))
            for i, items in by_measure.items():
                pos = [p for p, _ in items]
                js = [j for _, j in items]
                rr = pearson_r_columns(cohort.X_hat[:, js], cohort.Y[:, i])
                reject[row, pos] = np.abs(r_to_t(rr, n)) > t_crit
                effect[row, pos] = rr
    return start, reject, effect


def _progress(done, total, t0):
    elapsed = time.perf_counter() - t0
    eta = elapsed / done * (total - done) if done else float("nan")
    sys.stderr.write(f"\r  {done}/{total} replications, ETA {eta:5.1f}s ")
    if done == total:
        sys.stderr.write("\n")
    sys.stderr.flush()


def _summarize(scenario, reject, effect, done):
    out = {}
    for pos, target in enumerate(scenario.targets):
        col = reject[:done, pos]
        out[target] = make_estimate(int(col.sum()), done, float(np.mean(effect[:done, pos])))
    return out


def estimate_power_mc(scenario, replications, master_seed, workers=1, time_budget=None,
                      progress=False):
    """Rejection rate of every target of ``scenario`` over ``replications`` runs.

    Returns ``{target: PowerEstimate}`` keyed by the scenario's 1-based
    ``(factor, measure)`` pairs (``measure`` is ``None`` for the group test).
    ``time_budget`` (seconds) stops the run early with
    :class:`PartialResultError`.
    """
    replications = int(replications)
    if replications < 1:
        raise DomainError("replications must be positive")
    plan = None
    if scenario.is_category:
        plan = plan_recruitment(scenario.model, scenario.rule, scenario.n1, scenario.n2)
    t_crit = critical_value(scenario)
    k = len(scenario.targets)
    reject = np.zeros((replications, k), dtype=bool)
    effect = np.zeros((replications, k))
    blocks = [(s, min(s + BLOCK, replications)) for s in range(0, replications, BLOCK)]
    done = 0
    t0 = time.perf_counter()

    def absorb(result):
        nonlocal done
        start, rej, eff = result
        reject[start:start + len(rej)] = rej
        effect[start:start + len(rej)] = eff
        done += len(rej)
        if progress:
            _progress(done, replications, t0)

    def over_budget():
        return time_budget is not None and time.perf_counter() - t0 > time_budget

    workers = max(1, int(workers or 1))
    if workers == 1:
        for start, stop in blocks:
            absorb(_run_block(scenario, plan, t_crit, master_seed, start, stop))
            if done < replications and over_budget():
                _raise_partial(scenario, reject, effect, blocks, done)
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            futures = [pool.submit(_run_block, scenario, plan, t_crit, master_seed, s, e)
                       for s, e in blocks]
            for fut in futures:
                absorb(fut.result())
                if done < replications and over_budget():
                    for f in futures:
                        f.cancel()
                    _raise_partial(scenario, reject, effect, blocks, done)
    return _summarize(scenario, reject, effect, replications)


def _raise_partial(scenario, reject, effect, blocks, done):
    # blocks complete in order, so the finished replications are a prefix
    partial = _summarize(scenario, reject, effect, done)
    raise PartialResultError(f"time budget exhausted after {done} replications", completed=done,
                             partial=partial)


def default_workers():
    return len(os.sched_getaffinity(0)) if hasattr(os, "sched_getaffinity") else (os.cpu_count() or 1)


def estimate_fraction_exceeded_mc(scenario, n_individuals, master_seed, factor=1):
    """Fraction of patients whose true factor exceeds the control-group mean.

    ``n_individuals`` people are generated and classified by the scenario's
    rule; the control mean is the sample mean over the generated controls.
    """
    if scenario.rule is None:
        raise DomainError("fraction exceeded needs a category scenario")
    model, rule = scenario.model, scenario.rule
    j = factor - 1
    stream = RandomStream(master_seed, 0)
    ctrl_sum, ctrl_count = 0.0, 0
    patient_vals = []
    left = int(n_individuals)
    while left > 0:
        size = min(FRACTION_CHUNK, left)
        X = stream.normal((size, model.n_factors))
        eps = stream.normal((size, model.n_measures))
        labels = classify_many(X @ model.weights.T + eps * model.row_noise_sd, rule)
        ctrl = X[labels == GroupLabel.CONTROL, j]
        ctrl_sum += float(np.sum(ctrl))
        ctrl_count += ctrl.size
        patient_vals.append(X[labels == GroupLabel.PATIENT, j])
        left -= size
    patients = np.concatenate(patient_vals) if patient_vals else np.empty(0)
    if ctrl_count == 0 or patients.size == 0:
        raise DegenerateDataError("need at least one patient and one control")
    return float(np.mean(patients > ctrl_sum / ctrl_count))
