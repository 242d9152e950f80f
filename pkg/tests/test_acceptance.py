"""Acceptance suite: one test per criterion, each printing a PASS/FAIL line.

Run on its own with ``pytest tests/test_acceptance.py -v -s``; the summary
lines are also printed (uncaptured) in a normal ``pytest -v`` run.
"""

import itertools
import math
import subprocess
import sys
import time

import numpy as np
import pytest

import oracles
from strategem import distrib
from strategem.analytic import (
    case4_rho_xhat_y,
    conditional_moments,
    fraction_exceeded,
)
from strategem.hyptest import pearson_r_columns, pearson_r_test, t_test_equal_var
from strategem.mcengine import estimate_fraction_exceeded_mc, estimate_power_mc
from strategem.runner import analytic_target
from strategem.scenarios import (
    DIMENSIONAL,
    build_case1,
    build_case2,
    build_case3,
    build_case4,
    build_large,
)

SEED = 20240501
CASE1_N = (40, 100, 200, 400)
CASE1_D = (0.0, 0.5, 1.0)
CASE2_M = (1, 2, 3, 5, 9)
CASE3_C = (0.0, 0.25, 0.5, 0.75, 1.0)


@pytest.fixture
def report(capsys):
    def emit(number, ok, detail):
        with capsys.disabled():
            print(f"\n{'PASS' if ok else 'FAIL'} criterion {number}: {detail}")
        return ok
    return emit


def _pooled_se(a, b):
    return math.sqrt(a.std_error ** 2 + b.std_error ** 2)


def _nondecreasing(ests, k=3.0):
    return all(b.p_hat >= a.p_hat - k * _pooled_se(a, b) for a, b in zip(ests, ests[1:]))


@pytest.fixture(scope="module")
def case2_runs():
    """Case 2 at sigma_eps = 1, n = 100 over M, 100,000 replications each."""
    t0 = time.perf_counter()
    runs = {M: estimate_power_mc(build_case2(M=M, n=100), 100_000, SEED) for M in CASE2_M}
    return runs, time.perf_counter() - t0


def test_criterion_1_analytic_mc_agreement(report):
    t0 = time.perf_counter()
    worst, where = 0.0, None
    for n in CASE1_N:
        scen = [build_case1(n=n, strategy=DIMENSIONAL)] + [build_case1(n=n, d=d) for d in CASE1_D]
        for s in scen:
            (target,) = s.targets
            mc = estimate_power_mc(s, 10_000, SEED)[target].p_hat
            gap = abs(mc - analytic_target(s, target)[0])
            if gap > worst:
                worst, where = gap, s.label
    elapsed = time.perf_counter() - t0
    ok = worst <= 0.015 and elapsed <= 120
    report(1, ok, f"max |MC - analytic| = {worst:.4f} at {where} (tol 0.015), {elapsed:.1f}s (limit 120s)")
    assert ok


def test_criterion_2_strategy_ordering(report):
    def power(s):
        return analytic_target(s, s.targets[0])[0]

    dim_wins = all(power(build_case1(n=n, strategy=DIMENSIONAL)) > power(build_case1(n=n))
                   for n in CASE1_N)
    dim200 = power(build_case1(n=200, strategy=DIMENSIONAL))
    cat200 = {d: power(build_case1(n=200, d=d)) for d in (0.5, 1.0)}
    supersede = any(v > dim200 for v in cat200.values())
    ok = dim_wins and supersede
    report(2, ok, f"dimensional > category(d=0) for all n: {dim_wins}; n=200 dimensional "
                  f"beta={1 - dim200:.3e}, category beta d=0.5: {1 - cat200[0.5]:.3e}, "
                  f"d=1.0: {1 - cat200[1.0]:.3e}")
    assert ok


def test_criterion_3_criterion_count(report, case2_runs):
    runs, _ = case2_runs
    ests = [runs[M][(1, None)] for M in CASE2_M]
    dim = analytic_target(build_case2(M=1, strategy=DIMENSIONAL), (1, 1))[0]
    mono = _nondecreasing(ests)
    beats = ests[-1].p_hat > dim
    ok = mono and beats
    shown = ", ".join(f"M={M}: {e.p_hat:.5f}" for M, e in zip(CASE2_M, ests))
    report(3, ok, f"{shown}; nondecreasing within 3 SE: {mono}; "
                  f"M=9 {ests[-1].p_hat:.5f} > dimensional {dim:.5f}: {beats}")
    assert ok


def test_criterion_4_null_calibration(report, case2_runs):
    runs, elapsed = case2_runs
    rates = {M: runs[M][(2, None)].p_hat for M in CASE2_M}
    inside = all(0.0083 <= r <= 0.0117 for r in rates.values())
    ok = inside and elapsed <= 600
    shown = ", ".join(f"M={M}: {r:.5f}" for M, r in rates.items())
    report(4, ok, f"x2 rejection at alpha=.01, 100000 reps: {shown} (band [0.0083, 0.0117]); "
                  f"{elapsed:.0f}s (limit 600s)")
    assert ok


def test_criterion_5_mixture(report):
    single = [analytic_target(build_case3(c=c, criteria="single"), (1, None))[0] for c in CASE3_C]
    decreasing = all(b < a for a, b in zip(single, single[1:]))
    both = [estimate_power_mc(build_case3(c=c, criteria="both"), 10_000, SEED)[(1, None)]
            for c in CASE3_C]
    mono = _nondecreasing(both)
    x2 = {c: estimate_power_mc(build_case3(c=c, criteria="single"), 10_000, SEED)[(2, None)]
          for c in (0.5, 0.75, 1.0)}
    detected = all(e.p_hat - 3 * e.std_error > 0.01 for e in x2.values())
    ok = decreasing and mono and detected
    report(5, ok, "analytic single "
                  + "/".join(f"{v:.4f}" for v in single) + f" strictly decreasing: {decreasing}; "
                  + "MC both " + "/".join(f"{e.p_hat:.4f}" for e in both)
                  + f" nondecreasing within 3 SE: {mono}; x2 single-criterion rejection "
                  + ", ".join(f"c={c}: {e.p_hat:.4f}" for c, e in x2.items())
                  + f" > alpha: {detected}")
    assert ok


def test_criterion_6_factor_count(report):
    Ns = (1, 2, 3, 5, 10, 15, 20, 30, 50, 100)
    checks = {}
    for strategy, target in (("category", (1, None)), (DIMENSIONAL, (1, 1))):
        p = [analytic_target(build_case4(N=N, strategy=strategy), target)[0] for N in Ns]
        checks[f"case4 {strategy} decreasing in N"] = all(b < a for a, b in zip(p, p[1:]))
        big = [analytic_target(build_large(N=N, strategy=strategy), target)[0] for N in Ns]
        checks[f"large {strategy} nonincreasing in N"] = all(b <= a for a, b in zip(big, big[1:]))
        checks[f"large {strategy} power >= 0.99 for N <= 5"] = all(
            analytic_target(build_large(N=N, strategy=strategy), target)[0] >= 0.99
            for N in (1, 2, 3, 4, 5))
    r5, r15 = case4_rho_xhat_y(5, 1.0), case4_rho_xhat_y(15, 1.0)
    checks["rho(N=5) > 0.2 > rho(N=15)"] = r5 > 0.2 > r15
    f50 = fraction_exceeded(1 / math.sqrt(51), 0.5)
    f100 = fraction_exceeded(1 / math.sqrt(101), 0.5)
    checks["fraction N=50 < 0.60 and N=100 smaller"] = f100 < f50 < 0.60
    mc = {N: estimate_fraction_exceeded_mc(build_case4(N=N), 100_000, SEED) for N in (50, 100)}
    gaps = {50: abs(mc[50] - f50), 100: abs(mc[100] - f100)}
    checks["MC fraction within 0.01"] = max(gaps.values()) <= 0.01
    ok = all(checks.values())
    failed = [k for k, v in checks.items() if not v]
    report(6, ok, f"rho(5)={r5:.4f}, rho(15)={r15:.4f}; fraction N=50 {f50:.4f} (MC {mc[50]:.4f}), "
                  f"N=100 {f100:.4f} (MC {mc[100]:.4f}); "
                  + (f"failed: {failed}" if failed else f"all {len(checks)} sub-checks hold"))
    assert ok


def _moment_oracle(draws, chunk=10_000_000, seed=SEED):
    """Brute-force group sums of x_hat over the grid, binned once per (rho, sigma_delta)."""
    edges = np.array([-0.5, 0.0, 0.5, 1.0])  # every h and h - d in the grid
    rng = np.random.default_rng(seed)
    acc = {}
    for _ in range(draws // chunk):
        x, z, e = rng.standard_normal((3, chunk))
        for rho in (0.1, 0.3, 0.5, 0.7):
            for sd in (0.0, 1.0):
                rxy = rho * math.sqrt(1 + sd * sd)
                y = rxy * x + math.sqrt(1 - rxy * rxy) * z
                xh = x + sd * e
                b = np.searchsorted(edges, y, side="right")
                s = np.stack([np.bincount(b, minlength=5), np.bincount(b, xh, 5),
                              np.bincount(b, xh * xh, 5)])
                acc[rho, sd] = acc.get((rho, sd), 0) + s
    out = {}
    for (rho, sd), s in acc.items():
        for h, d in itertools.product((0.0, 0.5, 1.0), (0.0, 0.5)):
            pat = s[:, np.searchsorted(edges, h, side="right"):].sum(axis=1)
            ctl = s[:, :np.searchsorted(edges, h - d, side="right")].sum(axis=1)
            mp, mc = pat[1] / pat[0], ctl[1] / ctl[0]
            out[rho, h, d, sd] = (mp, pat[2] / pat[0] - mp * mp, mc, ctl[2] / ctl[0] - mc * mc)
    return out


def test_criterion_7_oracle_equivalence(report):
    checks = {}
    # distribution functions against the mpmath references
    xs = np.linspace(-9, 9, 73)
    normal_err = max(abs(distrib.normal_cdf(x) - float(oracles.normal_cdf(x))) for x in xs)
    checks["normal cdf"] = (normal_err, 1e-10)
    nct_grid = [(t, df, ncp) for t in (-3.0, -0.5, 1.0, 2.63, 5.0) for df in (3, 18, 98, 198)
                for ncp in (-1.0, 0.0, 1.5, 4.49)]
    nct_err = max(abs(distrib.noncentral_t_cdf(*a) - float(oracles.nct_cdf(*a))) for a in nct_grid)
    checks["noncentral t cdf"] = (nct_err, 1e-8)
    t_err = max(abs(distrib.student_t_cdf(t, df) - float(oracles.student_t_cdf(t, df)))
                for t in (-6.0, -1.0, 0.3, 2.6) for df in (1, 4, 98, 1000))
    checks["student t cdf"] = (t_err, 1e-10)

    # conditional moments against brute-force sampling; 10^8 draws keep the
    # oracle's own noise (about 3e-4) well inside the band
    moments = _moment_oracle(100_000_000)
    m_err = 0.0
    for key, sampled in moments.items():
        m = conditional_moments(*key)
        exact = (m.mean_patient, m.var_patient, m.mean_control, m.var_control)
        m_err = max(m_err, max(abs(a - b) for a, b in zip(sampled, exact)))
    checks["conditional moments"] = (m_err, 0.002)

    # hand-computed test statistics
    tt = t_test_equal_var([1, 2, 3], [3, 4, 5])
    r = 5.5 / math.sqrt(5 * 8.75)
    pr = pearson_r_test([1, 2, 3, 4], [1, 3, 2, 5])
    stat_err = max(abs(tt.statistic + math.sqrt(6)), abs(tt.effect_size + 2.0),
                   abs(pr.effect_size - r),
                   abs(pr.statistic - r * math.sqrt(2) / math.sqrt(1 - r * r)))
    checks["test statistics"] = (stat_err, 1e-12)

    # permutation p-values on n = 8
    perms = np.array(list(itertools.permutations(range(8))))
    perm_err = 0.0
    for seed in range(5):
        rng = np.random.default_rng(seed)
        u = rng.standard_normal(8)
        v = 0.6 * u + rng.standard_normal(8)
        obs = pearson_r_test(u, v)
        rp = pearson_r_columns(v[perms].T, u)
        p_perm = np.mean(np.abs(rp) >= abs(obs.effect_size) - 1e-12)
        perm_err = max(perm_err, abs(obs.p_value - p_perm))
    checks["permutation p"] = (perm_err, 0.02)

    ok = all(err <= tol for err, tol in checks.values())
    report(7, ok, "; ".join(f"{k} {err:.2e} (tol {tol:g})" for k, (err, tol) in checks.items()))
    assert ok


def test_criterion_8_determinism(report):
    checks = {}
    for s in (build_case2(M=3, n=100), build_case3(c=0.5, criteria="both"),
              build_case1(n=100, strategy=DIMENSIONAL)):
        a = estimate_power_mc(s, 2000, SEED, workers=1)
        b = estimate_power_mc(s, 2000, SEED, workers=1)
        c = estimate_power_mc(s, 2000, SEED, workers=2)
        checks[s.label] = a == b == c
    t0 = time.perf_counter()
    proc = subprocess.run([sys.executable, "-m", "strategem", "validate", "--quick"],
                          capture_output=True, text=True)
    elapsed = time.perf_counter() - t0
    quick_ok = proc.returncode == 0 and elapsed < 60
    ok = all(checks.values()) and quick_ok
    report(8, ok, f"bit-identical across runs and 1 vs 2 workers: {all(checks.values())}; "
                  f"validate --quick exit {proc.returncode} in {elapsed:.1f}s (limit 60s)")
    assert ok, proc.stdout + proc.stderr
