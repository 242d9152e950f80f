"""Built-in self checks run by ``strategem validate``."""

import json
import math
from importlib import resources

import numpy as np

from . import analytic, distrib
from .distrib import RandomStream
from .mcengine import estimate_power_mc
from .runner import analytic_target
from .scenarios import DIMENSIONAL, build_case1, build_case2

GOLDEN_FUNCS = {
    "normal_pdf": distrib.normal_pdf,
    "normal_cdf": distrib.normal_cdf,
    "normal_quantile": distrib.normal_quantile,
    "student_t_cdf": distrib.student_t_cdf,
    "student_t_quantile": distrib.student_t_quantile,
    "noncentral_t_cdf": distrib.noncentral_t_cdf,
    "mills_lambda": analytic.mills_lambda,
}


def load_goldens(path=None):
    if path is None:
        text = resources.files("strategem").joinpath("data/goldens.json").read_text()
    else:
        with open(path) as fh:
            text = fh.read()
    return json.loads(text)["distribution_goldens"]


def check_goldens(path=None):
    bad = []
    entries = load_goldens(path)
    for e in entries:
        got = GOLDEN_FUNCS[e["function"]](*e["args"])
        if not abs(got - e["expected"]) <= e["tol"]:
            args = ", ".join(repr(a) for a in e["args"])
            bad.append(f"{e['function']}({args}) = {got!r}, expected {e['expected']!r}")
    return not bad, "; ".join(bad) or f"{len(entries)} values within tolerance"


def check_normal_symmetry():
    worst = max(abs(distrib.normal_cdf(x) + distrib.normal_cdf(-x) - 1.0)
                for x in np.linspace(-8, 8, 321))
    return worst < 1e-12, f"max |Phi(x) + Phi(-x) - 1| = {worst:.2e}"


def check_t_roundtrip():
    worst = 0.0
    for df in (3, 30, 98, 1000):
        for p in (0.005, 0.025, 0.5, 0.975, 0.995):
            worst = max(worst, abs(distrib.student_t_cdf(distrib.student_t_quantile(p, df), df) - p))
    return worst < 1e-9, f"max roundtrip error {worst:.2e}"


def check_moments(draws, tol, seed):
    """Conditional group means and variances of x_hat against brute-force sampling."""
    worst = 0.0
    stream = RandomStream(seed, 10_001)
    for rho_xy, h, d, sd in ((0.7071067811865476, 0.5, 0.0, 1.0), (0.3, 1.0, 0.5, 0.0)):
        x = stream.normal(draws)
        y = rho_xy * x + math.sqrt(1 - rho_xy ** 2) * stream.normal(draws)
        xh = x + sd * stream.normal(draws)
        m = analytic.conditional_moments(rho_xy / math.sqrt(1 + sd * sd), h, d, sd)
        pat, ctl = xh[y >= h], xh[y < h - d]
        for a, b in ((pat.mean(), m.mean_patient), (pat.var(), m.var_patient),
                     (ctl.mean(), m.mean_control), (ctl.var(), m.var_control)):
            worst = max(worst, abs(a - b))
    return worst <= tol, f"max deviation {worst:.4f} (tolerance {tol})"


def check_analytic_vs_mc(scenarios, reps, seed, tol=0.015):
    worst = 0.0
    for s in scenarios:
        est = estimate_power_mc(s, reps, seed)
        for target in s.targets:
            power = analytic_target(s, target)[0]
            worst = max(worst, abs(est[target].p_hat - power))
    return worst <= tol, f"max |MC - analytic| = {worst:.4f} over {len(scenarios)} scenarios, {reps} reps"


def check_null(Ms, reps, seed, alpha=0.01):
    half = 3 * math.sqrt(alpha * (1 - alpha) / reps)
    rates = []
    for M in Ms:
        est = estimate_power_mc(build_case2(M=M, n=100), reps, seed)
        rates.append(est[(2, None)].p_hat)
    ok = all(abs(r - alpha) <= half for r in rates)
    shown = ", ".join(f"M={M}: {r:.4f}" for M, r in zip(Ms, rates))
    return ok, f"{shown} (band {alpha - half:.4f}..{alpha + half:.4f})"


def check_determinism(reps, seed, workers=(1,)):
    s = build_case2(M=2, n=60)
    first = estimate_power_mc(s, reps, seed, workers=workers[0])
    same = all(estimate_power_mc(s, reps, seed, workers=w) == first for w in workers)
    again = estimate_power_mc(s, reps, seed, workers=workers[0]) == first
    return same and again, f"{reps} reps, workers {list(workers)}"


def run_checks(quick=False, goldens=None, seed=20240501):
    """Run the suite and return a list of ``(name, passed, detail)``."""
    checks = [
        ("distribution goldens", lambda: check_goldens(goldens)),
        ("normal symmetry", check_normal_symmetry),
        ("t quantile roundtrip", check_t_roundtrip),
    ]
    if quick:
        case1 = [build_case1(n=100), build_case1(n=100, strategy=DIMENSIONAL)]
        checks += [
            ("conditional moments vs sampling", lambda: check_moments(10**6, 0.006, seed)),
            ("case 1 analytic vs MC", lambda: check_analytic_vs_mc(case1, 4000, seed)),
            ("null calibration", lambda: check_null((3,), 20_000, seed)),
            ("determinism", lambda: check_determinism(200, seed)),
        ]
    else:
        case1 = []
        for n in (40, 100, 200, 400):
            case1.append(build_case1(n=n, strategy=DIMENSIONAL))
            case1.extend(build_case1(n=n, d=d) for d in (0.0, 0.5, 1.0))
        checks += [
            ("conditional moments vs sampling", lambda: check_moments(10**7, 0.002, seed)),
            ("case 1 analytic vs MC", lambda: check_analytic_vs_mc(case1, 10_000, seed)),
            ("null calibration", lambda: check_null((1, 3, 9), 100_000, seed)),
            ("determinism", lambda: check_determinism(1000, seed, workers=(1, 2))),
        ]
    results = []
    for name, fn in checks:
        try:
            ok, detail = fn()
        except Exception as exc:  # a crashing check is a failed check
            ok, detail = False, f"{type(exc).__name__}: {exc}"
        results.append((name, bool(ok), detail))
    return results
