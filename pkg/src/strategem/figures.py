"""Sweeps behind each figure. Every recipe returns ``{panel: (columns, records)}``."""

from dataclasses import asdict

import numpy as np

from . import analytic
from .distrib import RandomStream
from .genmodel import sample_cohort
from .mcengine import estimate_fraction_exceeded_mc
from .runner import COLUMNS, scenario_rows
from .scenarios import (
    DIMENSIONAL,
    build_case1,
    build_case2,
    build_case3,
    build_case4,
    build_large,
)
from .strategy import GroupLabel, classify_many

FIG2C_N = (20, 40, 60, 80, 100, 150, 200, 300, 400)
FIG2C_D = (0.0, 0.5, 1.0)
FIG3_M = (1, 2, 3, 4, 5, 6, 7, 8, 9)
FIG3B_M = (1, 3, 9)
SIGMA_EPS = (0.5, 1.0, 2.0)
FIG4_C = (0.0, 0.2, 0.4, 0.6, 0.8, 1.0)
FIG5_N = (1, 2, 3, 5, 10, 20, 30, 50)
FIG5_C = (0.3, 1.0)
FIG6_N = (1, 2, 5, 10, 20, 50, 100)
HIST_EDGES = np.arange(-5.0, 5.0001, 0.25)


def _rows(scenarios, mode, reps, seed, workers):
    out = []
    for s in scenarios:
        out.extend(asdict(r) for r in scenario_rows(s, mode=mode, reps=reps, seed=seed,
                                                     workers=workers))
    return out


def fig2c(reps=10_000, seed=0, workers=1):
    scen = []
    for n in FIG2C_N:
        scen.append(build_case1(n=n, strategy=DIMENSIONAL))
        scen.extend(build_case1(n=n, d=d) for d in FIG2C_D)
    return {"fig2c": (COLUMNS, _rows(scen, "both", reps, seed, workers))}


def fig3bc(reps=10_000, seed=0, workers=1, hist_individuals=100_000):
    hist = []
    for M in FIG3B_M:
        s = build_case2(M=M)
        cohort = sample_cohort(s.model, hist_individuals, RandomStream(seed, 0))
        labels = classify_many(cohort.Y, s.rule)
        for name, code in (("control", GroupLabel.CONTROL), ("patient", GroupLabel.PATIENT)):
            vals = cohort.X_hat[labels == code, 0]
            dens, _ = np.histogram(vals, bins=HIST_EDGES, density=True)
            for lo, hi, v in zip(HIST_EDGES[:-1], HIST_EDGES[1:], dens):
                hist.append({"M": M, "group": name, "count": int(vals.size),
                             "bin_left": float(lo), "bin_right": float(hi), "density": float(v)})
    power = []
    for se in SIGMA_EPS:
        power.extend(_rows([build_case2(M=1, sigma_eps=se, strategy=DIMENSIONAL)], "analytic",
                           reps, seed, workers))
        power.extend(_rows([build_case2(M=1, sigma_eps=se)], "both", reps, seed, workers))
        power.extend(_rows([build_case2(M=M, sigma_eps=se) for M in FIG3_M[1:]], "mc",
                           reps, seed, workers))
    return {"fig3b": (("M", "group", "count", "bin_left", "bin_right", "density"), hist),
            "fig3c": (COLUMNS, power)}


def fig4c(reps=10_000, seed=0, workers=1):
    rows = []
    for se in SIGMA_EPS:
        for c in FIG4_C:
            rows.extend(_rows([build_case3(c=c, sigma_eps=se, strategy=DIMENSIONAL),
                               build_case3(c=c, sigma_eps=se, criteria="single")],
                              "both", reps, seed, workers))
            rows.extend(_rows([build_case3(c=c, sigma_eps=se, criteria="both")], "mc",
                              reps, seed, workers))
    return {"fig4c": (COLUMNS, rows)}


def fig5b(reps=10_000, seed=0, workers=1):
    scen = []
    for c in FIG5_C:
        for N in FIG5_N:
            scen.append(build_case4(N=N, c=c, strategy=DIMENSIONAL))
            scen.append(build_case4(N=N, c=c))
    return {"fig5b": (COLUMNS, _rows(scen, "both", reps, seed, workers))}


def fig6abc(reps=1_000, seed=0, workers=1, fraction_individuals=100_000):
    power, effect, frac = [], [], []
    for N in FIG6_N:
        dim = build_large(N=N, strategy=DIMENSIONAL)
        cat = build_large(N=N)
        dim_rows = _rows([dim], "both", reps, seed, workers)
        cat_rows = _rows([cat], "both", reps, seed, workers)
        power.extend(dim_rows + cat_rows)
        rho = analytic.population_correlations(cat.model.weights[0], cat.sigma_delta, 0)
        effect.append({"N": N, "rho_xy": rho.rho_xy, "rho_xhat_y": rho.rho_xhat_y,
                       "cohens_d": cat_rows[0]["effect_size"]})
        frac.append({"N": N, "rho_xy": rho.rho_xy,
                     "fraction_analytic": analytic.fraction_exceeded(rho.rho_xy, 0.5, 0.0),
                     "fraction_mc": estimate_fraction_exceeded_mc(cat, fraction_individuals, seed),
                     "individuals": fraction_individuals, "seed": seed})
    return {"fig6a": (COLUMNS, power),
            "fig6b": (("N", "rho_xy", "rho_xhat_y", "cohens_d"), effect),
            "fig6c": (("N", "rho_xy", "fraction_analytic", "fraction_mc", "individuals", "seed"),
                      frac)}


FIGURES = {"fig2c": fig2c, "fig3bc": fig3bc, "fig4c": fig4c, "fig5b": fig5b, "fig6abc": fig6abc}
DEFAULT_REPS = {"fig2c": 10_000, "fig3bc": 10_000, "fig4c": 10_000, "fig5b": 10_000,
                "fig6abc": 1_000}
