import numpy as np

from strategem import figures
from strategem.runner import COLUMNS


def test_fig3bc_panels():
    panels = figures.fig3bc(reps=20, seed=1, hist_individuals=20_000)
    cols, hist = panels["fig3b"]
    assert set(r["M"] for r in hist) == {1, 3, 9}
    # each group's histogram integrates to one
    for M in (1, 3, 9):
        for group in ("control", "patient"):
            rows = [r for r in hist if r["M"] == M and r["group"] == group]
            mass = sum(r["density"] * (r["bin_right"] - r["bin_left"]) for r in rows)
            assert 0.98 < mass <= 1.0 + 1e-12
    cols, power = panels["fig3c"]
    assert cols == COLUMNS
    assert {r["M"] for r in power} == set(figures.FIG3_M)


def test_fig4c_and_fig5b_shapes():
    _, rows = figures.fig4c(reps=10, seed=2)["fig4c"]
    assert len(rows) == len(figures.SIGMA_EPS) * len(figures.FIG4_C) * 6
    _, rows = figures.fig5b(reps=10, seed=2)["fig5b"]
    assert len(rows) == len(figures.FIG5_C) * len(figures.FIG5_N) * 2


def test_fig6abc_columns():
    panels = figures.fig6abc(reps=2, seed=3, fraction_individuals=20_000)
    _, eff = panels["fig6b"]
    rho = [r["rho_xhat_y"] for r in eff]
    assert all(b < a for a, b in zip(rho, rho[1:]))
    _, frac = panels["fig6c"]
    analytic = np.array([r["fraction_analytic"] for r in frac])
    assert np.all(np.diff(analytic) < 0)
    assert all(abs(r["fraction_mc"] - r["fraction_analytic"]) < 0.03 for r in frac)
