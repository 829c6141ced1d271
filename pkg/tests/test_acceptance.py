"""Acceptance suite: one PASS/FAIL line per criterion, at the stated tolerances.

Run with ``pytest tests/test_acceptance.py -v -s``; the lines are also repeated
in the terminal summary. Criteria 1 and 2 run the full 500-replication grids.
"""

import math

import numpy as np
import pytest

from ivfunctional import basis, cli, dgp, galerkin, harness, rates, scenario
from ivfunctional.basis import WeightConfig

from test_dgp import random_hard_configs

pytestmark = pytest.mark.acceptance


def _table(name, **changes):
    sc = scenario.builtin(name, **changes)
    return sc, harness.summarize_mse(harness.run_experiment(sc, threads=0))


def test_criterion_1_polynomial_rate(verdict):
    sc, table = _table("polynomial")
    assert sc.n_grid == (1000, 2000, 4000, 8000, 16000) and sc.reps == 500 and sc.sigma == 0.5
    fit = harness.fit_rate(table)
    ok = -0.80 <= fit.slope <= -0.40 and fit.r_squared >= 0.9
    verdict(1, ok, f"slope {fit.slope:.3f} (target [-0.80, -0.40]), R^2 {fit.r_squared:.3f}, "
                   f"k* {[harness.prepare(sc).plans[n].k_star for n in sc.n_grid]}")
    assert ok


def test_criterion_2_parametric_rate(verdict):
    sc, table = _table("parametric")
    assert sc.weights.s >= sc.weights.a
    fit = harness.fit_rate(table)
    ok = -1.2 <= fit.slope <= -0.8
    verdict(2, ok, f"slope {fit.slope:.3f} (target [-1.2, -0.8]), R^2 {fit.r_squared:.3f}")
    assert ok


def test_criterion_3_exponential(verdict):
    sc = scenario.builtin("exponential")
    cfg = sc.weights
    # hand table: k^2 e^{k^2} <= n, with 4e^4 = 218, 9e^9 = 72927, 16e^16 = 1.4e8
    hand = {1000: 2, 10000: 2, 100000: 3}
    ks = {n: rates.select_dimension(n, cfg) for n in hand}
    table = harness.summarize_mse(harness.run_experiment(sc, n_grid=sorted(hand), threads=0))
    mono = cli.monotone_within(table, k=2.0)
    ok = ks == hand and mono
    detail = ", ".join(f"n={r.n}: k*={ks[r.n]} mse={r.mse:.3g}±{r.se:.2g}" for r in table)
    verdict(3, ok, f"{detail}; k* table {'matches' if ks == hand else 'differs'}, "
                   f"nonincreasing within 2 SE: {mono}")
    assert ok


def test_criterion_4_mean_deviation(verdict):
    model = dgp.build_joint(WeightConfig(p=2, s=1, a=3), 25)
    rep = harness.check_mean_deviation(model, 10_000, [2, 4, 8], 200, 4040)
    detail = ", ".join(f"m={r['m']}: {r['mean_dev_sq']:.3g} <= {r['bound']:.3g}" for r in rep["rows"])
    verdict(4, rep["pass"], detail)
    assert rep["pass"]


def _deviation_cases():
    for name in scenario.BUILTIN:
        sc = scenario.builtin(name)
        setup = harness.prepare(sc, n_grid=(1000, 10_000))
        yield name, setup.model, setup.cfg, (lambda n, s=setup: s.plans[n].k_star), sc.eta
    # a case where the bound is informative: c = 0.9 and D = 1/c^2
    cfg = WeightConfig(p=2, s=1, a=1)
    model = dgp.build_joint(cfg, 2)
    yield "a=1,J=2,m=2", model, harness.effective_config(cfg, model), 2, 2.0


def test_criterion_5_bernstein(verdict):
    parts, ok = [], True
    for label, model, cfg, m, eta in _deviation_cases():
        rep = harness.check_deviation(model, cfg, (1000, 10_000), m, 500, 5050, eta=eta, threads=0)
        ok &= rep["pass"]
        parts.append(label + " " + "; ".join(
            f"n={r['n']} m={r['m']} freq {r['frequency']:.3g} vs {r['bound']:.3g}+{r['slack']:.2g}"
            for r in rep["rows"]))
    verdict(5, ok, " | ".join(parts))
    assert ok


def test_criterion_6_hard_instances(verdict):
    configs = random_hard_configs(50, 2024)
    fails = [(cfg, n, k) for cfg, n, k in configs
             if not all(dgp.hard_instance(cfg, n, k).checks().values())]
    ok = len(configs) == 50 and not fails
    verdict(6, ok, f"{50 - len(fails)}/50 random instances satisfy all three inequalities exactly")
    assert ok


def test_criterion_7_bias(verdict):
    parts, ok = [], True
    for name in scenario.BUILTIN:
        setup = harness.prepare(scenario.builtin(name))
        grid = harness.bias_grid(setup.model)
        rep = harness.check_bias(setup.model, setup.phi, setup.h, setup.cfg, grid)
        ok &= rep["pass"]
        worst = max(max(r["norm_terms"].values()) for r in rep["rows"])
        fun = max(r["scaled_functional_bias"] for r in rep["rows"])
        parts.append(f"{name} m<={grid[-1]}: norm {worst:.3g}<={rep['bound_norm']:.3g}, "
                     f"functional {fun:.3g}<={rep['bound_functional']:.3g}")
    verdict(7, ok, "; ".join(parts))
    assert ok


def _quadrature_matrix(model, m, grid=512):
    x = (np.arange(grid) + 0.5) / grid
    zz, ww = np.meshgrid(x, x, indexing="ij")
    dens = model.density(zz.ravel(), ww.ravel()).reshape(grid, grid)
    e = basis.basis_matrix(x, m)
    # T_{lj} = E f_l(W) e_j(Z)
    return e.T @ dens.T @ e / grid**2


def test_criterion_8_oracle(verdict):
    worst = 0.0
    # J >= 8 so that [T]_8 is nonsingular
    for cfg, J in [(WeightConfig(p=2, s=1, a=3), 25), (WeightConfig(p=2, s=3, a=1), 8),
                   (WeightConfig(p=1, s=1, a=1, kind="exponential"), 8), (WeightConfig(a=0.5), 25)]:
        model = dgp.build_joint(cfg, J)
        quad = _quadrature_matrix(model, 8)
        for m in range(1, 9):
            worst = max(worst, float(np.max(np.abs(quad[:m, :m] - galerkin.true_matrix(model, m)))))
    quad_ok = worst <= 1e-6

    model = dgp.build_joint(WeightConfig(), 25)
    rng = np.random.default_rng(808)
    exact = True
    for _ in range(20):
        n = int(rng.integers(1, 500))
        phi = rng.normal(size=8)
        sample = dgp.draw_sample(model, phi, 0.7, n, rng)
        h = rng.normal(size=4)
        res = galerkin.estimate_functional(h, galerkin.empirical_pair(sample, 1), 1e300)
        exact &= res.value == h[0] * np.mean(sample.y)
    ok = quad_ok and exact
    verdict(8, ok, f"max quadrature error {worst:.2e} (tol 1e-6); m=1 estimate exact on 20 samples: {exact}")
    assert ok


def test_criterion_9_determinism(verdict):
    sc = scenario.builtin("polynomial", reps=40)
    texts = [cli.records_csv(harness.run_experiment(sc, threads=t)) for t in (1, 4, 8)]
    ok = texts[0] == texts[1] == texts[2] and texts[0].count("\n") == 1 + 5 * 40
    verdict(9, ok, f"records.csv byte-identical across threads 1, 4, 8: {ok}")
    assert ok
