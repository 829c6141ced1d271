"""Monte Carlo engine: replications, MSE tables, log-log rate fits and
empirical checks of the deviation and bias bounds.

Each replication draws from its own generator, seeded from
``(master_seed, n, rep, tag)``; results are collected in grid order, so the
record list does not depend on the number of worker threads.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace

import numpy as np
from scipy import stats

from ivfunctional import basis, dgp, galerkin, rates
from ivfunctional.basis import WeightConfig
from ivfunctional.scenario import Scenario

BIAS_ORDERS = (0.0, 0.25, 0.5, 0.75, 1.0)
MAX_TRUNCATION = 0.2


class SetupError(ValueError):
    """Scenario cannot be run as configured; raised before any sampling."""


class FitError(ValueError):
    pass


@dataclass(frozen=True)
class ExperimentRecord:
    n: int
    rep: int
    seed: int
    m: int
    alpha: float
    estimate: float
    truth: float
    sq_error: float
    truncated: bool
    inv_norm: float


@dataclass(frozen=True)
class MseRow:
    n: int
    reps: int
    mse: float
    se: float
    truncation_rate: float
    mom: float | None = None


@dataclass(frozen=True)
class RateFit:
    slope: float
    intercept: float
    r_squared: float
    n_grid: tuple
    mse_values: tuple
    excluded: tuple = ()


@dataclass(frozen=True)
class Setup:
    """Everything a replication needs, fixed before sampling starts."""

    scenario: Scenario
    cfg: WeightConfig  # configured weights with d, D raised to what the model needs
    model: dgp.JointModel
    phi: np.ndarray
    h: np.ndarray
    truth: float
    plans: dict



def effective_config(cfg: WeightConfig, model: dgp.JointModel) -> WeightConfig:
    """Raise ``d`` and ``D`` to the link constant ``1/c^2`` of the constructed operator."""
    d = max(cfg.d, model.link_constant)
    return replace(cfg, d=d, D=max(cfg.D, d))


def dimension_for(n: int, sc: Scenario, cfg: WeightConfig) -> int:
    if sc.dimension_rule == "power":
        return rates.power_dimension(n, cfg, sc.power_delta)
    return rates.select_dimension(n, cfg)


def prepare(sc: Scenario, n_grid=None) -> Setup:
    """Validate the scenario against the model and tune every grid point."""
    sc.validate()
    n_grid = tuple(sc.n_grid if n_grid is None else n_grid)
    model = dgp.build_joint(sc.weights, sc.spectrum_J, sc.margin)
    cfg = effective_config(sc.weights, model)
    phi = sc.structural_coefs()
    h = sc.representer_coefs()
    plans = {}
    for n in n_grid:
        m = dimension_for(n, sc, cfg)
        if m > model.J:
            raise SetupError(
                f"dimension m={m} at n={n} exceeds the spectrum truncation J={model.J}"
            )
        if m > h.size:
            raise SetupError(f"dimension m={m} at n={n} exceeds coef_length={h.size}")
        tri = max(cfg.triangle, rates.implied_triangle(m, cfg))
        plans[n] = rates.plan(n, cfg, sc.threshold, triangle=tri, m=m)
    return Setup(sc, cfg, model, phi, h, galerkin.true_functional(h, phi), plans)


def replicate(setup: Setup, n: int, rep: int) -> ExperimentRecord:
    sc = setup.scenario
    seed = dgp.replication_seed(sc.master_seed, n, rep, dgp.TAG_SAMPLE)
    rng = dgp.make_rng(seed)
    sample = dgp.draw_sample(setup.model, setup.phi, sc.sigma, n, rng)
    tp = setup.plans[n]
    pair = galerkin.empirical_pair(sample, tp.k_star)
    res = galerkin.estimate_functional(setup.h, pair, tp.alpha)
    err = res.value - setup.truth
    return ExperimentRecord(
        n=int(n), rep=int(rep), seed=seed, m=tp.k_star, alpha=tp.alpha,
        estimate=res.value, truth=setup.truth, sq_error=err * err,
        truncated=res.truncated, inv_norm=res.inv_norm,
    )


def _workers(threads):
    if threads is None or threads == 0:
        return os.cpu_count() or 1
    if threads < 0:
        raise ValueError("threads must be nonnegative")
    return int(threads)


def _ordered_map(fn, tasks, threads):
    workers = _workers(threads)
    if workers == 1:
        return [fn(*t) for t in tasks]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(lambda t: fn(*t), tasks))


def run_experiment(sc: Scenario, n_grid=None, reps=None, master_seed=None, threads=1):
    """Records for every ``(n, rep)`` in grid-major order."""
    changes = {}
    if n_grid is not None:
        changes["n_grid"] = tuple(int(n) for n in n_grid)
    if reps is not None:
        changes["reps"] = int(reps)
    if master_seed is not None:
        changes["master_seed"] = int(master_seed)
    sc = replace(sc, **changes) if changes else sc
    setup = prepare(sc)
    tasks = [(setup, n, r) for n in sc.n_grid for r in range(sc.reps)]
    return _ordered_map(replicate, tasks, threads)


def _median_of_means(x, groups):
    k = max(1, min(int(groups), x.size))
    return float(np.median([c.mean() for c in np.array_split(x, k)]))


def summarize_mse(records, median_of_means=False, groups=10):
    """Per-``n`` MSE, Monte Carlo standard error and truncation share, in grid order."""
    if not records:
        raise ValueError("no records to summarise")
    by_n = {}
    for r in records:
        by_n.setdefault(r.n, []).append(r)
    rows = []
    for n in sorted(by_n):
        rs = by_n[n]
        err = np.array([r.sq_error for r in rs])
        se = float(np.std(err, ddof=1) / math.sqrt(err.size)) if err.size > 1 else 0.0
        rows.append(MseRow(
            n=n, reps=err.size, mse=float(err.mean()), se=se,
            truncation_rate=float(np.mean([r.truncated for r in rs])),
            mom=_median_of_means(err, groups) if median_of_means else None,
        ))
    return rows


def fit_rate(table, max_truncation=MAX_TRUNCATION) -> RateFit:
    """Least-squares fit of ``log mse`` on ``log n``.

    Rows whose truncation share exceeds ``max_truncation`` are left out and
    listed in ``excluded``; a nonpositive MSE is an error.
    """
    keep = [r for r in table if r.truncation_rate <= max_truncation]
    excluded = tuple(r.n for r in table if r.truncation_rate > max_truncation)
    bad = [r.n for r in keep if not r.mse > 0]
    if bad:
        raise FitError(f"nonpositive MSE at n={bad}; cannot fit on log scale")
    if len(keep) < 3:
        raise FitError(f"need at least 3 usable grid points, have {len(keep)}")
    x = np.log([r.n for r in keep])
    y = np.log([r.mse for r in keep])
    lr = stats.linregress(x, y)
    return RateFit(
        slope=float(lr.slope), intercept=float(lr.intercept), r_squared=float(lr.rvalue**2),
        n_grid=tuple(r.n for r in keep), mse_values=tuple(r.mse for r in keep),
        excluded=excluded,
    )


def deviation_draws(model, m, n, reps, master_seed, threads=1):
    """``||[T_hat]_m - [T]_m||^2`` for ``reps`` dedicated samples of size ``n``."""
    t = galerkin.true_matrix(model, m)

    def one(rep):
        seed = dgp.replication_seed(master_seed, n, rep, dgp.TAG_DEVIATION)
        z, w = dgp.sample_pairs(model, n, dgp.make_rng(seed))
        sample = dgp.Sample(y=np.zeros(n), z=z, w=w)
        return galerkin.operator_deviation_sq(galerkin.empirical_pair(sample, m).t_hat, t)

    return np.array(_ordered_map(one, [(r,) for r in range(reps)], threads))


def check_deviation(model, cfg: WeightConfig, n_grid, m, reps, master_seed,
                    eta=rates.DEFAULT_ETA, threads=1) -> dict:
    """Exceedance frequency of ``||Xi_m||^2 > v_m/(4D)`` against the analytic bound.

    ``m`` is a fixed dimension or a callable ``n -> m``. A grid point passes if
    the frequency is at most the bound plus three binomial standard errors.
    """
    rows = []
    for n in n_grid:
        mm = int(m(n)) if callable(m) else int(m)
        dev = deviation_draws(model, mm, n, reps, master_seed, threads)
        v_m = basis.weights(mm, cfg)[2]
        freq = float(np.mean(dev > v_m / (4.0 * cfg.D)))
        bound = rates.deviation_bound(n, mm, cfg, eta)
        slack = 3.0 * math.sqrt(bound * (1.0 - bound) / reps)
        rows.append({
            "n": int(n), "m": mm, "reps": int(reps), "threshold": v_m / (4.0 * cfg.D),
            "frequency": freq, "bound": bound, "slack": slack,
            "mean_dev_sq": float(dev.mean()), "pass": freq <= bound + slack,
        })
    return {"rows": rows, "pass": all(r["pass"] for r in rows)}


def check_mean_deviation(model, n, m_grid, reps, master_seed, eta_mean=4.0, threads=1) -> dict:
    """Monte Carlo mean of ``||Xi_m||^2`` against ``eta m^2 / n``."""
    rows = []
    for m in m_grid:
        dev = deviation_draws(model, int(m), n, reps, master_seed, threads)
        bound = eta_mean * m * m / n
        rows.append({"n": int(n), "m": int(m), "reps": int(reps), "mean_dev_sq": float(dev.mean()),
                     "bound": bound, "pass": float(dev.mean()) <= bound})
    return {"rows": rows, "pass": all(r["pass"] for r in rows)}


def check_bias(model, phi, h, cfg: WeightConfig, m_grid, Lambda=None) -> dict:
    """Both bias bounds for the population Galerkin solution at each ``m``.

    ``b_m^{1-s} ||phi - phi_m||^2_{b^s} <= 2 D d rho`` is checked for every ``s``
    in ``BIAS_ORDERS``, and ``b_m min(h_m, 1/v_m) |<h, phi - phi_m>|^2 <= 2 Lambda D d rho tau``.
    """
    phi = np.asarray(phi, dtype=np.float64)
    h = np.asarray(h, dtype=np.float64)
    if Lambda is None:
        Lambda = rates.assumption_constant(cfg)["Lambda"]
    L = max(phi.size, h.size)
    phi_full = np.zeros(L)
    phi_full[:phi.size] = phi
    h_full = np.zeros(L)
    h_full[:h.size] = h
    b_all = basis.weight_vector("b", L, cfg)
    bound_norm = 2.0 * cfg.D * cfg.d * cfg.rho
    bound_fun = 2.0 * Lambda * cfg.D * cfg.d * cfg.rho * cfg.tau
    rows = []
    for m in m_grid:
        m = int(m)
        resid = phi_full.copy()
        resid[:m] -= galerkin.projected_solution(model, phi_full[:m], m)
        b_m, h_m, v_m = basis.weights(m, cfg)
        norms = {s: float(b_m ** (1.0 - s) * np.sum(b_all**s * resid**2)) for s in BIAS_ORDERS}
        fun_bias = float(np.dot(h_full, resid)) ** 2
        scaled = b_m * min(h_m, 1.0 / v_m) * fun_bias if v_m > 0 else b_m * h_m * fun_bias
        rows.append({
            "m": m, "norm_terms": norms, "functional_bias_sq": fun_bias,
            "scaled_functional_bias": scaled,
            "delta_m": max(1.0 / h_m, v_m) / b_m,
            "pass": all(v <= bound_norm for v in norms.values()) and scaled <= bound_fun,
        })
    return {"rows": rows, "bound_norm": bound_norm, "bound_functional": bound_fun,
            "Lambda": Lambda, "pass": all(r["pass"] for r in rows)}


def bias_grid(model, limit=32):
    """``m = 1..min(limit, J)``; beyond ``J`` the Galerkin matrix is singular."""
    return list(range(1, min(limit, model.J) + 1))
