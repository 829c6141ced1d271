"""Command-line front end.

    ivfunctional simulate      --config FILE [--set k=v ...] [--out DIR] [--threads N]
    ivfunctional rates         --config FILE [--set k=v ...] [--out DIR]
    ivfunctional bounds        --config FILE [--set k=v ...] [--out DIR] [--threads N]
    ivfunctional hard-instance --config FILE [--set k=v ...] --n N [--k-star K] [--out DIR]

``--config`` also accepts ``builtin:polynomial``, ``builtin:parametric`` and
``builtin:exponential``. Exit status: 0 success, 2 configuration or output
error, 3 failed bound assertion in ``bounds``.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys

from ivfunctional import __version__, dgp, harness, kernels, rates
from ivfunctional.scenario import ConfigError, load

SCHEMA = "ivfunctional.summary/1"
CSV_HEADER = ["n", "rep", "seed", "m", "alpha", "estimate", "truth", "sq_error", "truncated", "inv_norm"]
SLOPE_TOLERANCE = 0.2

EXIT_OK, EXIT_CONFIG, EXIT_BOUND = 0, 2, 3


class OutputError(OSError):
    pass


def fmt(x) -> str:
    """17 significant digits, enough to round-trip any double."""
    return "%.17g" % x


def records_csv(records) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_HEADER)
    for r in records:
        w.writerow([r.n, r.rep, r.seed, r.m, fmt(r.alpha), fmt(r.estimate), fmt(r.truth),
                    fmt(r.sq_error), int(r.truncated), fmt(r.inv_norm)])
    return buf.getvalue()


def _num(x):
    # JSON has no nan/inf literals
    if isinstance(x, float) and not math.isfinite(x):
        return None
    return x


def _clean(obj):
    if isinstance(obj, dict):
        return {k: _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    return _num(obj)


def dumps(obj) -> str:
    return json.dumps(_clean(obj), indent=2, allow_nan=False) + "\n"


def _write(out_dir, name, text):
    if out_dir is None:
        sys.stdout.write(text)
        return
    try:
        os.makedirs(out_dir, exist_ok=True)
        with open(os.path.join(out_dir, name), "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    except OSError as exc:
        raise OutputError(f"cannot write {os.path.join(out_dir, name)}: {exc.strerror}") from None


def monotone_within(rows, k=2.0) -> bool:
    """MSE nonincreasing along the grid, up to ``k`` combined standard errors per step."""
    return all(
        b.mse <= a.mse + k * math.hypot(a.se, b.se) for a, b in zip(rows, rows[1:])
    )


def summary(sc, setup, records) -> dict:
    table = harness.summarize_mse(records)
    expo = rates.rate_exponent(setup.cfg)
    out = {
        "schema": SCHEMA,
        "version": __version__,
        "backend": kernels.BACKEND,
        "scenario": sc.as_dict(),
        "config_text": sc.to_text(),
        "effective_d": setup.cfg.d,
        "effective_D": setup.cfg.D,
        "truth": setup.truth,
        "per_n": [
            {"n": r.n, "m": setup.plans[r.n].k_star, "alpha": setup.plans[r.n].alpha,
             "reps": r.reps, "mse": r.mse, "se": r.se, "truncation_rate": r.truncation_rate,
             "theoretical_rate": rates.theoretical_rate(r.n, setup.cfg) if r.n >= 2 else None}
            for r in table
        ],
        "theoretical_exponent": expo,
        "fit": None,
        "fit_error": None,
        "verdicts": {"mse_nonincreasing_2se": monotone_within(table)},
    }
    if isinstance(expo, float):
        try:
            fit = harness.fit_rate(table)
        except harness.FitError as exc:
            out["fit_error"] = str(exc)
            out["verdicts"]["slope_within_tolerance"] = False
        else:
            out["fit"] = {"slope": fit.slope, "intercept": fit.intercept,
                          "r_squared": fit.r_squared, "n_grid": list(fit.n_grid),
                          "excluded": list(fit.excluded)}
            out["verdicts"]["slope_within_tolerance"] = abs(fit.slope - expo) <= SLOPE_TOLERANCE
    return out


def cmd_simulate(sc, args):
    setup = harness.prepare(sc)
    records = harness.run_experiment(sc, threads=args.threads)
    _write(args.out, "records.csv", records_csv(records))
    if args.out is not None:
        _write(args.out, "summary.json", dumps(summary(sc, setup, records)))
        _write(args.out, "scenario.cfg", sc.to_text())
    return EXIT_OK


RATES_HEADER = ["n", "k_star", "delta_star", "alpha", "triangle_implied", "theoretical_rate",
                "deviation_bound"]


def cmd_rates(sc, args):
    setup = harness.prepare(sc)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(RATES_HEADER)
    for n in sc.n_grid:
        tp = setup.plans[n]
        rate = rates.theoretical_rate(n, setup.cfg) if n >= 2 else math.nan
        w.writerow([n, tp.k_star, fmt(tp.delta_star), fmt(tp.alpha), fmt(tp.triangle_implied),
                    fmt(rate), fmt(rates.deviation_bound(n, tp.k_star, setup.cfg, sc.eta))])
    _write(args.out, "rates.csv", buf.getvalue())
    return EXIT_OK


def bounds_report(sc, threads=1) -> dict:
    setup = harness.prepare(sc)
    model, cfg = setup.model, setup.cfg
    dev = harness.check_deviation(
        model, cfg, sc.n_grid, lambda n: setup.plans[n].k_star, sc.reps, sc.master_seed,
        eta=sc.eta, threads=threads,
    )
    m_grid = [m for m in (2, 4, 8) if m <= model.J]
    mean_dev = harness.check_mean_deviation(
        model, sc.n_grid[-1], m_grid, sc.reps, sc.master_seed, threads=threads
    ) if m_grid else {"rows": [], "pass": True}
    bias = harness.check_bias(model, setup.phi, setup.h, cfg, harness.bias_grid(model))
    report = {
        "schema": SCHEMA,
        "scenario": sc.as_dict(),
        "deviation": dev,
        "mean_deviation": mean_dev,
        "bias": bias,
        "regularity": rates.check_regularity(cfg, sc.n_grid),
        "assumption_constant": rates.assumption_constant(cfg),
    }
    report["pass"] = dev["pass"] and mean_dev["pass"] and bias["pass"]
    return report


def cmd_bounds(sc, args):
    report = bounds_report(sc, args.threads)
    _write(args.out, "bounds.json", dumps(report))
    return EXIT_OK if report["pass"] else EXIT_BOUND


def cmd_hard_instance(sc, args):
    cfg = sc.weights
    n = args.n
    k = args.k_star if args.k_star is not None else rates.select_dimension(n, cfg)
    inst = dgp.hard_instance(cfg, n, k, eta=sc.eta)
    out = {
        "schema": SCHEMA, "n": n, "k_star": k, "xi": inst.xi, "phi_coef": inst.phi_coef,
        "h_coef": inst.h_coef, "phi_sq": inst.phi_sq, "h_sq": inst.h_sq, "v": inst.v,
        "b": inst.b, "h_weight": inst.h_weight, "delta_star": inst.delta_star,
        "band_ok": inst.band_ok(), "checks": inst.checks(),
        "error_fourth_moment_bound": inst.error_fourth_moment_bound,
    }
    _write(args.out, "hard_instance.json", dumps(out))
    return EXIT_OK


COMMANDS = {"simulate": cmd_simulate, "rates": cmd_rates, "bounds": cmd_bounds,
            "hard-instance": cmd_hard_instance}


def build_parser():
    ap = argparse.ArgumentParser(prog="ivfunctional", description=__doc__.split("\n\n")[0])
    sub = ap.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", default="builtin:polynomial",
                       help="config file or builtin:NAME (default builtin:polynomial)")
        p.add_argument("--set", action="append", default=[], metavar="KEY=VALUE",
                       help="override a config key; repeatable")
        p.add_argument("--out", default=None, metavar="DIR",
                       help="output directory (tables go to stdout when omitted)")
        p.add_argument("--threads", type=int, default=0, help="worker threads, 0 = auto")
        if name == "hard-instance":
            p.add_argument("--n", type=int, required=True)
            p.add_argument("--k-star", type=int, default=None)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.threads < 0:
            raise ConfigError("--threads must be nonnegative")
        sc = load(args.config, overrides=args.set)
        return COMMANDS[args.command](sc, args)
    except (ConfigError, harness.SetupError, OutputError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except dgp.DomainError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
