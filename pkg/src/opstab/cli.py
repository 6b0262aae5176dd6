"""Command-line entry point: ``opstab <subcommand> [options]``.

Options can also come from a plain-text ``key = value`` file given with
``--config``; command-line flags take precedence over the file. Exit codes:
0 success, 2 invalid input, 3 runtime failure.
"""

from __future__ import annotations

import argparse
import csv
import sys
from pathlib import Path

import numpy as np

from .algorithms import AlgorithmConfig, make_operator
from .core import IterationError, ValidationError, epoch_schedule, iterate, iterate_until
from .models import (
    CounterexampleSpec,
    PolynomialSpec,
    gen_mixture,
    gen_nonresponse,
    gen_regression,
    load_dataset,
    save_dataset,
)


def read_config(path) -> dict:
    """Parse ``key = value`` lines; '#' starts a comment."""
    out = {}
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ValidationError(f"cannot read config file {path}: {exc}") from exc
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValidationError(f"{path}:{lineno}: expected key = value")
        key, value = (s.strip() for s in line.split("=", 1))
        out[key.replace("-", "_")] = value
    return out


def _floats(text):
    if text is None:
        return None
    if isinstance(text, (list, tuple)):
        return [float(v) for v in text]
    return [float(v) for v in str(text).replace(",", " ").split()]


def _ints(text):
    vals = _floats(text)
    return None if vals is None else [int(v) for v in vals]


def _strs(text):
    if text is None:
        return None
    if isinstance(text, (list, tuple)):
        return [str(v) for v in text]
    return str(text).replace(",", " ").split()


# option name -> (type, default, help)
COMMON = {
    "model": (str, None, "nonresponse | mixture | regression | polynomial | counterexample"),
    "seed": (int, 0, "random seed"),
    "n": (int, 1024, "sample size"),
    "d": (int, 1, "dimension"),
    "p": (int, 1, "link power of the regression model"),
    "out": (str, None, "output file"),
}

COMMANDS = {
    "gen-data": ("write a synthetic dataset as CSV",
                 ["model", "n", "d", "p", "seed", "out"]),
    "run": ("run one operator trajectory and print/write the trace",
            ["model", "algorithm", "level", "data", "n", "d", "p", "seed", "theta0", "T",
             "threshold", "step_size", "cubic_L", "poly_p", "poly_q", "eps", "out"]),
    "sweep": ("Monte-Carlo sweep over sample sizes",
              ["preset", "model", "algorithms", "n_grid", "d", "p", "trials", "seed",
               "theta0", "threshold_c", "threshold_a", "max_iters", "workers", "out", "plot"]),
    "pop-rates": ("population traces and their rate classes",
                  ["model", "algorithms", "theta0", "T", "p", "d"]),
    "stability": ("sample-vs-population perturbation profile",
                  ["model", "algorithm", "n", "d", "p", "seed", "radii", "fit_range",
                   "poly_p", "poly_q", "eps", "out"]),
    "epochs": ("print the epoch schedule", ["beta", "gamma", "eps", "alpha", "c2"]),
    "prop4": ("bounds check on the polynomial family", ["poly_p", "poly_q", "eps_list"]),
    "escape": ("Newton escape demo on the tilted counterexample",
               ["n", "init_below", "init_annulus", "T"]),
    "plot": ("plot a sweep CSV", ["csv", "out", "quantity"]),
}

OPTIONS = dict(COMMON)
OPTIONS.update({
    "algorithm": (str, None, "GD | GA | NM | CNM | EM"),
    "algorithms": (_strs, None, "comma-separated algorithms"),
    "level": (str, "sample", "population | sample"),
    "data": (str, None, "dataset CSV (otherwise generated from n, seed)"),
    "theta0": (_floats, None, "initial point (comma-separated for d > 1)"),
    "T": (int, 50, "number of iterations"),
    "threshold": (float, None, "stop once the error drops to this value"),
    "step_size": (float, None, "step size eta"),
    "cubic_L": (float, None, "cubic regularization constant"),
    "poly_p": (float, 4.0, "polynomial exponent p"),
    "poly_q": (float, 2.0, "polynomial tilt exponent q"),
    "eps": (float, 1e-4, "noise level eps"),
    "preset": (str, None, "named sweep protocol"),
    "n_grid": (_ints, None, "comma-separated sample sizes"),
    "trials": (int, None, "trials per cell"),
    "threshold_c": (float, None, "threshold constant c in c n^-a"),
    "threshold_a": (float, None, "threshold exponent a"),
    "max_iters": (int, None, "iteration cap"),
    "workers": (int, 1, "worker processes"),
    "plot": (str, None, "also write a plot to this file"),
    "radii": (_floats, None, "lo,hi,count of log-spaced radii"),
    "fit_range": (_floats, None, "lo,hi radius window of the exponent fit"),
    "beta": (float, None, "sublinear rate exponent"),
    "gamma": (float, None, "stability exponent"),
    "alpha": (float, None, "localization slack"),
    "c2": (float, 1.0, "stability constant"),
    "eps_list": (_floats, [1e-3, 1e-4, 1e-5], "comma-separated eps values"),
    "init_below": (float, None, "start inside the inner radius (default: scanned)"),
    "init_annulus": (float, None, "start in the annulus (default 3 n^-1/4)"),
    "csv": (str, None, "sweep CSV to plot"),
    "quantity": (str, "final_error", "final_error | hit_iteration"),
})


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="opstab", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    for name, (help_text, opts) in COMMANDS.items():
        sp = sub.add_parser(name, help=help_text, description=help_text)
        sp.add_argument("--config", help="key = value file; flags override it")
        for opt in opts:
            _, default, h = OPTIONS[opt]
            flag = "--" + opt.replace("_", "-")
            # keep defaults out of argparse so file values are not masked
            sp.add_argument(flag, dest=opt, default=None,
                            help=h + (f" (default {default})" if default is not None else ""))
    return parser


def resolve(args) -> dict:
    """Merge defaults, config file and flags, converting types."""
    opts = COMMANDS[args.command][1]
    raw = {k: OPTIONS[k][1] for k in opts}
    if args.config:
        conf = read_config(args.config)
        unknown = set(conf) - set(opts)
        if unknown:
            raise ValidationError(f"unknown config keys for {args.command}: {sorted(unknown)}")
        raw.update(conf)
    for k in opts:
        v = getattr(args, k, None)
        if v is not None:
            raw[k] = v
    out = {}
    for k, v in raw.items():
        conv = OPTIONS[k][0]
        try:
            out[k] = conv(v) if isinstance(v, str) else v
        except ValueError as exc:
            raise ValidationError(f"bad value for {k}: {v!r}") from exc
    return out


def _need(o, *keys):
    for k in keys:
        if o.get(k) is None:
            raise ValidationError(f"missing required option --{k.replace('_', '-')}")


def _dataset(o):
    if o.get("data"):
        return load_dataset(o["data"], p=o["p"])
    m = o["model"]
    if m == "nonresponse":
        return gen_nonresponse(o["n"], seed=o["seed"])
    if m == "mixture":
        return gen_mixture(o["n"], o["d"], seed=o["seed"])
    if m == "regression":
        return gen_regression(o["n"], o["d"], o["p"], seed=o["seed"])
    raise ValidationError(f"no data generator for {m!r}")


def _spec(o):
    if o["model"] == "polynomial":
        return PolynomialSpec(o["poly_p"], o["poly_q"], o["eps"], o.get("d") or 1)
    if o["model"] == "counterexample":
        return CounterexampleSpec(o["n"])
    return None


def cmd_gen_data(o):
    _need(o, "model", "out")
    save_dataset(_dataset(o), o["out"])
    print(f"wrote {o['out']}")


def cmd_run(o):
    _need(o, "model", "algorithm")
    spec = _spec(o)
    data = None
    if spec is None and o["level"] == "sample":
        data = _dataset(o)
    d = spec.dim if spec is not None else (data.dim if data is not None else o["d"])
    cfg = AlgorithmConfig(step_size=o["step_size"], cubic_L=o["cubic_L"])
    op = make_operator(o["model"], o["algorithm"], o["level"], data, cfg, p=o["p"], d=d, spec=spec)
    theta0 = np.zeros(op.dim)
    theta0[:] = o["theta0"] if o["theta0"] is not None else [0.5]
    if o["threshold"] is not None:
        trace, hit = iterate_until(op, theta0, None, o["threshold"], o["T"])
        print(f"hit_iteration {hit}")
    else:
        trace = iterate(op, theta0, o["T"])
    print(f"termination {trace.reason}; final error {trace.final_error:.6g} "
          f"after {trace.iterations} iterations")
    if o["out"]:
        with open(o["out"], "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh)
            w.writerow(["t"] + [f"theta{j + 1}" for j in range(op.dim)] + ["error"])
            for t, pt, err in trace.entries():
                w.writerow([t] + [repr(float(v)) for v in pt.coords] + [repr(err)])
        print(f"wrote {o['out']}")


def cmd_sweep(o):
    from .experiments import InitRule, SweepConfig, ThresholdRule, emit_csv, emit_plot, preset
    from .experiments import run_sweep, sweep_slopes

    kw = {}
    if o["algorithms"]:
        kw["algorithms"] = tuple(o["algorithms"])
    if o["n_grid"]:
        kw["n_grid"] = tuple(o["n_grid"])
    for key in ("trials", "max_iters"):
        if o[key] is not None:
            kw[key] = o[key]
    kw["master_seed"] = o["seed"]
    if o["theta0"] is not None:
        kw["init"] = InitRule("fixed", o["theta0"][0])
    if o["preset"]:
        base = preset(o["preset"])
        if o["model"] is not None and o["model"] != base.model:
            raise ValidationError("--model conflicts with the preset")
        if o["threshold_c"] is not None or o["threshold_a"] is not None:
            kw["threshold"] = ThresholdRule(
                o["threshold_c"] if o["threshold_c"] is not None else base.threshold.c,
                o["threshold_a"] if o["threshold_a"] is not None else base.threshold.a)
        cfg = preset(o["preset"], **kw)
    else:
        _need(o, "model", "algorithms")
        kw["threshold"] = ThresholdRule(
            3.0 if o["threshold_c"] is None else o["threshold_c"],
            0.25 if o["threshold_a"] is None else o["threshold_a"])
        cfg = SweepConfig(model=o["model"], d=o["d"], p=o["p"], **kw)
    res = run_sweep(cfg, workers=o["workers"])
    for alg in res.algorithms():
        for a in res.aggregate(alg):
            print(f"{alg:>4} n={a.n:<7d} median error {a.median_final_error:.5g}  "
                  f"median hit {a.median_hit_iteration:g}  hits {a.hits}/{a.trials}")
        try:
            s = sweep_slopes(res, alg)
            hs = "n/a" if s.hits is None else f"{s.hits.slope:+.3f}"
            print(f"{alg:>4} error slope {s.error.slope:+.3f}  hit slope {hs}")
        except ValidationError as exc:
            print(f"{alg:>4} {exc}")
    if o["out"]:
        emit_csv(res, o["out"])
        print(f"wrote {o['out']}")
    if o["plot"]:
        emit_plot(res, o["plot"])
        print(f"wrote {o['plot']}")


def cmd_pop_rates(o):
    from .experiments import run_population_rates

    _need(o, "model", "algorithms")
    theta0 = o["theta0"] if o["theta0"] is not None else [1.0]
    reps = run_population_rates(o["model"], o["algorithms"], theta0, o["T"], p=o["p"], d=o["d"])
    for alg, rep in reps.items():
        c = rep.convergence
        if c is None:
            print(f"{alg:>4} trace has too few nonzero errors; not classified")
        else:
            print(f"{alg:>4} {c.mode} rate {c.rate:.4f} (R^2 {c.fit.r2:.4f}, "
                  f"final error {rep.trace.final_error:.3g})")


def cmd_stability(o):
    from .analysis import perturbation_profile, write_profile_csv

    _need(o, "model", "algorithm")
    spec = _spec(o)
    data = spec if spec is not None else _dataset(o)
    lo, hi, cnt = o["radii"] if o["radii"] else (o["n"] ** -0.5, 0.5, 30)
    radii = np.geomspace(lo, hi, int(cnt))
    prof = perturbation_profile(o["model"], o["algorithm"], data, radii, seed=o["seed"],
                                p=o["p"],
                                fit_range=tuple(o["fit_range"]) if o["fit_range"] else None)
    for r, s in zip(prof.radii, prof.sup_perturbation):
        print(f"r={r:.5g}  sup perturbation {s:.5g}")
    print(f"gamma_hat {prof.gamma_hat:+.4f}  inner radius {prof.inner_radius}")
    if o["out"]:
        write_profile_csv(prof, o["out"], Path(o["out"]).with_suffix(".summary.csv"))
        print(f"wrote {o['out']}")


def cmd_epochs(o):
    _need(o, "beta", "gamma", "eps", "alpha")
    s = epoch_schedule(o["beta"], o["gamma"], o["eps"], o["alpha"], o["c2"])
    print(f"b={s.b:.6g} b'={s.b_prime:.6g} nu*={s.nu_star:.6g} epochs={s.n_epochs}")
    print("epoch  lambda        T1            T2            T      S")
    for ell, lam, t1, t2, T, S in s.as_rows():
        print(f"{ell:5d}  {lam:.8f}  {t1:12.4f}  {t2:12.4f}  {T:6d} {S:6d}")


def cmd_prop4(o):
    from .experiments import run_polynomial_bounds_suite

    rep = run_polynomial_bounds_suite(o["poly_p"], o["poly_q"], o["eps_list"])
    for line in rep.lines():
        print(line)
    print("constants " + ", ".join(f"{k}={v:.4g}" for k, v in rep.constants.items()))
    print("PASS" if rep.passed else "FAIL")
    if not rep.passed:
        raise RuntimeError("bound violations: " + "; ".join(
            f"{e.algorithm} eps={e.eps:g} {e.check}" for e in rep.failures()))


def cmd_escape(o):
    from .experiments import run_escape_demo

    res = run_escape_demo(o["n"], o["init_below"], o["init_annulus"], o["T"])
    print(f"inner radius {res.inner_radius:.5g}")
    print(f"start {res.init_below:.6g}: first iterates {res.below.points[:4, 0].round(4).tolist()}, "
          f"final {res.below.points[-1, 0]:.6g}, escaped {res.below_escaped}")
    print(f"start {res.init_annulus:.6g}: final {res.annulus.points[-1, 0]:.6g}, "
          f"max |theta| {res.annulus_max_norm:.4g}")


def cmd_plot(o):
    from .experiments import emit_plot, read_csv

    _need(o, "csv", "out")
    emit_plot(read_csv(o["csv"]), o["out"], o["quantity"])
    print(f"wrote {o['out']}")


HANDLERS = {
    "gen-data": cmd_gen_data, "run": cmd_run, "sweep": cmd_sweep, "pop-rates": cmd_pop_rates,
    "stability": cmd_stability, "epochs": cmd_epochs, "prop4": cmd_prop4,
    "escape": cmd_escape, "plot": cmd_plot,
}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        HANDLERS[args.command](resolve(args))
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (IterationError, OSError, RuntimeError, ArithmeticError) as exc:
        print(f"failed: {exc}", file=sys.stderr)
        return 3
    return 0


if __name__ == "__main__":
    sys.exit(main())
