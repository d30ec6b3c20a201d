"""Command-line front end.

Subcommands::

    aggregate   fit U-aggregation to a prediction CSV
    simulate    synthetic benchmark grid (long-form CSV)
    se          state-evolution traces and limits
    bench       all methods against a known truth vector
    generate    write a synthetic prediction matrix and its truth

Every option may also be given in a JSON file passed with ``--config``; flags on
the command line override file values.  Exit codes: 0 ok, 1 pipeline error,
2 input error.
"""

from __future__ import annotations

import argparse
import csv
import json
import os
import sys
import warnings

import numpy as np

from . import __version__
from .amp import AmpConfig
from .cv import DEFAULT_GRID, CvConfig
from .data import (read_matrix_csv, read_vector_csv, write_columns_csv, write_matrix_csv)
from .exceptions import ConfigError, InputError, UAggregationError
from .pipeline import u_aggregate
from .simulation import (FIG3_D, FIG3_OMEGA, FIG4_LAMBDA, METHODS, REGIMES, SIM_COLUMNS, Cell,
                         benchmark, simulate)
from .state_evolution import SeConfig, se_run
from .synthgen import Law, SynthConfig, config_dict, generate

EXIT_OK, EXIT_PIPELINE, EXIT_INPUT = 0, 1, 2

DEFAULTS = {
    "aggregate": dict(orientation="models", omega=None, cv=False, folds=5, grid=list(DEFAULT_GRID),
                      seed=0, center=False, max_iters=100, tol=1e-6, onsager_mode="derivative",
                      threshold_mode="quantile", outdir=".", debug_dump=False),
    "simulate": dict(fig="fig3", n=1000, d=None, omega=None, regimes=list(REGIMES), lam=None,
                     replicates=1, seed=0, methods=list(METHODS), output="simulate.csv",
                     workers=None),
    "se": dict(lam=[2.0], alpha=[0.3], omega=[0.3], tau_policy="quantile", tau=0.5, T=200,
               expectation="quadrature", mc_samples=200_000, seed=0, allow_subcritical=False,
               output="se_trace.csv", limits="se_limits.csv"),
    "bench": dict(orientation="models", omega=None, folds=5, seed=0, center=False,
                  outdir="."),
    "generate": dict(n=1000, d=100, omega=0.3, regime="heteroskedastic", sigma_law=None,
                     signal_norm=None, seed=0, outdir="."),
}


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        sys.stderr.write("%s: error: %s\n" % (self.prog, message))
        raise SystemExit(EXIT_INPUT)


def _fmt(x):
    if x is None:
        return ""
    if isinstance(x, (float, np.floating)):
        return repr(float(x))
    return x


def _write_rows(path, columns, rows):
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(columns)
        for row in rows:
            writer.writerow([_fmt(row[c]) for c in columns])


def _write_json(path, obj):
    with open(path, "w") as fh:
        json.dump(obj, fh, indent=1, sort_keys=True, default=_json_default)
        fh.write("\n")


def _json_default(x):
    if isinstance(x, np.ndarray):
        return x.tolist()
    if isinstance(x, (np.floating, np.integer)):
        return x.item()
    raise TypeError("not serializable: %r" % type(x))


def _floats(text):
    return [float(t) for t in str(text).split(",") if t.strip()]


def _ints(text):
    return [int(t) for t in str(text).split(",") if t.strip()]


def build_parser() -> argparse.ArgumentParser:
    S = argparse.SUPPRESS
    p = _Parser(prog="uaggregation", description="Unsupervised aggregation of model predictions.")
    p.add_argument("--version", action="version", version="%(prog)s " + __version__)
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    a = sub.add_parser("aggregate", help="aggregate a prediction matrix", argument_default=S)
    a.add_argument("--input", required=True, help="prediction CSV")
    a.add_argument("--config", help="JSON file with option values")
    a.add_argument("--orientation", choices=["models", "samples"],
                   help="whether CSV rows are models (default) or samples")
    g = a.add_mutually_exclusive_group()
    g.add_argument("--omega", type=float, help="fixed sparsity level")
    g.add_argument("--cv", action="store_true", help="choose omega by cross-validation (default)")
    a.add_argument("--folds", type=int)
    a.add_argument("--grid", type=_floats, help="comma-separated omega grid")
    a.add_argument("--seed", type=int)
    a.add_argument("--center", action="store_true", help="center rows before normalizing")
    a.add_argument("--max-iters", type=int, dest="max_iters")
    a.add_argument("--tol", type=float)
    a.add_argument("--onsager-mode", choices=["derivative", "literal"], dest="onsager_mode")
    a.add_argument("--threshold-mode", choices=["quantile", "literal"], dest="threshold_mode")
    a.add_argument("--outdir")
    a.add_argument("--debug-dump", action="store_true", dest="debug_dump",
                   help="also write the stabilization factors")

    s = sub.add_parser("simulate", help="synthetic benchmark grid", argument_default=S)
    s.add_argument("--config")
    s.add_argument("--fig", choices=["fig3", "u-weights"])
    s.add_argument("--n", type=int)
    s.add_argument("--d", type=_ints, help="comma-separated model counts")
    s.add_argument("--omega", type=_floats, help="comma-separated sparsity levels")
    s.add_argument("--regimes", type=lambda t: t.split(","))
    s.add_argument("--lam", type=_floats, help="comma-separated signal norms (u-weights)")
    s.add_argument("--replicates", type=int)
    s.add_argument("--seed", type=int)
    s.add_argument("--methods", type=lambda t: t.split(","))
    s.add_argument("--output")
    s.add_argument("--workers", type=int, help="overrides UAGG_WORKERS")

    e = sub.add_parser("se", help="state-evolution traces", argument_default=S)
    e.add_argument("--config")
    e.add_argument("--lam", type=_floats)
    e.add_argument("--alpha", type=_floats)
    e.add_argument("--omega", type=_floats)
    e.add_argument("--tau-policy", choices=["quantile", "fixed"], dest="tau_policy")
    e.add_argument("--tau", type=float)
    e.add_argument("--T", type=int)
    e.add_argument("--expectation", choices=["quadrature", "montecarlo"])
    e.add_argument("--mc-samples", type=int, dest="mc_samples")
    e.add_argument("--seed", type=int)
    e.add_argument("--allow-subcritical", action="store_true", dest="allow_subcritical")
    e.add_argument("--output")
    e.add_argument("--limits")

    b = sub.add_parser("bench", help="evaluate all methods against a truth vector",
                       argument_default=S)
    b.add_argument("--input", required=True)
    b.add_argument("--truth", required=True, help="CSV of sample_id,value")
    b.add_argument("--config")
    b.add_argument("--orientation", choices=["models", "samples"])
    b.add_argument("--omega", type=float, help="true sparsity; enables the oracle variant")
    b.add_argument("--folds", type=int)
    b.add_argument("--seed", type=int)
    b.add_argument("--center", action="store_true")
    b.add_argument("--outdir")

    gen = sub.add_parser("generate", help="write a synthetic matrix and truth",
                         argument_default=S)
    gen.add_argument("--config")
    gen.add_argument("--n", type=int)
    gen.add_argument("--d", type=int)
    gen.add_argument("--omega", type=float)
    gen.add_argument("--regime", choices=["homoskedastic", "heteroskedastic"])
    gen.add_argument("--sigma-law", dest="sigma_law", help='e.g. "constant:0" for zero noise')
    gen.add_argument("--signal-norm", type=float, dest="signal_norm")
    gen.add_argument("--seed", type=int)
    gen.add_argument("--outdir")
    return p


def resolve_options(command: str, ns: argparse.Namespace) -> dict:
    """Merge defaults, then the JSON config file, then explicit flags."""
    opts = dict(DEFAULTS[command])
    given = vars(ns).copy()
    given.pop("command", None)
    path = given.pop("config", None)
    if path is not None:
        try:
            with open(path) as fh:
                from_file = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise InputError("cannot read config %s: %s" % (path, exc)) from None
        if not isinstance(from_file, dict):
            raise InputError("config %s must hold a JSON object" % path)
        unknown = sorted(set(from_file) - set(opts) - {"input", "truth"})
        if unknown:
            raise InputError("unknown config keys: %s" % ", ".join(unknown))
        opts.update(from_file)
    opts.update(given)
    return opts


def _amp_config(o) -> AmpConfig:
    return AmpConfig(omega=o["omega"] if o.get("omega") is not None else 0.3,
                     max_iters=o["max_iters"], tol=o["tol"], onsager_mode=o["onsager_mode"],
                     threshold_mode=o["threshold_mode"])


def cmd_aggregate(o) -> int:
    Y = read_matrix_csv(o["input"], o["orientation"])
    amp = _amp_config(o)
    cv = None
    if o["omega"] is None:
        cv = CvConfig(K=o["folds"], grid=tuple(o["grid"]), seed=o["seed"], amp=amp,
                      center=o["center"])
    res = u_aggregate(Y, o["omega"], cv=cv, amp=amp, center=o["center"])
    out = o["outdir"]
    os.makedirs(out, exist_ok=True)

    write_columns_csv(os.path.join(out, "v_hat.csv"), ("sample_id", "score"),
                      (res.sample_ids, [float(x) for x in res.v_hat]))
    order = sorted(range(len(res.u_hat)), key=lambda i: (-res.u_hat[i], i))
    rank = [0] * len(order)
    for r, i in enumerate(order, start=1):
        rank[i] = r
    write_columns_csv(os.path.join(out, "u_hat.csv"), ("model_id", "weight", "rank"),
                      (res.model_ids, [float(x) for x in res.u_hat], rank))
    trace_path = os.path.join(out, "trace.csv")
    _write_rows(trace_path, ("t", "tau", "c_t", "nnz", "rel_change"),
                [vars(r) for r in res.trace])
    report = {
        "omega_hat": res.omega_used,
        "omega_source": "fixed" if o["omega"] is not None else "cv",
        "iterations": res.iterations_run,
        "converged": res.converged,
        "warnings": list(res.warnings),
        "dropped_models": list(res.dropped_models),
        "trace_path": "trace.csv",
        "n_models": len(res.model_ids),
        "n_samples": len(res.sample_ids),
    }
    cv_report = getattr(res, "cv_report", None)
    if cv_report is not None:
        report["cv"] = {"grid": list(cv_report.grid), "losses": cv_report.losses.tolist(),
                        "total_loss": cv_report.total_loss.tolist(), "folds": o["folds"],
                        "seed": o["seed"]}
    _write_json(os.path.join(out, "report.json"), report)
    if o["debug_dump"]:
        from .pipeline import prepare
        prep = prepare(Y, center=o["center"])
        st = prep.stabilized
        _write_json(os.path.join(out, "stabilization.json"), {
            "theta_bar": st.theta_bar, "h_hat": st.h_hat, "f_hat": st.f_hat, "g1": st.g1,
            "g2": st.g2, "singular_values": st.singular_values, "floor_count": st.floor_count,
            "transposed": st.transposed, "identity": st.identity,
        })
    for w in res.warnings:
        print("warning: %s" % w, file=sys.stderr)
    return EXIT_OK


def _sim_cells(o):
    n = o["n"]
    if o["fig"] == "u-weights":
        ds = o["d"] or [100]
        oms = o["omega"] or [0.3]
        lams = o["lam"] or list(FIG4_LAMBDA)
        return [Cell(n, d, om, reg, lam) for reg in o["regimes"] for lam in lams
                for om in oms for d in ds]
    ds = o["d"] or list(FIG3_D)
    oms = o["omega"] or list(FIG3_OMEGA)
    lams = o["lam"] or [None]
    return [Cell(n, d, om, reg, lam) for reg in o["regimes"] for lam in lams
            for om in oms for d in ds]


def cmd_simulate(o) -> int:
    bad = sorted(set(o["methods"]) - set(METHODS))
    if bad:
        raise InputError("unknown method(s): %s" % ", ".join(bad))
    for reg in o["regimes"]:
        if reg not in REGIMES:
            raise InputError("unknown regime: %s" % reg)
    if o["replicates"] < 1:
        raise InputError("--replicates must be >= 1")
    rows = simulate(_sim_cells(o), replicates=o["replicates"], seed=o["seed"],
                    methods=o["methods"], workers=o["workers"])
    _write_rows(o["output"], SIM_COLUMNS, rows)
    return EXIT_OK


def cmd_se(o) -> int:
    trace_cols = ("lam", "alpha", "omega", "t", "mu", "sigma", "mu_bar", "sigma_bar", "cos_v",
                  "cos_u", "tau", "residual")
    limit_cols = ("lam", "alpha", "omega", "cos_v_limit", "cos_u_limit", "mu_star",
                  "sigma_star", "mu_bar_star", "sigma_bar_star", "converged", "iterations",
                  "residual")
    trace_rows, limit_rows = [], []
    for k, (lam, alpha, om) in enumerate((l, a, w) for l in o["lam"] for a in o["alpha"]
                                         for w in o["omega"]):
        cfg = SeConfig(lam=lam, alpha=alpha, omega=om, tau_policy=o["tau_policy"], tau=o["tau"],
                       T=o["T"], expectation=o["expectation"], mc_samples=o["mc_samples"],
                       seed=o["seed"] + k, allow_subcritical=o["allow_subcritical"])
        tr = se_run(cfg)
        for r in tr.rows:
            row = dict(vars(r), lam=lam, alpha=alpha, omega=om, residual=None)
            trace_rows.append(row)
        if trace_rows:
            trace_rows[-1]["residual"] = tr.residual
        mu, sigma, mu_bar, sigma_bar = tr.fixed_point
        limit_rows.append(dict(lam=lam, alpha=alpha, omega=om, cos_v_limit=tr.cos_v_limit,
                               cos_u_limit=tr.cos_u_limit, mu_star=mu, sigma_star=sigma,
                               mu_bar_star=mu_bar, sigma_bar_star=sigma_bar,
                               converged=int(tr.converged), iterations=len(tr.rows),
                               residual=tr.residual))
    _write_rows(o["output"], trace_cols, trace_rows)
    _write_rows(o["limits"], limit_cols, limit_rows)
    return EXIT_OK


def cmd_bench(o) -> int:
    Y = read_matrix_csv(o["input"], o["orientation"])
    ids, vals = read_vector_csv(o["truth"])
    if sorted(ids) != sorted(Y.sample_ids) or len(set(ids)) != len(ids):
        raise InputError("truth sample ids do not match the prediction matrix")
    pos = {sid: j for j, sid in enumerate(ids)}
    v = vals[[pos[sid] for sid in Y.sample_ids]]
    cv = CvConfig(K=o["folds"], seed=o["seed"], center=o["center"])
    reports, _ = benchmark(Y, v, omega=o["omega"], cv=cv, center=o["center"])
    out = o["outdir"]
    os.makedirs(out, exist_ok=True)
    rows = []
    for rep in reports:
        with open(os.path.join(out, "eval_%s.json" % rep.method), "w") as fh:
            fh.write(rep.to_json() + "\n")
        rows.append(dict(method=rep.method, cor_v=rep.cor_v, cos_v=rep.cos_v,
                         weight_concordance=rep.weight_concordance, model_id=None))
    best = reports[0]
    rows.append(dict(method="best_model", cor_v=best.best_model_cor, cos_v=None,
                     weight_concordance=None, model_id=best.best_model_id))
    _write_rows(os.path.join(out, "comparison.csv"),
                ("method", "cor_v", "cos_v", "weight_concordance", "model_id"), rows)
    return EXIT_OK


def cmd_generate(o) -> int:
    kw = {}
    if o["sigma_law"] is not None:
        kw["sigma_law"] = Law.parse(o["sigma_law"])
    cfg = SynthConfig(n=o["n"], d=o["d"], omega=o["omega"], noise_regime=o["regime"],
                      signal_norm=o["signal_norm"], seed=o["seed"], **kw)
    Y, truth = generate(cfg)
    out = o["outdir"]
    os.makedirs(out, exist_ok=True)
    write_matrix_csv(Y, os.path.join(out, "matrix.csv"))
    write_columns_csv(os.path.join(out, "truth.csv"), ("sample_id", "value"),
                      (Y.sample_ids, [float(x) for x in truth.v]))
    write_columns_csv(os.path.join(out, "truth_u.csv"), ("model_id", "value"),
                      (Y.model_ids, [float(x) for x in truth.u]))
    _write_json(os.path.join(out, "config.json"), config_dict(cfg))
    return EXIT_OK


COMMANDS = {"aggregate": cmd_aggregate, "simulate": cmd_simulate, "se": cmd_se,
            "bench": cmd_bench, "generate": cmd_generate}


def main(argv=None) -> int:
    ns = build_parser().parse_args(argv)
    try:
        opts = resolve_options(ns.command, ns)
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            return COMMANDS[ns.command](opts)
    except (InputError, ConfigError, OSError) as exc:
        print("error: %s" % _describe(exc), file=sys.stderr)
        return EXIT_INPUT
    except (UAggregationError, ValueError, ArithmeticError) as exc:
        print("error: %s" % _describe(exc), file=sys.stderr)
        return EXIT_PIPELINE


def _describe(exc) -> str:
    module = getattr(exc, "module", None)
    return "[%s] %s" % (module, exc) if module else str(exc)


if __name__ == "__main__":
    sys.exit(main())
