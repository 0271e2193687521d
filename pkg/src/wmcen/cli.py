"""Command-line front end: ``wmcen {fit,predict,cv,simulate,report}``."""

from __future__ import annotations

import argparse
import os
import sys

import numpy as np

from . import io
from .core import Dataset, Hyperparams, SolverConfig, WMCENError
from .simgen import SimulationSpec, default_study_grid, desk_study_grid, run_study
from .solver import fit, predict
from .tuning import TuningGrid, default_grid, grid_search


def _default_seed():
    return int(os.environ.get("WMCEN_SEED", "0"))


def _floats(text):
    return tuple(float(v) for v in text.split(",") if v.strip())


def _ints(text):
    return tuple(int(v) for v in text.split(",") if v.strip())


def _add_io(sp):
    sp.add_argument("--header", action="store_true", help="skip the first line of each CSV")
    sp.add_argument("--delimiter", default=",")


def _add_solver(sp):
    sp.add_argument("--tol", type=float, default=1e-6)
    sp.add_argument("--max-inner", type=int, default=500)
    sp.add_argument("--max-outer", type=int, default=100)
    sp.add_argument("--seed", type=int, default=_default_seed())


def _cfg(args):
    return SolverConfig(tol=args.tol, max_inner_iters=args.max_inner,
                        max_outer_iters=args.max_outer, seed=args.seed)


def build_parser():
    ap = argparse.ArgumentParser(prog="wmcen", description=__doc__)
    sub = ap.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("fit", help="fit a model and write it to a JSON model file")
    sp.add_argument("--x", required=True)
    sp.add_argument("--y", required=True)
    sp.add_argument("--lambda", dest="lam", type=float, required=True)
    sp.add_argument("--gamma", type=float, default=0.0)
    sp.add_argument("--k", type=int, default=1)
    sp.add_argument("--epsilon", type=float, default=1e-6)
    sp.add_argument("--out", required=True, help="model file to write")
    _add_solver(sp)
    _add_io(sp)

    sp = sub.add_parser("predict", help="apply a saved model to new covariates")
    sp.add_argument("--model", required=True)
    sp.add_argument("--x", required=True)
    sp.add_argument("--out", help="CSV for predictions (default stdout)")
    _add_io(sp)

    sp = sub.add_parser("cv", help="k-fold grid search over (lambda, gamma, k)")
    sp.add_argument("--x", required=True)
    sp.add_argument("--y", required=True)
    sp.add_argument("--lambdas", type=_floats, help="comma list; default scales by lambda_max")
    sp.add_argument("--gammas", type=_floats)
    sp.add_argument("--ks", type=_ints)
    sp.add_argument("--folds", type=int, default=5)
    sp.add_argument("--criterion", choices=("median-ape", "mean-squared"), default="median-ape")
    sp.add_argument("--epsilon", type=float, default=1e-6)
    sp.add_argument("--out", help="CSV for the full score table")
    _add_solver(sp)
    _add_io(sp)

    sp = sub.add_parser("simulate", help="run a replicated synthetic study")
    sp.add_argument("--p", type=int, default=12)
    sp.add_argument("--eta", type=float, default=0.25)
    sp.add_argument("--xi", type=float, default=0.02)
    sp.add_argument("--error", default="1", help="1-4 or normal|mixture|t4|cauchy")
    sp.add_argument("--reps", type=int, default=100)
    sp.add_argument("--method", choices=("wmcen", "wlasso", "both"), default="wmcen")
    sp.add_argument("--grid", choices=("desk", "full"), default="desk")
    sp.add_argument("--n-jobs", type=int, default=1)
    sp.add_argument("--out", required=True, help="CSV study table")
    sp.add_argument("--tol", type=float, default=1e-3)
    sp.add_argument("--max-inner", type=int, default=500)
    sp.add_argument("--max-outer", type=int, default=100)
    sp.add_argument("--seed", type=int, default=_default_seed())

    sp = sub.add_parser("report", help="summarize study tables as 'mean (sd)' cells")
    sp.add_argument("--in", dest="inputs", nargs="+", required=True)
    sp.add_argument("--plot", metavar="PREFIX", help="write box plots to PREFIX_<metric>.png")
    return ap


def _cmd_fit(args):
    x = io.load_csv(args.x, args.header, args.delimiter)
    y = io.load_csv(args.y, args.header, args.delimiter)
    hp = Hyperparams(args.lam, args.gamma, args.k, args.epsilon)
    res = fit(Dataset(x, y), hp, _cfg(args))
    io.save_model(args.out, res)
    print(f"objective {res.objective!r}  inner {res.inner_iters}  outer {res.outer_iters}  "
          f"converged {res.converged}")
    return 0


def _cmd_predict(args):
    model = io.load_model(args.model)
    x = io.load_csv(args.x, args.header, args.delimiter)
    pred = predict(model.b, model.intercepts, x)
    if args.out:
        io.save_csv(args.out, pred, args.delimiter)
    else:
        np.savetxt(sys.stdout, pred, delimiter=args.delimiter, fmt="%.17g")
    return 0


def _cmd_cv(args):
    x = io.load_csv(args.x, args.header, args.delimiter)
    y = io.load_csv(args.y, args.header, args.delimiter)
    d = Dataset(x, y)
    base = default_grid(d, folds=args.folds, criterion=args.criterion, seed=args.seed)
    grid = TuningGrid(args.lambdas or base.lambdas, args.gammas or base.gammas,
                      args.ks or base.ks, folds=args.folds, criterion=args.criterion,
                      seed=args.seed)
    hp, table = grid_search(d, grid, _cfg(args), epsilon=args.epsilon)
    if args.out:
        with open(args.out, "w") as fh:
            fh.write("lambda,gamma,k,score\n")
            for row in table:
                fh.write(f"{row['lam']!r},{row['gamma']!r},{row['k']},{row['score']!r}\n")
    print(f"lambda {hp.lam!r}  gamma {hp.gamma!r}  k {hp.k}")
    return 0


def _cmd_simulate(args):
    spec = SimulationSpec(args.p, args.eta, args.xi, args.error, reps=args.reps, seed=args.seed)
    cfg = SolverConfig(tol=args.tol, max_inner_iters=args.max_inner,
                       max_outer_iters=args.max_outer, seed=args.seed)
    methods = ("wmcen", "wlasso") if args.method == "both" else (args.method,)
    results = []
    for method in methods:
        grid = desk_study_grid(method) if args.grid == "desk" else default_study_grid(method)
        results.append(run_study(spec, grid, cfg, method=method, n_jobs=args.n_jobs))
    io.write_study_table(args.out, results)
    for res in results:
        m, sd = res.summary["median_ape"]
        print(f"{res.method}: median APE {io.format_cell(m, sd)} over {res.summary['n_ok']} reps")
    return 0


def _cmd_report(args):
    rows = []
    for path in args.inputs:
        rows.extend(io.read_study_table(path))
    print(io.render_report(rows))
    if args.plot:
        for path in io.plot_metric_distributions(rows, args.plot):
            print(f"wrote {path}")
    return 0


COMMANDS = {"fit": _cmd_fit, "predict": _cmd_predict, "cv": _cmd_cv,
            "simulate": _cmd_simulate, "report": _cmd_report}


def run_cli(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return COMMANDS[args.command](args)
    except (WMCENError, OSError) as exc:
        print(f"wmcen {args.command}: error: {exc}", file=sys.stderr)
        return 1


def main():
    sys.exit(run_cli())


if __name__ == "__main__":
    main()
