#!/usr/bin/python3
#
#           Cp Surrogate
#
#  This program is free software; you can redistribute it and/or modify
#  it under the terms of the GNU General Public License as published by
#  the Free Software Foundation; either version 2 of the License, or
#  (at your option) any later version.
#
#  This program is distributed in the hope that it will be useful,
#  but WITHOUT ANY WARRANTY; without even the implied warranty of
#  MERCHANTABILITY or FITNESS FOR A PARTICULAR PURPOSE.  See the
#  GNU General Public License for more details.
#
#  You should have received a copy of the GNU General Public License
#  along with this program; if not, write to the Free Software
#  Foundation, Inc., 51 Franklin Street, Fifth Floor, Boston,
#  MA 02110-1301, USA.

"""
Command line surface:

    train     fit a learner on a dataset CSV and write a model file
    predict   predict cp for a query CSV of re,ti,theta
    curve     predict the cp(theta) curve at a given (re, ti)
    evaluate  score a model file on a labeled dataset
    show      print the top of a fitted tree
    cv        k-fold cross-validation of one learner
    sweep     grid search of one learner
    ttv       train-testing-validation over all learner kinds
    synth     write a synthetic dataset from the reference oracle

Summaries are single key=value lines on stdout. Logging goes to stderr or
--log-file. The exit status is 0 on success and 1 on any reported error.
"""

import sys
import math
import argparse
import logging
import csv
from contextlib import nullcontext

# local includes
import config
import log_system
from dataset import TargetKind, check_domain, feature_matrix, load_csv, load_query_csv, write_csv
from errors import ParameterError
from cart import RegressionTree, export_text
from ensemble import GbrtModel
from evaluation import (
    LearnerKind,
    build_spec,
    cross_validate,
    fit_learner,
    format_value,
    grid_search,
    predict_model,
    run_ttv,
    score_model,
    spec_to_flat,
    staged_mse,
    write_cv_csv,
    write_predictions_csv,
    write_sweep_csv,
)

from model_file import ModelFile, load_model, save_model
from synthetic import RE_WINDOW, TI_WINDOW, generate_dataset

VERSION = "1.0.0"
LOG_LEVEL = logging.WARNING

# learner flag -> flat hyperparameter name
HYPERPARAMETER_FLAGS = {
    "max_depth": "max_depth",
    "max_leaves": "max_leaf_nodes",
    "min_leaf": "min_samples_leaf",
    "trees": "n_trees",
    "features": "n_features",
    "bootstrap": "bootstrap",
    "lr": "learning_rate",
    "depth": "max_tree_depth",
    "subsample": "subsample_fraction",
}


def summary(command: str, **fields) -> None:
    """Print one machine readable key=value line."""
    parts = [command] + [f"{k}={format_value(v)}" for k, v in fields.items()]
    print(" ".join(parts))


def _csv_out(path: str):
    """Open --out for writing, or stdout when no path was given."""
    if path:
        return open(path, "w", newline = "")
    return nullcontext(sys.stdout)


def spec_from_args(args, kind: LearnerKind):
    overrides = {}
    if getattr(args, "preset", None):
        overrides.update(config.preset(args.preset, kind.value))
    for flag, name in HYPERPARAMETER_FLAGS.items():
        value = getattr(args, flag, None)
        if value is not None:
            overrides[name] = value
    return build_spec(kind, overrides, seed = args.seed)


def grids_from_args(args, kinds) -> dict:
    grids = config.load_grids(args.grid)
    axes = dict(config.parse_axis(a) for a in (args.axis or []))
    selected = {}
    for kind in kinds:
        grid = dict(grids.get(kind.value, {}))
        if axes:
            grid = axes if len(kinds) == 1 else {**grid, **axes}
        if not grid:
            raise ParameterError(f"No grid for learner {kind.value}.")
        selected[kind] = grid
    return selected


### Commands
def cmd_train(args) -> int:
    ds = load_csv(args.data, TargetKind(args.target))
    kind = LearnerKind(args.learner)
    spec = spec_from_args(args, kind)
    logging.info(f"Training {kind.value}: {spec_to_flat(spec)}")
    model = fit_learner(spec, ds, n_jobs = args.jobs)
    metadata = {"dataset_sha256": ds.digest(), "n_samples": len(ds), "seed": args.seed, "version": VERSION}
    save_model(ModelFile(ds.target_kind, spec, model, metadata), args.out)
    train_mse, train_r2 = score_model(model, ds)
    summary("train", learner = kind.value, n = len(ds), mse = train_mse, r2 = train_r2, out = args.out)
    return 0


def cmd_predict(args) -> int:
    mf = load_model(args.model)
    queries = load_query_csv(args.queries)
    pred = predict_model(mf.model, feature_matrix(queries[:, 0], queries[:, 1], queries[:, 2]))
    with _csv_out(args.out) as f:
        w = csv.writer(f, lineterminator = "\n")
        w.writerow(["re", "ti", "theta", "cp_hat"])
        for (re, ti, theta), cp in zip(queries, pred):
            w.writerow([format_value(float(re)), format_value(float(ti)), format_value(float(theta)), format_value(float(cp))])
    logging.info(f"Predicted {len(queries)} rows")
    return 0


def curve_angles(step: float) -> list:
    """0, step, 2 step, ... closed at 180: ceil(180 / step) + 1 angles."""
    if not (step > 0 and math.isfinite(step)):
        raise ParameterError(f"theta step must be positive. {step}")
    n = math.ceil(180.0 / step - 1e-9)
    return [min(i * step, 180.0) for i in range(n + 1)]


def cmd_curve(args) -> int:
    check_domain(args.re, args.ti, 0.0)
    mf = load_model(args.model)
    thetas = curve_angles(args.step)
    n = len(thetas)
    pred = predict_model(mf.model, feature_matrix([args.re] * n, [args.ti] * n, thetas))
    with _csv_out(args.out) as f:
        w = csv.writer(f, lineterminator = "\n")
        w.writerow(["theta", "cp_hat"])
        for theta, cp in zip(thetas, pred):
            w.writerow([format_value(float(theta)), format_value(float(cp))])
    return 0


def cmd_evaluate(args) -> int:
    mf = load_model(args.model)
    ds = load_csv(args.data, mf.target_kind)
    model_mse, model_r2 = score_model(mf.model, ds)
    if args.out:
        write_predictions_csv(ds, predict_model(mf.model, ds.features()), args.out)
    if args.staged:
        if not isinstance(mf.model, GbrtModel):
            raise ParameterError("--staged needs a gbrt model.")
        with open(args.staged, "w", newline = "") as f:
            w = csv.writer(f, lineterminator = "\n")
            w.writerow(["stage", "mse"])
            for stage, value in enumerate(staged_mse(mf.model, ds)):
                w.writerow([stage, format_value(value)])
    summary("evaluate", learner = mf.spec.kind.value, n = len(ds), mse = model_mse, r2 = model_r2)
    return 0


def cmd_show(args) -> int:
    mf = load_model(args.model)
    if isinstance(mf.model, RegressionTree):
        trees = [mf.model]
    else:
        trees = list(mf.model.trees)
    if not (0 <= args.tree < len(trees)):
        raise ParameterError(f"Tree index {args.tree} out of range (model has {len(trees)}).")
    tree = trees[args.tree]
    print(export_text(tree, max_depth = args.depth))
    summary("show", learner = mf.spec.kind.value, tree = args.tree, nodes = tree.n_nodes,
            leaves = tree.n_leaves, depth = tree.depth)
    return 0


def cmd_cv(args) -> int:
    ds = load_csv(args.data, TargetKind(args.target))
    kind = LearnerKind(args.learner)
    spec = spec_from_args(args, kind)
    report = cross_validate(spec, ds, args.k, args.seed, n_jobs = args.jobs)
    if args.out:
        write_cv_csv(report, args.out)
    else:
        for i, v in enumerate(report.per_fold_mse):
            summary("fold", index = i, mse = v)
    summary("cv", learner = kind.value, k = args.k, mean_mse = report.mean_mse, std_mse = report.std_mse)
    return 0


def cmd_sweep(args) -> int:
    ds = load_csv(args.data, TargetKind(args.target))
    kind = LearnerKind(args.learner)
    grid = grids_from_args(args, [kind])[kind]
    surface = grid_search(kind, grid, ds, args.k, args.seed, n_jobs = args.jobs)
    write_sweep_csv(surface, args.out)
    best = ";".join(f"{k}={format_value(v)}" for k, v in surface.best.point.items())
    summary("sweep", learner = kind.value, cells = len(surface.cells), best = best,
            mean_mse = surface.best.report.mean_mse, std_mse = surface.best.report.std_mse)
    return 0


def cmd_ttv(args) -> int:
    ds = load_csv(args.data, TargetKind(args.target))
    kinds = [LearnerKind(k) for k in args.learners.split(",")]
    grids = grids_from_args(args, kinds)
    result = run_ttv(ds, grids, args.seed, k = args.k, test_fraction = args.test_fraction,
                     n_jobs = args.jobs, compare_all = args.compare_all)
    if args.out:
        with open(args.out, "w", newline = "") as f:
            w = csv.writer(f, lineterminator = "\n")
            w.writerow(["learner", "best_params", "cv_mean_mse", "cv_std_mse", "test_mse", "test_r2", "chosen"])
            for kind, surface in result.surfaces.items():
                scores = result.comparison.get(kind, {})
                if kind == result.chosen.kind:
                    scores = {"test_mse": result.test_mse, "test_r2": result.test_r2}
                params = ";".join(f"{k}={format_value(v)}" for k, v in surface.best.point.items())
                w.writerow([kind.value, params, format_value(surface.best.report.mean_mse),
                            format_value(surface.best.report.std_mse),
                            format_value(scores.get("test_mse")), format_value(scores.get("test_r2")),
                            format_value(kind == result.chosen.kind)])
    if args.model_out:
        metadata = {"dataset_sha256": ds.digest(), "n_samples": len(result.train_indices),
                    "seed": args.seed, "version": VERSION}
        save_model(ModelFile(ds.target_kind, result.chosen, result.model, metadata), args.model_out)
    summary("ttv", chosen = result.chosen.kind.value, cv_mse = result.cv_mse,
            test_mse = result.test_mse, test_r2 = result.test_r2,
            train = len(result.train_indices), test = len(result.test_indices))
    return 0


def cmd_synth(args) -> int:
    ds = generate_dataset(args.n, (args.re_min, args.re_max), (args.ti_min, args.ti_max),
                          args.noise, TargetKind(args.target), args.seed)
    write_csv(ds, args.out)
    summary("synth", n = len(ds), target = ds.target_kind.value, out = args.out)
    return 0


### Argument parsing
def _add_hyperparameter_flags(p) -> None:
    g = p.add_argument_group("learner hyperparameters")
    g.add_argument("--learner", choices = [k.value for k in LearnerKind], required = True)
    g.add_argument("--preset", choices = [t.value for t in TargetKind],
                   help = "start from the tuned values for this target kind")
    g.add_argument("--max-depth", dest = "max_depth", type = int, help = "dtr/rf: max_depth")
    g.add_argument("--max-leaves", dest = "max_leaves", type = int, help = "dtr/rf: max_leaf_nodes")
    g.add_argument("--min-leaf", dest = "min_leaf", type = int, help = "min_samples_leaf")
    g.add_argument("--trees", type = int, help = "rf: n_trees, gbrt: Nt")
    g.add_argument("--features", type = int, help = "rf: features drawn per node")
    g.add_argument("--no-bootstrap", dest = "bootstrap", action = "store_const", const = False,
                   help = "rf: fit every tree on the full dataset")
    g.add_argument("--lr", type = float, help = "gbrt: learning rate")
    g.add_argument("--depth", type = int, help = "gbrt: max tree depth")
    g.add_argument("--subsample", type = float, help = "gbrt: subsampling fraction")


def _add_data_flags(p, seed_required: bool = True) -> None:
    p.add_argument("--data", required = True, help = "dataset CSV (re,ti,theta,cp)")
    p.add_argument("--target", choices = [t.value for t in TargetKind], default = TargetKind.MEAN_CP.value)
    p.add_argument("--seed", type = int, required = seed_required)


def _add_grid_flags(p) -> None:
    p.add_argument("--grid", help = "JSON grid file {learner: {axis: [values]}}")
    p.add_argument("--axis", action = "append", metavar = "NAME=V1,V2",
                   help = "grid axis, may be repeated; replaces the file grid")


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help = False)
    common.add_argument("--log-file", dest = "log_file")
    common.add_argument("--log-level", dest = "log_level", default = logging.getLevelName(LOG_LEVEL),
                        choices = ["DEBUG", "INFO", "WARNING", "ERROR"])
    common.add_argument("--jobs", type = int, default = 1, help = "parallel workers (results do not depend on it)")

    parser = argparse.ArgumentParser(prog = "cp-surrogate", description = "Tree ensemble surrogate for cylinder pressure coefficients.")
    parser.add_argument("--version", action = "version", version = VERSION)
    sub = parser.add_subparsers(dest = "command", required = True)

    p = sub.add_parser("train", parents = [common], help = "fit a model")
    _add_data_flags(p)
    _add_hyperparameter_flags(p)
    p.add_argument("--out", required = True, help = "model file to write")
    p.set_defaults(func = cmd_train)

    p = sub.add_parser("predict", parents = [common], help = "predict a query CSV")
    p.add_argument("--model", required = True)
    p.add_argument("--queries", required = True, help = "query CSV (re,ti,theta)")
    p.add_argument("--out")
    p.set_defaults(func = cmd_predict)

    p = sub.add_parser("curve", parents = [common], help = "cp over theta at fixed re, ti")
    p.add_argument("--model", required = True)
    p.add_argument("--re", type = float, required = True)
    p.add_argument("--ti", type = float, required = True)
    p.add_argument("--step", type = float, default = 1.0, help = "theta step in degrees")
    p.add_argument("--out")
    p.set_defaults(func = cmd_curve)

    p = sub.add_parser("evaluate", parents = [common], help = "score a model on labeled data")
    p.add_argument("--model", required = True)
    p.add_argument("--data", required = True)
    p.add_argument("--out", help = "per-row predictions CSV")
    p.add_argument("--staged", help = "gbrt only: stage,mse CSV")
    p.set_defaults(func = cmd_evaluate)

    p = sub.add_parser("show", parents = [common], help = "print a fitted tree")
    p.add_argument("--model", required = True)
    p.add_argument("--tree", type = int, default = 0, help = "ensemble member index")
    p.add_argument("--depth", type = int, default = 3)
    p.set_defaults(func = cmd_show)

    p = sub.add_parser("cv", parents = [common], help = "k-fold cross-validation")
    _add_data_flags(p)
    _add_hyperparameter_flags(p)
    p.add_argument("--k", type = int, default = 10)
    p.add_argument("--out", help = "fold,mse CSV")
    p.set_defaults(func = cmd_cv)

    p = sub.add_parser("sweep", parents = [common], help = "grid search one learner")
    _add_data_flags(p)
    p.add_argument("--learner", choices = [k.value for k in LearnerKind], required = True)
    _add_grid_flags(p)
    p.add_argument("--k", type = int, default = 10)
    p.add_argument("--out", required = True, help = "sweep CSV")
    p.set_defaults(func = cmd_sweep)

    p = sub.add_parser("ttv", parents = [common], help = "training-testing-validation")
    _add_data_flags(p)
    p.add_argument("--learners", default = "dtr,rf,gbrt")
    _add_grid_flags(p)
    p.add_argument("--k", type = int, default = 10)
    p.add_argument("--test-fraction", dest = "test_fraction", type = float, default = 0.1)
    p.add_argument("--compare-all", dest = "compare_all", action = "store_true",
                   help = "refit and test the best cell of every learner")
    p.add_argument("--out", help = "per-learner report CSV")
    p.add_argument("--model-out", dest = "model_out", help = "write the chosen model")
    p.set_defaults(func = cmd_ttv)

    p = sub.add_parser("synth", parents = [common], help = "write a synthetic dataset")
    p.add_argument("--n", type = int, required = True)
    p.add_argument("--re-min", dest = "re_min", type = float, default = RE_WINDOW[0])
    p.add_argument("--re-max", dest = "re_max", type = float, default = RE_WINDOW[1])
    p.add_argument("--ti-min", dest = "ti_min", type = float, default = TI_WINDOW[0])
    p.add_argument("--ti-max", dest = "ti_max", type = float, default = TI_WINDOW[1])
    p.add_argument("--noise", type = float, default = 0.0, help = "gaussian noise sd")
    p.add_argument("--target", choices = [t.value for t in TargetKind], default = TargetKind.MEAN_CP.value)
    p.add_argument("--seed", type = int, required = True)
    p.add_argument("--out", required = True)
    p.set_defaults(func = cmd_synth)
    return parser


def main(argv = None) -> int:
    args = build_parser().parse_args(argv)
    log_system.init_logging(getattr(logging, args.log_level), args.log_file, VERSION)
    try:
        return args.func(args)
    except (ValueError, OSError, RuntimeError) as e:
        logging.error(f"{args.command} failed: {e}")
        print(f"error: {e}", file = sys.stderr)
        return 1


if __name__ == '__main__':
    sys.exit(main())
