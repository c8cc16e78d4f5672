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
Model scoring, k-fold cross-validation, grid search and the three stage
training-testing-validation (TTV) pipeline:

    1. split the data 90/10 into train and test
    2. grid search every learner kind on train with k-fold CV
    3. refit the best (kind, hyperparameters) on all of train and score it
       on test, which stages 1 and 2 never touch
"""

import csv
import enum
import logging
import itertools
from dataclasses import dataclass, field, fields
from typing import Optional

import numpy as np
from joblib import Parallel, delayed

# local includes
import config
from debug import debug_timer
from errors import EvaluationError, ParameterError, UndefinedVarianceError
from dataset import Dataset, FoldAssignment, kfold, split_indices
from cart import TreeParams, RegressionTree, fit_tree
from ensemble import (
    GbrtModel,
    GbrtParams,
    RandomForestModel,
    RandomForestParams,
    fit_gbrt,
    fit_random_forest,
)


class LearnerKind(str, enum.Enum):
    DTR = "dtr"
    RF = "rf"
    GBRT = "gbrt"


PARAM_TYPES = {
    LearnerKind.DTR: TreeParams,
    LearnerKind.RF: RandomForestParams,
    LearnerKind.GBRT: GbrtParams,
}

# flat hyperparameter names accepted per learner, in echo order
PARAM_NAMES = {
    LearnerKind.DTR: ("max_depth", "max_leaf_nodes", "min_samples_leaf"),
    LearnerKind.RF: ("n_trees", "n_features", "max_depth", "max_leaf_nodes", "min_samples_leaf", "bootstrap", "seed"),
    LearnerKind.GBRT: ("learning_rate", "max_tree_depth", "n_trees", "subsample_fraction", "min_samples_leaf", "seed"),
}


@dataclass(frozen = True)
class LearnerSpec:
    kind: LearnerKind
    params: object

    def __post_init__(self):
        object.__setattr__(self, "kind", LearnerKind(self.kind))
        if not isinstance(self.params, PARAM_TYPES[self.kind]):
            raise ParameterError(f"{self.kind.value} needs {PARAM_TYPES[self.kind].__name__}, got {type(self.params).__name__}")


def spec_to_flat(spec: LearnerSpec) -> dict:
    """Hyperparameters of a spec under their flat names."""
    p = spec.params
    if spec.kind == LearnerKind.DTR:
        return {"max_depth": p.max_depth, "max_leaf_nodes": p.max_leaf_nodes, "min_samples_leaf": p.min_samples_leaf}
    if spec.kind == LearnerKind.RF:
        return {
            "n_trees": p.n_trees,
            "n_features": p.n_features,
            "max_depth": p.tree.max_depth,
            "max_leaf_nodes": p.tree.max_leaf_nodes,
            "min_samples_leaf": p.tree.min_samples_leaf,
            "bootstrap": p.bootstrap,
            "seed": p.seed,
        }
    return {f.name: getattr(p, f.name) for f in fields(p)}


def _params_from_flat(kind: LearnerKind, flat: dict):
    if kind == LearnerKind.DTR:
        return TreeParams(**flat)
    if kind == LearnerKind.RF:
        tree = TreeParams(flat.pop("max_depth"), flat.pop("max_leaf_nodes"), flat.pop("min_samples_leaf"))
        return RandomForestParams(tree = tree, **flat)
    return GbrtParams(**flat)


def default_spec(kind) -> LearnerSpec:
    """The tuned mean-Cp configuration of a learner kind."""
    kind = LearnerKind(kind)
    flat = spec_to_flat(LearnerSpec(kind, PARAM_TYPES[kind]()))
    flat.update(config.preset("mean_cp", kind.value))
    return LearnerSpec(kind, _params_from_flat(kind, flat))


def build_spec(kind, overrides: dict = None, seed: Optional[int] = None, base: LearnerSpec = None) -> LearnerSpec:
    """
    Spec of the given kind: base (or the default spec) with flat-named
    overrides applied. seed, when given, sets the learner seed unless the
    overrides name one.
    """

    kind = LearnerKind(kind)
    base = base if base is not None else default_spec(kind)
    if base.kind != kind:
        raise ParameterError(f"Base spec is {base.kind.value}, expected {kind.value}.")
    flat = spec_to_flat(base)
    overrides = dict(overrides or {})
    unknown = set(overrides) - set(PARAM_NAMES[kind])
    if unknown:
        raise ParameterError(f"{kind.value} does not take {', '.join(sorted(unknown))}")
    if seed is not None and "seed" in flat and "seed" not in overrides:
        overrides["seed"] = seed
    flat.update(overrides)
    return LearnerSpec(kind, _params_from_flat(kind, flat))


def spec_to_dict(spec: LearnerSpec) -> dict:
    return {"kind": spec.kind.value, "params": spec_to_flat(spec)}


def spec_from_dict(data: dict) -> LearnerSpec:
    kind = LearnerKind(data["kind"])
    return LearnerSpec(kind, _params_from_flat(kind, dict(data["params"])))


def fit_learner(spec: LearnerSpec, ds: Dataset, n_jobs: int = 1):
    if spec.kind == LearnerKind.DTR:
        return fit_tree(ds, spec.params)
    if spec.kind == LearnerKind.RF:
        return fit_random_forest(ds, spec.params, n_jobs = n_jobs)
    return fit_gbrt(ds, spec.params)


def predict_model(model, x: np.ndarray) -> np.ndarray:
    """Predictions of any fitted learner on an (n, 3) feature matrix."""
    if not isinstance(model, (RegressionTree, RandomForestModel, GbrtModel)):
        raise ParameterError(f"Not a fitted model: {type(model).__name__}")
    return model.predict(x)


### Metrics
def _paired(predictions, truths, min_len: int) -> tuple:
    p = np.asarray(predictions, dtype = np.float64).reshape(-1)
    t = np.asarray(truths, dtype = np.float64).reshape(-1)
    if len(p) != len(t):
        raise ParameterError(f"Length mismatch: {len(p)} predictions, {len(t)} truths.")
    if len(p) < min_len:
        raise ParameterError(f"Need at least {min_len} prediction/truth pairs, got {len(p)}.")
    return p, t


def mse(predictions, truths) -> float:
    p, t = _paired(predictions, truths, 1)
    return float(np.mean((p - t) ** 2))


def r2_score(predictions, truths) -> float:
    """1 - SSE/SST about the mean of the truths."""
    p, t = _paired(predictions, truths, 2)
    sst = float(np.sum((t - t.mean()) ** 2))
    if sst == 0:
        raise UndefinedVarianceError("R2 is undefined when every truth is identical.")
    return 1.0 - float(np.sum((p - t) ** 2)) / sst


def score_model(model, ds: Dataset) -> tuple:
    """(MSE, R2) of a model on a labeled dataset. R2 is nan where undefined."""
    pred = predict_model(model, ds.features())
    try:
        r2 = r2_score(pred, ds.target)
    except ParameterError:
        r2 = float("nan")
    return mse(pred, ds.target), r2


def staged_mse(model: GbrtModel, ds: Dataset) -> list:
    """MSE on ds after each boosting stage, stage 0 being the base prediction."""
    return [mse(pred, ds.target) for pred in model.staged_predict(ds.features())]


### Cross-validation
@dataclass(frozen = True)
class CvReport:
    per_fold_mse: tuple
    mean_mse: float
    std_mse: float

    @classmethod
    def from_folds(cls, values) -> "CvReport":
        v = np.asarray(values, dtype = np.float64)
        return cls(tuple(float(e) for e in v), float(np.mean(v)), float(np.std(v)))


def _score_fold(spec: LearnerSpec, ds: Dataset, folds: FoldAssignment, fold: int, tag: str = "") -> float:
    try:
        train = ds.subset(folds.train_indices(fold))
        held_out = ds.subset(folds.fold_indices(fold))
        model = fit_learner(spec, train)
        return mse(predict_model(model, held_out.features()), held_out.target)
    except Exception as e:
        raise EvaluationError(f"{tag}fold {fold}: {e}") from e


def cross_validate_folds(spec: LearnerSpec, ds: Dataset, folds: FoldAssignment, n_jobs: int = 1) -> CvReport:
    """CV over a precomputed fold assignment: fit on the complement, score on the fold."""
    if len(folds.membership) != len(ds):
        raise ParameterError("Fold assignment does not match the dataset size.")
    scores = Parallel(n_jobs = n_jobs)(
        delayed(_score_fold)(spec, ds, folds, i) for i in range(folds.k)
    )
    return CvReport.from_folds(scores)


@debug_timer
def cross_validate(spec: LearnerSpec, ds: Dataset, k: int, seed: int, n_jobs: int = 1) -> CvReport:
    report = cross_validate_folds(spec, ds, kfold(ds, k, seed), n_jobs)
    logging.info(f"CV {spec.kind.value} k={k}: mean MSE {report.mean_mse:.6g} (std {report.std_mse:.3g})")
    return report


### Grid search
@dataclass(frozen = True)
class SweepCell:
    point: dict
    spec: LearnerSpec
    report: CvReport


@dataclass(frozen = True)
class SweepSurface:
    kind: LearnerKind
    axes: tuple
    cells: tuple
    best_index: int

    @property
    def axis_names(self) -> tuple:
        return tuple(name for name, _ in self.axes)

    @property
    def best(self) -> SweepCell:
        return self.cells[self.best_index]


def _argmin_first(values) -> int:
    best = 0
    for i, v in enumerate(values):
        if v < values[best]:
            best = i
    return best


@debug_timer
def grid_search(kind, grid: dict, ds: Dataset, k: int, seed: int, n_jobs: int = 1,
                base: LearnerSpec = None) -> SweepSurface:
    """
    Cross-validate every cell of the Cartesian grid {axis: values}. All cells
    share one fold assignment. Cells are iterated with the last axis varying
    fastest, and the first cell with the lowest mean CV MSE is best.
    """

    kind = LearnerKind(kind)
    if not grid:
        raise ParameterError("Grid must have at least one axis.")
    axes = tuple((name, tuple(values)) for name, values in grid.items())
    if any(len(values) == 0 for _, values in axes):
        raise ParameterError(f"Every grid axis needs at least one value. {dict(axes)}")
    names = [name for name, _ in axes]
    points = [dict(zip(names, combo)) for combo in itertools.product(*(v for _, v in axes))]
    specs = []
    for point in points:
        try:
            specs.append(build_spec(kind, point, seed = seed, base = base))
        except ParameterError as e:
            raise EvaluationError(f"grid cell {point}: {e}") from e

    folds = kfold(ds, k, seed)
    logging.info(f"Grid search {kind.value}: {len(points)} cells x {k} folds on {len(ds)} samples")
    tasks = [(c, i) for c in range(len(specs)) for i in range(k)]
    scores = Parallel(n_jobs = n_jobs)(
        delayed(_score_fold)(specs[c], ds, folds, i, f"grid cell {points[c]} ") for c, i in tasks
    )
    cells = tuple(
        SweepCell(points[c], specs[c], CvReport.from_folds(scores[c * k:(c + 1) * k]))
        for c in range(len(specs))
    )
    best = _argmin_first([cell.report.mean_mse for cell in cells])
    logging.info(f"Best {kind.value} cell {cells[best].point}: mean MSE {cells[best].report.mean_mse:.6g}")
    return SweepSurface(kind, axes, cells, best)


### Train-test-validate
@dataclass(frozen = True, eq = False)
class TtvResult:
    chosen: LearnerSpec
    model: object
    test_mse: float
    test_r2: float
    surfaces: dict
    train_indices: np.ndarray
    test_indices: np.ndarray
    comparison: dict = field(default_factory = dict)

    @property
    def cv_mse(self) -> float:
        return self.surfaces[self.chosen.kind].best.report.mean_mse


@debug_timer
def run_ttv(ds: Dataset, grids: dict, seed: int, k: int = 10, test_fraction: float = 0.1,
            n_jobs: int = 1, compare_all: bool = False) -> TtvResult:
    """
    Three stage evaluation. grids maps learner kind to a grid_search grid;
    ties between kinds go to the first kind in grids. With compare_all, the
    best cell of every kind is also refit and scored on test (reported in
    comparison as {kind: {"cv_mse", "test_mse", "test_r2"}}).
    """

    if not grids:
        raise ParameterError("run_ttv needs at least one learner grid.")
    train_idx, test_idx = split_indices(len(ds), test_fraction, seed)
    train, test = ds.subset(train_idx), ds.subset(test_idx)
    logging.info(f"TTV stage 1: {len(train)} train / {len(test)} test samples")

    surfaces = {}
    for kind, grid in grids.items():
        kind = LearnerKind(kind)
        surfaces[kind] = grid_search(kind, grid, train, k, seed, n_jobs)
    kinds = list(surfaces)
    chosen_kind = kinds[_argmin_first([surfaces[kd].best.report.mean_mse for kd in kinds])]
    logging.info(f"TTV stage 2: chose {chosen_kind.value}")

    comparison = {}
    chosen_model, test_mse, test_r2 = None, None, None
    for kind in kinds:
        if kind != chosen_kind and not compare_all:
            continue
        spec = surfaces[kind].best.spec
        model = fit_learner(spec, train, n_jobs)
        pred = predict_model(model, test.features())
        scores = {
            "cv_mse": surfaces[kind].best.report.mean_mse,
            "test_mse": mse(pred, test.target),
            "test_r2": r2_score(pred, test.target),
        }
        if kind == chosen_kind:
            chosen_model, test_mse, test_r2 = model, scores["test_mse"], scores["test_r2"]
        if compare_all:
            comparison[kind] = scores
    logging.info(f"TTV stage 3: test MSE {test_mse:.6g}, R2 {test_r2:.4f}")
    return TtvResult(surfaces[chosen_kind].best.spec, chosen_model, test_mse, test_r2,
                     surfaces, train_idx, test_idx, comparison)


### Report files
def format_value(v) -> str:
    if v is None:
        return "none"
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return str(v)


def _writer(f):
    return csv.writer(f, lineterminator = "\n")


def write_cv_csv(report: CvReport, path: str) -> None:
    with open(path, "w", newline = "") as f:
        w = _writer(f)
        w.writerow(["fold", "mse"])
        for i, v in enumerate(report.per_fold_mse):
            w.writerow([i, format_value(v)])


def write_sweep_csv(surface: SweepSurface, path: str) -> None:
    """Long format: one row per cell, axis values then mean_mse,std_mse."""
    with open(path, "w", newline = "") as f:
        w = _writer(f)
        w.writerow(list(surface.axis_names) + ["mean_mse", "std_mse"])
        for cell in surface.cells:
            w.writerow([format_value(cell.point[n]) for n in surface.axis_names]
                       + [format_value(cell.report.mean_mse), format_value(cell.report.std_mse)])


def write_predictions_csv(ds: Dataset, predictions, path: str) -> None:
    with open(path, "w", newline = "") as f:
        w = _writer(f)
        w.writerow(["re", "ti", "theta", "cp", "cp_hat"])
        for row in zip(ds.re, ds.ti, ds.theta, ds.target, predictions):
            w.writerow([format_value(float(v)) for v in row])
