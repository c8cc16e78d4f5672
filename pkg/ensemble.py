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
Tree ensembles built on cart: random forests (bootstrap aggregation with
per-node feature sampling) and stochastic gradient boosting under squared
error loss.
"""

import math
import logging
from dataclasses import dataclass, field, replace
from fractions import Fraction
from typing import Iterator

import numpy as np
from joblib import Parallel, delayed

# local includes
from debug import debug_timer
from errors import ParameterError
from seeding import derive_rng, derive_seed
from dataset import Dataset, FeatureVector, N_FEATURES
from cart import TreeParams, RegressionTree, grow_tree, check_int


def _as_row(x) -> np.ndarray:
    if isinstance(x, FeatureVector):
        return x.as_array().reshape(1, -1)
    return np.asarray(x, dtype = np.float64).reshape(1, -1)


### Random forest
@dataclass(frozen = True)
class RandomForestParams:
    n_trees: int = 150
    n_features: int = 1
    tree: TreeParams = field(default_factory = lambda: TreeParams(max_depth = 20))
    bootstrap: bool = True
    seed: int = 0

    def __post_init__(self):
        check_int("n_trees", self.n_trees, 1)
        check_int("n_features", self.n_features, 1)
        if self.n_features > N_FEATURES:
            raise ParameterError(f"n_features can't exceed {N_FEATURES}. {self.n_features}")
        if not isinstance(self.tree, TreeParams):
            raise ParameterError(f"tree must be TreeParams. {self.tree!r}")
        if not isinstance(self.bootstrap, bool):
            raise ParameterError(f"bootstrap must be a flag. {self.bootstrap!r}")
        check_int("seed", self.seed, 0)


@dataclass(frozen = True, eq = False)
class RandomForestModel:
    trees: tuple
    params: RandomForestParams

    def __post_init__(self):
        object.__setattr__(self, "trees", tuple(self.trees))
        if len(self.trees) != self.params.n_trees:
            raise ParameterError(f"Forest holds {len(self.trees)} trees, params say {self.params.n_trees}.")

    def member_predictions(self, x: np.ndarray) -> np.ndarray:
        """(n_trees, n) matrix of member tree predictions."""
        return np.stack([t.predict(x) for t in self.trees])

    def predict(self, x: np.ndarray) -> np.ndarray:
        return np.mean(self.member_predictions(x), axis = 0)


def bootstrap_indices(n: int, seed: int) -> np.ndarray:
    if n <= 0:
        raise ParameterError("Cannot bootstrap an empty dataset.")
    return derive_rng(seed, "bootstrap").integers(0, n, n)


def bootstrap_sample(ds: Dataset, seed: int) -> Dataset:
    """n draws with replacement, uniform over the samples of ds."""
    return ds.subset(bootstrap_indices(len(ds), seed))


def _fit_member(x: np.ndarray, y: np.ndarray, params: RandomForestParams, i: int) -> RegressionTree:
    if params.bootstrap:
        rows = bootstrap_indices(len(y), derive_seed(params.seed, "bootstrap", i))
        x, y = x[rows], y[rows]
    return grow_tree(x, y, params.tree, params.n_features, derive_seed(params.seed, "tree", i))


@debug_timer
def fit_random_forest(ds: Dataset, params: RandomForestParams, n_jobs: int = 1) -> RandomForestModel:
    """
    Tree i sees bootstrap_sample(ds, derive_seed(seed, "bootstrap", i)) when
    bootstrapping, else all of ds, and samples n_features candidate features
    per node from its own seed. Members are independent, so n_jobs changes
    wall time only.
    """

    if len(ds) == 0:
        raise ParameterError("Cannot fit a forest on an empty dataset.")
    x = ds.features()
    y = ds.target
    logging.debug(f"Fitting forest: {params.n_trees} trees on {len(ds)} samples, n_jobs={n_jobs}")
    trees = Parallel(n_jobs = n_jobs)(
        delayed(_fit_member)(x, y, params, i) for i in range(params.n_trees)
    )
    return RandomForestModel(tuple(trees), params)


def predict_forest(model: RandomForestModel, x) -> float:
    return float(model.predict(_as_row(x))[0])


### Gradient boosting
@dataclass(frozen = True)
class GbrtParams:
    learning_rate: float = 0.01
    max_tree_depth: int = 8
    n_trees: int = 5000
    subsample_fraction: float = 0.3
    min_samples_leaf: int = 1
    seed: int = 0

    def __post_init__(self):
        if not (0 < self.learning_rate <= 1):
            raise ParameterError(f"learning_rate must be within (0, 1]. {self.learning_rate}")
        check_int("max_tree_depth", self.max_tree_depth, 1)
        check_int("n_trees", self.n_trees, 0)
        if not (0 < self.subsample_fraction <= 1):
            raise ParameterError(f"subsample_fraction must be within (0, 1]. {self.subsample_fraction}")
        check_int("min_samples_leaf", self.min_samples_leaf, 1)
        check_int("seed", self.seed, 0)

    @property
    def tree(self) -> TreeParams:
        return TreeParams(max_depth = self.max_tree_depth, min_samples_leaf = self.min_samples_leaf)


@dataclass(frozen = True, eq = False)
class GbrtModel:
    """Prediction is base_prediction + learning_rate * sum of tree outputs."""

    base_prediction: float
    trees: tuple
    learning_rate: float
    params: GbrtParams = None

    def __post_init__(self):
        object.__setattr__(self, "trees", tuple(self.trees))
        object.__setattr__(self, "base_prediction", float(self.base_prediction))
        object.__setattr__(self, "learning_rate", float(self.learning_rate))
        if self.params is not None and len(self.trees) != self.params.n_trees:
            raise ParameterError(f"Model holds {len(self.trees)} trees, params say {self.params.n_trees}.")

    def staged_predict(self, x: np.ndarray) -> Iterator[np.ndarray]:
        """Predictions after 0, 1, ..., n_trees stages."""
        x = np.atleast_2d(np.asarray(x, dtype = np.float64))
        pred = np.full(len(x), self.base_prediction)
        yield pred.copy()
        for tree in self.trees:
            pred += self.learning_rate * tree.predict(x)
            yield pred.copy()

    def predict(self, x: np.ndarray) -> np.ndarray:
        x = np.atleast_2d(np.asarray(x, dtype = np.float64))
        pred = np.full(len(x), self.base_prediction)
        for tree in self.trees:
            pred += self.learning_rate * tree.predict(x)
        return pred

    def truncate(self, n_stages: int) -> "GbrtModel":
        """The model as it stood after the first n_stages stages."""
        check_int("n_stages", n_stages, 0)
        params = replace(self.params, n_trees = min(n_stages, len(self.trees))) if self.params else None
        return GbrtModel(self.base_prediction, self.trees[:n_stages], self.learning_rate, params)


def subsample_size(fraction: float, n: int) -> int:
    """floor(fraction * n) taken on the decimal value of fraction, at least 1."""
    return max(1, math.floor(Fraction(repr(float(fraction))) * n))


@debug_timer
def fit_gbrt(ds: Dataset, params: GbrtParams) -> GbrtModel:
    """
    Stochastic gradient boosting. F0 is the mean target. Stage m draws
    floor(Fs * n) rows without replacement, fits a depth-limited tree to the
    current residuals on them and adds learning_rate times its output.
    Stages are inherently sequential.
    """

    n = len(ds)
    if n == 0:
        raise ParameterError("Cannot fit a boosting model on an empty dataset.")
    x = ds.features()
    y = ds.target
    base = float(np.mean(y))
    current = np.full(n, base)
    n_sub = subsample_size(params.subsample_fraction, n)
    tree_params = params.tree
    trees = []
    for m in range(params.n_trees):
        residual = y - current
        if n_sub < n:
            rows = np.sort(derive_rng(params.seed, "stage", m).choice(n, n_sub, replace = False))
            tree = grow_tree(x[rows], residual[rows], tree_params, None, derive_seed(params.seed, "tree", m))
        else:
            tree = grow_tree(x, residual, tree_params, None, derive_seed(params.seed, "tree", m))
        current += params.learning_rate * tree.predict(x)
        trees.append(tree)
        if (m + 1) % 500 == 0:
            logging.debug(f"Stage {m + 1}/{params.n_trees}: training MSE {np.mean((y - current) ** 2):.6g}")
    return GbrtModel(base, tuple(trees), params.learning_rate, params)


def predict_gbrt(model: GbrtModel, x) -> float:
    return float(model.predict(_as_row(x))[0])
