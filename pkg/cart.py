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
CART regression trees.

Splits are searched exhaustively over the midpoints between consecutive
distinct values of each candidate feature. The criterion is the decrease in
target variance (MSE impurity). Ties go to the lowest feature index, then
the lowest threshold. A sample goes left iff its value is <= threshold.

Without a leaf budget a tree grows depth-first down to max_depth. With
max_leaf_nodes set it grows best-first: the frontier node whose split
removes the most squared error is expanded next (ties: earliest created),
until the budget is spent.
"""

import heapq
import math
import logging
from functools import cached_property
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

# local includes
from debug import debug_timer
from errors import ParameterError
from seeding import draw_subset
from dataset import Dataset, FeatureVector, FEATURE_NAMES, N_FEATURES

LEAF = -1
# relative margin a later feature must beat the current best by
TIE_RTOL = 1e-10


def check_int(name: str, value, minimum: int) -> None:
    if isinstance(value, bool) or not isinstance(value, (int, np.integer)) or value < minimum:
        raise ParameterError(f"{name} must be an integer >= {minimum}. {value!r}")


@dataclass(frozen = True)
class TreeParams:
    max_depth: int = 20
    max_leaf_nodes: Optional[int] = None
    min_samples_leaf: int = 1

    def __post_init__(self):
        check_int("max_depth", self.max_depth, 0)
        if self.max_leaf_nodes is not None:
            check_int("max_leaf_nodes", self.max_leaf_nodes, 2)
        check_int("min_samples_leaf", self.min_samples_leaf, 1)


@dataclass(frozen = True)
class SplitCandidate:
    feature_index: int
    threshold: float
    impurity_decrease: float
    left_count: int
    right_count: int


### Impurity functions
def mse_impurity(targets: Sequence[float]) -> float:
    """Population variance of the targets."""
    y = np.asarray(targets, dtype = np.float64)
    if y.size == 0:
        raise ParameterError("mse_impurity needs at least one target.")
    return float(np.mean((y - y.mean()) ** 2))


def gini_index(fractions: Sequence[float]) -> float:
    """Gini impurity 1 - sum(p_i^2) of a class distribution."""
    p = [float(f) for f in fractions]
    if not p or any(f < 0 for f in p):
        raise ParameterError(f"Class fractions must be non-negative. {p}")
    if abs(math.fsum(p) - 1.0) > 1e-9:
        raise ParameterError(f"Class fractions must sum to 1. {p}")
    return 1.0 - math.fsum(f * f for f in p)


### Fitted tree
@dataclass(frozen = True, eq = False)
class RegressionTree:
    """
    Node arena. Internal nodes have feature >= 0 and two children; leaves
    have feature == LEAF and children == LEAF. value, n_samples and
    node_mse describe the training targets routed to every node.
    """

    feature: np.ndarray
    threshold: np.ndarray
    left: np.ndarray
    right: np.ndarray
    value: np.ndarray
    n_samples: np.ndarray
    node_mse: np.ndarray
    root: int = 0

    def __post_init__(self):
        for name, dtype in (("feature", np.intp), ("left", np.intp), ("right", np.intp),
                            ("n_samples", np.intp), ("threshold", np.float64),
                            ("value", np.float64), ("node_mse", np.float64)):
            arr = np.array(getattr(self, name), dtype = dtype).reshape(-1)
            arr.setflags(write = False)
            object.__setattr__(self, name, arr)
        n = len(self.feature)
        if n == 0 or any(len(getattr(self, a)) != n for a in
                         ("threshold", "left", "right", "value", "n_samples", "node_mse")):
            raise ParameterError("Tree node arrays must be non-empty and of equal length.")

    @property
    def n_nodes(self) -> int:
        return len(self.feature)

    @property
    def n_leaves(self) -> int:
        return int(np.count_nonzero(self.feature == LEAF))

    @cached_property
    def depth(self) -> int:
        return self.validate()

    def validate(self) -> int:
        """
        Walk the arena from the root. Raises ParameterError on a cycle, a
        dangling child or an unreachable node. Returns the tree depth.
        """

        n = self.n_nodes
        if not (0 <= self.root < n):
            raise ParameterError(f"Root index out of range. {self.root}")
        seen = np.zeros(n, dtype = bool)
        depth = 0
        stack = [(self.root, 0)]
        while stack:
            node, d = stack.pop()
            if seen[node]:
                raise ParameterError(f"Node {node} is reachable twice.")
            seen[node] = True
            depth = max(depth, d)
            f = self.feature[node]
            kids = (self.left[node], self.right[node])
            if f == LEAF:
                if kids != (LEAF, LEAF):
                    raise ParameterError(f"Leaf {node} has children.")
                continue
            if not (0 <= f < N_FEATURES):
                raise ParameterError(f"Node {node} splits on unknown feature {f}.")
            for child in kids:
                if not (0 <= child < n):
                    raise ParameterError(f"Node {node} has a dangling child {child}.")
                stack.append((int(child), d + 1))
        if not seen.all():
            raise ParameterError(f"{int((~seen).sum())} nodes are unreachable from the root.")
        return depth

    def apply(self, x: np.ndarray) -> np.ndarray:
        """Index of the leaf reached by every row of x."""
        x = np.atleast_2d(np.asarray(x, dtype = np.float64))
        node = np.full(len(x), self.root, dtype = np.intp)
        active = np.flatnonzero(self.feature[node] != LEAF)
        while active.size:
            cur = node[active]
            go_left = x[active, self.feature[cur]] <= self.threshold[cur]
            node[active] = np.where(go_left, self.left[cur], self.right[cur])
            active = active[self.feature[node[active]] != LEAF]
        return node

    def predict(self, x: np.ndarray) -> np.ndarray:
        return self.value[self.apply(x)]


def predict_tree(tree: RegressionTree, x) -> float:
    """Route a single feature vector to its leaf and return the leaf value."""
    if isinstance(x, FeatureVector):
        x = (x.f0, x.f1, x.f2)
    node = tree.root
    while tree.feature[node] != LEAF:
        if x[tree.feature[node]] <= tree.threshold[node]:
            node = tree.left[node]
        else:
            node = tree.right[node]
    return float(tree.value[node])


### Split search
def _find_split(x: np.ndarray, y: np.ndarray, idx: np.ndarray, features, min_samples_leaf: int) -> Optional[SplitCandidate]:
    m = len(idx)
    if m < 2 * min_samples_leaf:
        return None
    node_y = y[idx]
    if node_y.max() == node_y.min():
        return None

    # centering keeps the cumulative sums well conditioned
    centered = node_y - node_y.mean()
    n_left = np.arange(1, m, dtype = np.float64)
    n_right = m - n_left
    size_ok = (n_left >= min_samples_leaf) & (n_right >= min_samples_leaf)
    best = None
    for f in features:
        xs = x[idx, f]
        order = np.argsort(xs, kind = "stable")
        xs = xs[order]
        csum = np.cumsum(centered[order])
        left_sum = csum[:-1]
        right_sum = csum[-1] - left_sum
        valid = size_ok & (xs[1:] > xs[:-1])
        if not valid.any():
            continue
        diff = left_sum / n_left - right_sum / n_right
        decrease = np.where(valid, n_left * n_right * diff * diff / (m * m), -np.inf)
        j = int(np.argmax(decrease))
        if not decrease[j] > 0:
            continue
        # the same partition reached through two features differs only by rounding
        if best is None or decrease[j] > best.impurity_decrease * (1.0 + TIE_RTOL):
            threshold = (xs[j] + xs[j + 1]) / 2.0
            if threshold >= xs[j + 1]:
                threshold = xs[j]
            best = SplitCandidate(int(f), float(threshold), float(decrease[j]), j + 1, m - j - 1)
    return best


def _check_features(allowed_features) -> tuple:
    feats = tuple(sorted(set(int(f) for f in allowed_features)))
    if not feats:
        raise ParameterError("allowed_features must not be empty.")
    if feats[0] < 0 or feats[-1] >= N_FEATURES:
        raise ParameterError(f"Feature indices must be within 0..{N_FEATURES - 1}. {feats}")
    return feats


def best_split(ds: Dataset, samples, allowed_features, min_samples_leaf: int) -> Optional[SplitCandidate]:
    """
    Best variance-reducing split of the given samples, or None when no
    midpoint yields a strictly positive decrease with both children holding
    at least min_samples_leaf samples.
    """

    feats = _check_features(allowed_features)
    check_int("min_samples_leaf", min_samples_leaf, 1)
    idx = np.asarray(samples, dtype = np.intp).reshape(-1)
    return _find_split(ds.features(), ds.target, idx, feats, min_samples_leaf)


### Tree growth
class _TreeGrower:
    """Builds the node arena. Node ids are assigned in creation order."""

    def __init__(self, x, y, params: TreeParams, feature_subset_size, seed: int):
        self._x = x
        self._y = y
        self._params = params
        self._subset_size = feature_subset_size
        self._seed = seed
        self._feature = []
        self._threshold = []
        self._left = []
        self._right = []
        self._value = []
        self._n_samples = []
        self._mse = []
        self._pending = {}

    def _node_features(self, node: int) -> tuple:
        if self._subset_size is None or self._subset_size >= N_FEATURES:
            return tuple(range(N_FEATURES))
        return draw_subset(self._seed, "node", node, self._subset_size, N_FEATURES)

    def _new_node(self, idx: np.ndarray, depth: int) -> int:
        node = len(self._feature)
        node_y = self._y[idx]
        mean = node_y.mean()
        self._feature.append(LEAF)
        self._threshold.append(0.0)
        self._left.append(LEAF)
        self._right.append(LEAF)
        self._value.append(mean)
        self._n_samples.append(len(idx))
        self._mse.append(np.mean((node_y - mean) ** 2))
        split = None
        if depth < self._params.max_depth:
            split = _find_split(self._x, self._y, idx, self._node_features(node),
                                self._params.min_samples_leaf)
        if split is not None:
            self._pending[node] = (idx, depth, split)
        return node

    def _expand(self, node: int) -> tuple:
        idx, depth, split = self._pending.pop(node)
        go_left = self._x[idx, split.feature_index] <= split.threshold
        left = self._new_node(idx[go_left], depth + 1)
        right = self._new_node(idx[~go_left], depth + 1)
        self._feature[node] = split.feature_index
        self._threshold[node] = split.threshold
        self._left[node] = left
        self._right[node] = right
        return left, right

    def _grow_depth_first(self) -> None:
        stack = [0]
        while stack:
            node = stack.pop()
            if node in self._pending:
                left, right = self._expand(node)
                stack.append(right)
                stack.append(left)

    def _priority(self, node: int) -> tuple:
        # squared error removed by the split; ties by creation order
        idx, _, split = self._pending[node]
        return (-split.impurity_decrease * len(idx), node)

    def _grow_best_first(self) -> None:
        heap = [self._priority(0)] if 0 in self._pending else []
        n_leaves = 1
        while heap and n_leaves < self._params.max_leaf_nodes:
            _, node = heapq.heappop(heap)
            for child in self._expand(node):
                if child in self._pending:
                    heapq.heappush(heap, self._priority(child))
            n_leaves += 1

    def grow(self) -> RegressionTree:
        self._new_node(np.arange(len(self._y)), 0)
        if self._params.max_leaf_nodes is None:
            self._grow_depth_first()
        else:
            self._grow_best_first()
        self._pending.clear()
        return RegressionTree(self._feature, self._threshold, self._left, self._right,
                              self._value, self._n_samples, self._mse)


def grow_tree(x: np.ndarray, y: np.ndarray, params: TreeParams,
              feature_subset_size: Optional[int] = None, rng_seed: int = 0) -> RegressionTree:
    """Fit a tree on an (n, 3) feature matrix and n targets."""
    x = np.asarray(x, dtype = np.float64)
    y = np.asarray(y, dtype = np.float64)
    if len(y) == 0:
        raise ParameterError("Cannot fit a tree on an empty dataset.")
    if x.shape != (len(y), N_FEATURES):
        raise ParameterError(f"Feature matrix must have shape ({len(y)}, {N_FEATURES}). {x.shape}")
    if feature_subset_size is not None:
        check_int("feature_subset_size", feature_subset_size, 1)
        if feature_subset_size > N_FEATURES:
            raise ParameterError(f"feature_subset_size can't exceed {N_FEATURES}. {feature_subset_size}")
    return _TreeGrower(x, y, params, feature_subset_size, rng_seed).grow()


@debug_timer
def fit_tree(ds: Dataset, params: TreeParams, feature_subset_size: Optional[int] = None,
             rng_seed: int = 0) -> RegressionTree:
    tree = grow_tree(ds.features(), ds.target, params, feature_subset_size, rng_seed)
    logging.debug(f"Fitted tree: {tree.n_nodes} nodes, {tree.n_leaves} leaves")
    return tree


### Inspection
def export_text(tree: RegressionTree, max_depth: int = 3, feature_names = FEATURE_NAMES, decimals: int = 3) -> str:
    """
    Indented rendering of the top of a tree, one line per node, e.g.

        |--- theta <= 72.500  (samples=400, mse=0.512, value=-0.841)
        |   |--- ...
    """

    lines = []
    stack = [(tree.root, 0, "")]
    while stack:
        node, depth, test = stack.pop()
        stats = (f"samples={int(tree.n_samples[node])}, mse={tree.node_mse[node]:.{decimals}f}, "
                 f"value={tree.value[node]:.{decimals}f}")
        indent = "|   " * depth
        if tree.feature[node] == LEAF:
            lines.append(f"{indent}|--- {test}leaf ({stats})")
            continue
        name = feature_names[tree.feature[node]]
        thr = f"{tree.threshold[node]:.{decimals}f}"
        if depth >= max_depth:
            lines.append(f"{indent}|--- {test}{name} <= {thr}  ({stats}) ...")
            continue
        lines.append(f"{indent}|--- {test}{name} <= {thr}  ({stats})")
        stack.append((int(tree.right[node]), depth + 1, "else: "))
        stack.append((int(tree.left[node]), depth + 1, ""))
    return "\n".join(lines)
