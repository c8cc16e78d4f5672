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
Hyperparameter presets and sweep grids.

PRESETS are the tuned values reported for the literature dataset, per
target kind. DEFAULT_GRIDS are desk-scale sweeps over the same axes; a
JSON grid file of the same shape replaces them.
"""

import copy
import json
import logging

# local includes
from errors import ParameterError

LEARNER_KINDS = ("dtr", "rf", "gbrt")

PRESETS = {
    "mean_cp": {
        "dtr": {"max_depth": 20, "max_leaf_nodes": 1250, "min_samples_leaf": 2},
        "rf": {"n_trees": 150, "n_features": 1, "max_depth": 20},
        "gbrt": {"learning_rate": 0.01, "max_tree_depth": 8, "n_trees": 5000, "subsample_fraction": 0.3},
    },
    "rms_cp": {
        "dtr": {"max_depth": 20, "max_leaf_nodes": 1500, "min_samples_leaf": 2},
        "rf": {"n_trees": 150, "n_features": 2, "max_depth": 20},
        "gbrt": {"learning_rate": 0.01, "max_tree_depth": 16, "n_trees": 3000, "subsample_fraction": 0.3},
    },
}

DEFAULT_GRIDS = {
    "dtr": {
        "max_depth": [5, 10, 20, 30],
        "max_leaf_nodes": [250, 750, 1250],
        "min_samples_leaf": [1, 2, 5],
    },
    "rf": {
        "n_trees": [50, 150],
        "n_features": [1, 2, 3],
        "max_depth": [10, 20],
    },
    "gbrt": {
        "learning_rate": [0.05, 0.1],
        "max_tree_depth": [4, 8],
        "n_trees": [200, 500],
        "subsample_fraction": [0.3, 0.5],
    },
}


def preset(target_kind: str, learner: str) -> dict:
    try:
        return dict(PRESETS[target_kind][learner])
    except KeyError:
        raise ParameterError(f"No preset for target {target_kind!r} and learner {learner!r}.") from None


def check_grids(grids: dict) -> dict:
    """Validate {learner: {axis: [values]}} and return it with list values."""
    if not isinstance(grids, dict) or not grids:
        raise ParameterError("Grids must be a non-empty mapping of learner kind to axes.")
    checked = {}
    for kind, axes in grids.items():
        if kind not in LEARNER_KINDS:
            raise ParameterError(f"Unknown learner kind in grids: {kind!r}")
        if not isinstance(axes, dict) or not axes:
            raise ParameterError(f"Grid for {kind} must map axis names to value lists.")
        checked[kind] = {}
        for name, values in axes.items():
            if not isinstance(values, list) or not values:
                raise ParameterError(f"Axis {kind}.{name} must be a non-empty list.")
            checked[kind][name] = list(values)
    return checked


def load_grids(file_path: str = None) -> dict:
    """
    Loads the JSON grid file. If no file is given or found, the built-in
    DEFAULT_GRIDS are returned. A file that can't be parsed raises.
    """

    if not file_path:
        return copy.deepcopy(DEFAULT_GRIDS)
    logging.debug(f"Loading grid file: {file_path}")
    try:
        with open(file_path, "r") as f:
            data = json.load(f)
    except FileNotFoundError as e:
        logging.warning(e)
        logging.info("Loading default grids.")
        return copy.deepcopy(DEFAULT_GRIDS)
    except json.JSONDecodeError as e:
        raise ParameterError(f"Grid file {file_path} is not valid JSON: {e}") from e
    return check_grids(data)


def save_grids(file_path: str, grids: dict) -> None:
    logging.info(f"Saving grids to: {file_path}")
    with open(file_path, "w") as f:
        json.dump(check_grids(grids), f, indent = 2, sort_keys = True)
        f.write("\n")


def parse_value(text: str):
    """Grid/flag value: none, true/false, int, then float."""
    t = text.strip().lower()
    if t in ("none", "null", ""):
        return None
    if t == "true":
        return True
    if t == "false":
        return False
    try:
        return int(t)
    except ValueError:
        pass
    try:
        return float(t)
    except ValueError:
        raise ParameterError(f"Can't parse grid value: {text!r}") from None


def parse_axis(text: str) -> tuple:
    """'max_depth=5,10,20' -> ('max_depth', [5, 10, 20])"""
    name, sep, values = text.partition("=")
    if not sep or not name.strip() or not values.strip():
        raise ParameterError(f"Axis must look like name=v1,v2,... {text!r}")
    return name.strip(), [parse_value(v) for v in values.split(",")]
