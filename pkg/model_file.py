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
Versioned JSON model files.

    {"format_version": 1, "target_kind": "mean_cp",
     "learner": {"kind": "gbrt", "params": {...}},
     "metadata": {"dataset_sha256": ..., "n_samples": ..., "seed": ...},
     "model": {...}}

Trees are stored as parallel node arrays (feature, threshold, left, right,
value, n_samples, node_mse) with feature == -1 marking leaves; a sample
goes left iff its value is <= threshold. Floats are written in shortest
round-trip form so a loaded model predicts bit-identically, and keys are
sorted so refitting with the same inputs rewrites the same bytes.
"""

import json
import logging
from dataclasses import dataclass, field

# local includes
from errors import ModelFormatError
from dataset import TargetKind
from cart import RegressionTree
from ensemble import GbrtModel, RandomForestModel
from evaluation import LearnerKind, LearnerSpec, spec_from_dict, spec_to_dict

FORMAT_VERSION = 1

_TREE_FIELDS = ("feature", "threshold", "left", "right", "value", "n_samples", "node_mse")


@dataclass(frozen = True, eq = False)
class ModelFile:
    target_kind: TargetKind
    spec: LearnerSpec
    model: object
    metadata: dict = field(default_factory = dict)
    format_version: int = FORMAT_VERSION


def tree_to_dict(tree: RegressionTree) -> dict:
    return {name: getattr(tree, name).tolist() for name in _TREE_FIELDS}


def tree_from_dict(data: dict) -> RegressionTree:
    tree = RegressionTree(*(data[name] for name in _TREE_FIELDS))
    tree.validate()
    return tree


def model_to_dict(mf: ModelFile) -> dict:
    kind = mf.spec.kind
    if kind == LearnerKind.DTR:
        body = {"tree": tree_to_dict(mf.model)}
    elif kind == LearnerKind.RF:
        body = {"trees": [tree_to_dict(t) for t in mf.model.trees]}
    else:
        body = {
            "base_prediction": mf.model.base_prediction,
            "learning_rate": mf.model.learning_rate,
            "trees": [tree_to_dict(t) for t in mf.model.trees],
        }
    return {
        "format_version": mf.format_version,
        "target_kind": TargetKind(mf.target_kind).value,
        "learner": spec_to_dict(mf.spec),
        "metadata": dict(mf.metadata),
        "model": body,
    }


def model_from_dict(data: dict) -> ModelFile:
    if not isinstance(data, dict):
        raise ModelFormatError("Model file must hold a JSON object.")
    version = data.get("format_version")
    if version != FORMAT_VERSION:
        raise ModelFormatError(f"Model format version {version!r} is not supported (expected {FORMAT_VERSION}).")
    try:
        spec = spec_from_dict(data["learner"])
        body = data["model"]
        if spec.kind == LearnerKind.DTR:
            model = tree_from_dict(body["tree"])
        elif spec.kind == LearnerKind.RF:
            model = RandomForestModel(tuple(tree_from_dict(t) for t in body["trees"]), spec.params)
        else:
            model = GbrtModel(body["base_prediction"], tuple(tree_from_dict(t) for t in body["trees"]),
                              body["learning_rate"], spec.params)
        return ModelFile(TargetKind(data["target_kind"]), spec, model, dict(data.get("metadata", {})), version)
    except (KeyError, TypeError, ValueError) as e:
        if isinstance(e, ModelFormatError):
            raise
        raise ModelFormatError(f"Malformed model file: {type(e).__name__}: {e}") from e


def save_model(mf: ModelFile, file_path: str) -> None:
    logging.info(f"Saving {mf.spec.kind.value} model to: {file_path}")
    with open(file_path, "w") as f:
        json.dump(model_to_dict(mf), f, sort_keys = True, separators = (",", ":"), allow_nan = False)
        f.write("\n")


def load_model(file_path: str) -> ModelFile:
    logging.debug(f"Loading model file: {file_path}")
    with open(file_path, "r") as f:
        try:
            data = json.load(f)
        except json.JSONDecodeError as e:
            raise ModelFormatError(f"{file_path} is not valid JSON: {e}") from e
    return model_from_dict(data)
