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
Pressure coefficient samples, CSV ingestion and the seeded partitions used
for model evaluation.

A dataset file has the mandatory header ``re,ti,theta,cp``. Lines starting
with ``#`` and blank lines are skipped. Duplicate (re, ti, theta) rows are
kept as separate samples.
"""

import csv
import enum
import math
import hashlib
import logging
from functools import cached_property
from dataclasses import dataclass

import numpy as np

# local includes
from errors import DomainError, ParameterError, ParseError
from seeding import derive_rng

CSV_HEADER = ("re", "ti", "theta", "cp")
FEATURE_NAMES = ("log10(Re)", "Ti", "theta")
N_FEATURES = len(FEATURE_NAMES)


class TargetKind(str, enum.Enum):
    MEAN_CP = "mean_cp"
    RMS_CP = "rms_cp"


def check_domain(re: float, ti: float, theta: float, target: float = 0.0, line: int = None) -> None:
    """Raise DomainError naming the first field outside its range."""
    if not (math.isfinite(re) and re > 0):
        raise DomainError("re", re, "must be > 0", line)
    if not (0 <= ti <= 100):
        raise DomainError("ti", ti, "must be within 0-100 percent", line)
    if not (0 <= theta <= 180):
        raise DomainError("theta", theta, "must be within 0-180 degrees", line)
    if not math.isfinite(target):
        raise DomainError("cp", target, "must be finite", line)


@dataclass(frozen = True)
class Sample:
    re: float
    ti: float
    theta: float
    target: float

    def __post_init__(self):
        check_domain(self.re, self.ti, self.theta, self.target)


@dataclass(frozen = True)
class FeatureVector:
    """Model inputs: (log10 Re, Ti in percent, theta in degrees)."""
    f0: float
    f1: float
    f2: float

    def as_array(self) -> np.ndarray:
        return np.array([self.f0, self.f1, self.f2], dtype = np.float64)


def log_reynolds(re) -> np.ndarray:
    return np.log10(np.asarray(re, dtype = np.float64))


def featurize(s: Sample) -> FeatureVector:
    return FeatureVector(float(log_reynolds([s.re])[0]), float(s.ti), float(s.theta))


def feature_matrix(re, ti, theta) -> np.ndarray:
    """Stack raw columns into the (n, 3) feature matrix the trees split on."""
    x = np.empty((len(re), N_FEATURES), dtype = np.float64)
    x[:, 0] = log_reynolds(re)
    x[:, 1] = ti
    x[:, 2] = theta
    return x


def _frozen_column(values) -> np.ndarray:
    col = np.array(values, dtype = np.float64).reshape(-1)
    col.setflags(write = False)
    return col


@dataclass(frozen = True, eq = False)
class Dataset:
    """
    Immutable column store of samples in ingestion order. Columns are
    read-only numpy arrays, so a Dataset can be shared between workers.
    """

    target_kind: TargetKind
    re: np.ndarray
    ti: np.ndarray
    theta: np.ndarray
    target: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "target_kind", TargetKind(self.target_kind))
        for name in ("re", "ti", "theta", "target"):
            object.__setattr__(self, name, _frozen_column(getattr(self, name)))
        n = len(self.re)
        if any(len(c) != n for c in (self.ti, self.theta, self.target)):
            raise ParameterError("Dataset columns must have equal length.")
        bad = ~(np.isfinite(self.re) & (self.re > 0))
        bad |= ~((self.ti >= 0) & (self.ti <= 100))
        bad |= ~((self.theta >= 0) & (self.theta <= 180))
        bad |= ~np.isfinite(self.target)
        if bad.any():
            i = int(np.flatnonzero(bad)[0])
            check_domain(self.re[i], self.ti[i], self.theta[i], self.target[i])

    @classmethod
    def from_samples(cls, target_kind: TargetKind, samples) -> "Dataset":
        samples = list(samples)
        return cls(
            target_kind,
            [s.re for s in samples],
            [s.ti for s in samples],
            [s.theta for s in samples],
            [s.target for s in samples],
        )

    def __len__(self) -> int:
        return len(self.re)

    @property
    def samples(self) -> tuple:
        return tuple(
            Sample(float(a), float(b), float(c), float(d))
            for a, b, c, d in zip(self.re, self.ti, self.theta, self.target)
        )

    @cached_property
    def _features(self) -> np.ndarray:
        x = feature_matrix(self.re, self.ti, self.theta)
        x.setflags(write = False)
        return x

    def features(self) -> np.ndarray:
        """(n, 3) matrix of FeatureVector rows."""
        return self._features

    def subset(self, indices) -> "Dataset":
        idx = np.asarray(indices, dtype = np.intp)
        return Dataset(self.target_kind, self.re[idx], self.ti[idx], self.theta[idx], self.target[idx])

    def digest(self) -> str:
        """sha256 over the kind and the float64 columns."""
        h = hashlib.sha256(self.target_kind.value.encode())
        for col in (self.re, self.ti, self.theta, self.target):
            h.update(np.ascontiguousarray(col, dtype = "<f8").tobytes())
        return h.hexdigest()


@dataclass(frozen = True)
class FoldAssignment:
    k: int
    membership: np.ndarray

    def __post_init__(self):
        membership = np.array(self.membership, dtype = np.intp).reshape(-1)
        membership.setflags(write = False)
        object.__setattr__(self, "membership", membership)

    def fold_indices(self, fold: int) -> np.ndarray:
        return np.flatnonzero(self.membership == fold)

    def train_indices(self, fold: int) -> np.ndarray:
        return np.flatnonzero(self.membership != fold)

    def sizes(self) -> list:
        return np.bincount(self.membership, minlength = self.k).tolist()


### CSV I/O
def _is_skipped(row: list) -> bool:
    return not row or not "".join(row).strip() or row[0].lstrip().startswith("#")


def load_csv(path: str, target_kind: TargetKind) -> Dataset:
    """
    Read a dataset CSV. Raises ParseError for malformed rows and DomainError
    for values outside their physical range, both carrying the line number.
    """

    logging.debug(f"Loading dataset: {path}")
    re, ti, theta, target = [], [], [], []
    with open(path, "r", newline = "") as f:
        reader = csv.reader(f)
        header = None
        for row in reader:
            line = reader.line_num
            if _is_skipped(row):
                continue
            if header is None:
                header = tuple(c.strip().lower() for c in row)
                if header != CSV_HEADER:
                    raise ParseError(f"expected header {','.join(CSV_HEADER)}, got {','.join(row)}", line)
                continue
            if len(row) != len(CSV_HEADER):
                raise ParseError(f"expected {len(CSV_HEADER)} fields, got {len(row)}", line)
            try:
                values = [float(c) for c in row]
            except ValueError as e:
                raise ParseError(str(e), line) from e
            check_domain(*values, line = line)
            re.append(values[0])
            ti.append(values[1])
            theta.append(values[2])
            target.append(values[3])
    if header is None:
        raise ParseError("missing header row", 1)
    logging.info(f"Loaded {len(re)} samples from {path}")
    return Dataset(target_kind, re, ti, theta, target)


def load_query_csv(path: str) -> np.ndarray:
    """
    Read a query CSV with header ``re,ti,theta``. Returns an (n, 3) array of
    raw (re, ti, theta) rows. A target column, when present, is ignored.
    """

    rows = []
    with open(path, "r", newline = "") as f:
        reader = csv.reader(f)
        header = None
        for row in reader:
            line = reader.line_num
            if _is_skipped(row):
                continue
            if header is None:
                header = tuple(c.strip().lower() for c in row)
                if header[:3] != CSV_HEADER[:3]:
                    raise ParseError(f"expected header re,ti,theta, got {','.join(row)}", line)
                continue
            if len(row) != len(header):
                raise ParseError(f"expected {len(header)} fields, got {len(row)}", line)
            try:
                values = [float(c) for c in row[:3]]
            except ValueError as e:
                raise ParseError(str(e), line) from e
            check_domain(*values, line = line)
            rows.append(values)
    if header is None:
        raise ParseError("missing header row", 1)
    return np.array(rows, dtype = np.float64).reshape(-1, 3)


def write_csv(ds: Dataset, path: str) -> None:
    """Write the ingestion schema. repr() floats keep the file byte-stable and exact."""
    with open(path, "w", newline = "") as f:
        writer = csv.writer(f, lineterminator = "\n")
        writer.writerow(CSV_HEADER)
        for row in zip(ds.re, ds.ti, ds.theta, ds.target):
            writer.writerow([repr(float(v)) for v in row])
    logging.info(f"Wrote {len(ds)} samples to {path}")


### Partitions
def split_indices(n: int, test_fraction: float, seed: int) -> tuple:
    """Index partition (train, test) used by train_test_split, both ascending."""
    if not (0 <= test_fraction <= 1):
        raise ParameterError(f"test_fraction must be within [0, 1]. {test_fraction}")
    perm = derive_rng(seed, "split").permutation(n)
    n_test = int(round(n * test_fraction))
    return np.sort(perm[n_test:]), np.sort(perm[:n_test])


def train_test_split(ds: Dataset, test_fraction: float, seed: int) -> tuple:
    train_idx, test_idx = split_indices(len(ds), test_fraction, seed)
    return ds.subset(train_idx), ds.subset(test_idx)


def kfold(ds: Dataset, k: int, seed: int) -> FoldAssignment:
    """
    Deal a seeded permutation of the sample indices round-robin into k folds,
    so fold sizes differ by at most one.
    """

    n = len(ds)
    if k < 2 or k > n:
        raise ParameterError(f"k must satisfy 2 <= k <= n ({n}). {k}")
    perm = derive_rng(seed, "fold").permutation(n)
    membership = np.empty(n, dtype = np.intp)
    membership[perm] = np.arange(n) % k
    return FoldAssignment(k, membership)
