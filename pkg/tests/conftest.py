import numpy as np
import pytest

from dataset import CSV_HEADER, Dataset, TargetKind
from synthetic import generate_dataset


@pytest.fixture(scope = "session")
def mean_ds():
    return generate_dataset(300, noise_sd = 0.02, target_kind = TargetKind.MEAN_CP, seed = 11)


@pytest.fixture(scope = "session")
def rms_ds():
    return generate_dataset(200, noise_sd = 0.01, target_kind = TargetKind.RMS_CP, seed = 12)


@pytest.fixture
def write_rows(tmp_path):
    """Write a CSV from a header string and data rows, return its path."""
    def write(rows, header = ",".join(CSV_HEADER), name = "data.csv"):
        path = tmp_path / name
        lines = ([header] if header is not None else []) + list(rows)
        path.write_text("".join(line + "\n" for line in lines))
        return str(path)
    return write


@pytest.fixture
def make_ds():
    """Mean-Cp dataset at a fixed Re from ti, theta and target columns."""
    def make(ti, theta, target, re = 1.0e5):
        return Dataset(TargetKind.MEAN_CP, np.full(len(target), re), ti, theta, target)
    return make
