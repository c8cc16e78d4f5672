import numpy as np
import pytest

from dataset import (
    Dataset,
    FeatureVector,
    Sample,
    TargetKind,
    featurize,
    kfold,
    load_csv,
    load_query_csv,
    split_indices,
    train_test_split,
    write_csv,
)
from errors import DomainError, ParameterError, ParseError


### load_csv
def test_load_csv_maps_fields(write_rows):
    ds = load_csv(write_rows(["1.0e5,0.5,90,-1.8"]), TargetKind.MEAN_CP)
    assert len(ds) == 1
    assert ds.samples[0] == Sample(re = 1.0e5, ti = 0.5, theta = 90.0, target = -1.8)
    assert ds.target_kind == TargetKind.MEAN_CP


def test_load_csv_header_only(write_rows):
    ds = load_csv(write_rows([]), TargetKind.RMS_CP)
    assert len(ds) == 0
    assert ds.features().shape == (0, 3)


def test_load_csv_keeps_order_and_skips_comments(write_rows):
    path = write_rows(["# digitized", "3e4,1,10,0.5", "", "2e5,0,20,0.4", "3e4,1,10,0.6"])
    ds = load_csv(path, TargetKind.MEAN_CP)
    assert list(ds.target) == [0.5, 0.4, 0.6]
    assert list(ds.re) == [3e4, 2e5, 3e4]


def test_load_csv_domain_error_names_field_and_line(write_rows):
    path = write_rows(["1.0e5,0.5,90,-1.8", "1.0e5,0.5,200,-1.8"])
    with pytest.raises(DomainError) as e:
        load_csv(path, TargetKind.MEAN_CP)
    assert e.value.field == "theta"
    assert e.value.line == 3
    assert "line 3" in str(e.value)


@pytest.mark.parametrize("row, field", [
    ("0,0.5,90,1", "re"),
    ("-5,0.5,90,1", "re"),
    ("1e5,101,90,1", "ti"),
    ("1e5,-1,90,1", "ti"),
    ("1e5,0.5,-0.1,1", "theta"),
    ("1e5,0.5,90,nan", "cp"),
])
def test_load_csv_domain_fields(write_rows, row, field):
    with pytest.raises(DomainError) as e:
        load_csv(write_rows([row]), TargetKind.MEAN_CP)
    assert e.value.field == field


@pytest.mark.parametrize("row", ["1e5,abc,90,1", "1e5,0.5,90", "1e5,0.5,90,1,2"])
def test_load_csv_malformed_row(write_rows, row):
    with pytest.raises(ParseError) as e:
        load_csv(write_rows(["1e5,0.5,90,1", row]), TargetKind.MEAN_CP)
    assert e.value.line == 3


def test_load_csv_bad_header(write_rows):
    with pytest.raises(ParseError):
        load_csv(write_rows(["1e5,0.5,90,1"], header = "re,ti,angle,cp"), TargetKind.MEAN_CP)
    with pytest.raises(ParseError):
        load_csv(write_rows([], header = None), TargetKind.MEAN_CP)


def test_load_csv_missing_file(tmp_path):
    with pytest.raises(FileNotFoundError):
        load_csv(str(tmp_path / "nope.csv"), TargetKind.MEAN_CP)


def test_write_csv_is_read_back_exactly(tmp_path, mean_ds):
    path = str(tmp_path / "out.csv")
    write_csv(mean_ds, path)
    ds = load_csv(path, TargetKind.MEAN_CP)
    for col in ("re", "ti", "theta", "target"):
        assert np.array_equal(getattr(ds, col), getattr(mean_ds, col))
    assert ds.digest() == mean_ds.digest()


def test_load_query_csv(write_rows):
    q = load_query_csv(write_rows(["1e5,0.5,90", "2e4,3,0"], header = "re,ti,theta"))
    assert q.shape == (2, 3)
    assert q[1].tolist() == [2e4, 3.0, 0.0]
    # a target column is tolerated and ignored
    q = load_query_csv(write_rows(["1e5,0.5,90,-1.0"]))
    assert q.tolist() == [[1e5, 0.5, 90.0]]
    assert load_query_csv(write_rows([], header = "re,ti,theta")).shape == (0, 3)


def test_load_query_csv_domain_error(write_rows):
    with pytest.raises(DomainError) as e:
        load_query_csv(write_rows(["1e5,0.5,90", "1e5,0.5,181"], header = "re,ti,theta"))
    assert e.value.line == 3


### Samples and features
def test_sample_invariants():
    with pytest.raises(DomainError):
        Sample(re = 0.0, ti = 1.0, theta = 0.0, target = 0.0)
    with pytest.raises(DomainError):
        Sample(re = 1e5, ti = 1.0, theta = 180.5, target = 0.0)


def test_featurize():
    assert featurize(Sample(1e5, 0.5, 90.0, 0.0)) == FeatureVector(pytest.approx(5.0), 0.5, 90.0)
    assert featurize(Sample(1.0, 2.0, 3.0, 0.0)).f0 == 0.0
    fv = featurize(Sample(3.16227766e4, 10.0, 0.0, 0.0))
    assert fv.f0 == pytest.approx(4.5, abs = 1e-8)
    assert (fv.f1, fv.f2) == (10.0, 0.0)


def test_featurize_monotone_in_re():
    res = np.logspace(0, 7, 200)
    f0 = [featurize(Sample(r, 1.0, 45.0, 0.0)).f0 for r in res]
    assert all(a < b for a, b in zip(f0, f0[1:]))


def test_dataset_columns_are_read_only(mean_ds):
    with pytest.raises(ValueError):
        mean_ds.target[0] = 1.0
    with pytest.raises(ValueError):
        mean_ds.features()[0, 0] = 1.0


def test_dataset_digest_depends_on_content(mean_ds):
    assert mean_ds.digest() == mean_ds.subset(np.arange(len(mean_ds))).digest()
    shifted = Dataset(mean_ds.target_kind, mean_ds.re, mean_ds.ti, mean_ds.theta, mean_ds.target + 1.0)
    assert mean_ds.digest() != shifted.digest()


def test_dataset_rejects_ragged_columns():
    with pytest.raises(ParameterError):
        Dataset(TargetKind.MEAN_CP, [1e5, 1e5], [0.0], [0.0, 1.0], [0.0, 1.0])


### Partitions
def _zeros(n: int) -> Dataset:
    return Dataset(TargetKind.MEAN_CP, np.full(n, 1e5), np.zeros(n), np.zeros(n), np.zeros(n))


def test_train_test_split_sizes():
    ds = _zeros(100)
    train, test = train_test_split(ds, 0.1, seed = 3)
    assert (len(train), len(test)) == (90, 10)
    train, test = train_test_split(ds, 0.0, seed = 3)
    assert (len(train), len(test)) == (100, 0)


def test_split_indices_partition_and_determinism():
    tr, te = split_indices(57, 0.3, seed = 5)
    assert len(te) == round(57 * 0.3)
    assert sorted(np.concatenate([tr, te]).tolist()) == list(range(57))
    tr2, te2 = split_indices(57, 0.3, seed = 5)
    assert np.array_equal(tr, tr2) and np.array_equal(te, te2)
    _, te3 = split_indices(57, 0.3, seed = 6)
    assert not np.array_equal(te, te3)


@pytest.mark.parametrize("fraction", [-0.1, 1.5])
def test_split_indices_bad_fraction(fraction):
    with pytest.raises(ParameterError):
        split_indices(10, fraction, seed = 0)


@pytest.mark.parametrize("n, k, sizes", [
    (100, 10, [10] * 10),
    (10, 10, [1] * 10),
    (10, 3, [3, 3, 4]),
])
def test_kfold_sizes(n, k, sizes):
    folds = kfold(_zeros(n), k, seed = 1)
    assert sorted(folds.sizes()) == sizes


@pytest.mark.parametrize("k", [1, 0, 11])
def test_kfold_bad_k(k):
    with pytest.raises(ParameterError):
        kfold(_zeros(10), k, seed = 0)


def test_kfold_laws_over_random_triples():
    rng = np.random.default_rng(2024)
    for _ in range(100):
        n = int(rng.integers(2, 200))
        k = int(rng.integers(2, n + 1))
        seed = int(rng.integers(0, 2 ** 31))
        ds = _zeros(n)
        folds = kfold(ds, k, seed)
        parts = [folds.fold_indices(i) for i in range(k)]
        joined = np.concatenate(parts)
        assert len(joined) == n
        assert sorted(joined.tolist()) == list(range(n))
        sizes = [len(p) for p in parts]
        assert max(sizes) - min(sizes) <= 1
        for i in range(k):
            train = folds.train_indices(i)
            assert len(np.intersect1d(train, parts[i])) == 0
            assert len(train) + len(parts[i]) == n
        assert np.array_equal(kfold(ds, k, seed).membership, folds.membership)
