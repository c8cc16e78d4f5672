import numpy as np
import pytest

import config
import evaluation
from cart import TreeParams
from dataset import kfold
from ensemble import GbrtParams, RandomForestParams
from errors import EvaluationError, ParameterError, UndefinedVarianceError
from evaluation import (
    CvReport,
    LearnerKind,
    LearnerSpec,
    build_spec,
    cross_validate,
    default_spec,
    fit_learner,
    grid_search,
    mse,
    predict_model,
    r2_score,
    run_ttv,
    score_model,
    spec_from_dict,
    spec_to_dict,
    spec_to_flat,
    write_cv_csv,
    write_sweep_csv,
)
from synthetic import generate_dataset


### Metrics
@pytest.mark.parametrize("p, t, expected", [
    ([1.0, 2.0, 3.0], [1.0, 2.0, 3.0], 0.0),
    ([0.0, 0.0], [3.0, 4.0], 12.5),
    ([2.0], [5.0], 9.0),
])
def test_mse(p, t, expected):
    assert mse(p, t) == expected


@pytest.mark.parametrize("p, t", [([1.0], [1.0, 2.0]), ([], [])])
def test_mse_rejects_bad_lengths(p, t):
    with pytest.raises(ParameterError):
        mse(p, t)


def test_r2_score():
    assert r2_score([1.0, 2.0, 3.0], [1.0, 2.0, 3.0]) == 1.0
    assert r2_score([2.0, 2.0, 2.0], [1.0, 2.0, 3.0]) == 0.0
    assert r2_score([0.0, 0.0, 0.0], [-1.0, 0.0, 1.0]) == 0.0


def test_r2_score_errors():
    with pytest.raises(UndefinedVarianceError):
        r2_score([1.0, 2.0], [3.0, 3.0])
    with pytest.raises(ParameterError):
        r2_score([1.0], [2.0])


def test_r2_is_one_minus_mse_over_variance():
    rng = np.random.default_rng(5)
    for _ in range(20):
        t = rng.normal(size = 30)
        p = t + rng.normal(scale = 0.3, size = 30)
        assert r2_score(p, t) == pytest.approx(1.0 - mse(p, t) / np.var(t), abs = 1e-12)


### Learner specs
def test_default_specs_use_mean_cp_presets():
    dtr = default_spec("dtr")
    assert dtr.params == TreeParams(max_depth = 20, max_leaf_nodes = 1250, min_samples_leaf = 2)
    rf = default_spec(LearnerKind.RF)
    assert (rf.params.n_trees, rf.params.n_features, rf.params.tree.max_depth) == (150, 1, 20)
    gbrt = default_spec("gbrt")
    assert gbrt.params == GbrtParams(learning_rate = 0.01, max_tree_depth = 8, n_trees = 5000, subsample_fraction = 0.3)


def test_build_spec_overrides_and_seed():
    spec = build_spec("rf", {"n_trees": 5, "max_depth": 4}, seed = 9)
    assert spec.params.n_trees == 5
    assert spec.params.tree.max_depth == 4
    assert spec.params.seed == 9
    assert build_spec("rf", {"seed": 2}, seed = 9).params.seed == 2
    # trees have no seed of their own
    assert build_spec("dtr", {"max_depth": 3}, seed = 9).params.max_depth == 3


def test_build_spec_rejects_unknown_names():
    with pytest.raises(ParameterError, match = "does not take"):
        build_spec("dtr", {"learning_rate": 0.1})
    with pytest.raises(ParameterError):
        build_spec("gbrt", {"learning_rate": 2.0})


def test_spec_kind_must_match_params():
    with pytest.raises(ParameterError):
        LearnerSpec(LearnerKind.DTR, GbrtParams())


@pytest.mark.parametrize("kind", list(LearnerKind))
def test_spec_dict_round_trip(kind):
    spec = build_spec(kind, seed = 4)
    back = spec_from_dict(spec_to_dict(spec))
    assert back == spec
    assert spec_to_flat(back) == spec_to_flat(spec)


def test_presets_cover_both_targets():
    assert config.preset("rms_cp", "rf") == {"n_trees": 150, "n_features": 2, "max_depth": 20}
    assert config.preset("rms_cp", "gbrt")["max_tree_depth"] == 16
    assert config.preset("rms_cp", "dtr")["max_leaf_nodes"] == 1500
    with pytest.raises(ParameterError):
        config.preset("drag", "dtr")


def test_score_model(mean_ds):
    model = fit_learner(build_spec("dtr", {"max_depth": 4}), mean_ds)
    m, r2 = score_model(model, mean_ds)
    assert m == pytest.approx(mse(predict_model(model, mean_ds.features()), mean_ds.target))
    assert 0.0 < r2 < 1.0
    with pytest.raises(ParameterError):
        predict_model(object(), mean_ds.features())


### Cross-validation
def test_cross_validate_report(mean_ds):
    spec = build_spec("dtr", {"max_depth": 5})
    report = cross_validate(spec, mean_ds, k = 10, seed = 1)
    assert len(report.per_fold_mse) == 10
    assert all(v >= 0 for v in report.per_fold_mse)
    assert abs(report.mean_mse - np.mean(report.per_fold_mse)) <= 1e-12
    assert report.std_mse == pytest.approx(np.std(report.per_fold_mse))
    assert cross_validate(spec, mean_ds, k = 10, seed = 1) == report
    assert cross_validate(spec, mean_ds, k = 10, seed = 2) != report


def test_cross_validate_constant_learner(mean_ds):
    spec = build_spec("gbrt", {"n_trees": 0})
    report = cross_validate(spec, mean_ds, k = 5, seed = 3)
    folds = kfold(mean_ds, 5, 3)
    y = mean_ds.target
    for i, value in enumerate(report.per_fold_mse):
        held_out = y[folds.fold_indices(i)]
        expected = np.mean((held_out - np.mean(y[folds.train_indices(i)])) ** 2)
        assert value == pytest.approx(expected, rel = 1e-12)


def test_cross_validate_worker_count_invariance(mean_ds):
    spec = build_spec("rf", {"n_trees": 3, "max_depth": 6}, seed = 5)
    assert cross_validate(spec, mean_ds, 4, 8, n_jobs = 1) == cross_validate(spec, mean_ds, 4, 8, n_jobs = 2)


def test_cross_validate_needs_enough_samples(make_ds):
    ds = make_ds([0.0, 1.0, 2.0], [0.0, 1.0, 2.0], [0.0, 1.0, 2.0])
    with pytest.raises(ParameterError):
        cross_validate(default_spec("dtr"), ds, k = 10, seed = 0)


def test_cv_report_from_folds():
    report = CvReport.from_folds([1.0, 3.0])
    assert (report.mean_mse, report.std_mse) == (2.0, 1.0)


### Grid search
def test_grid_search_single_cell(mean_ds):
    surface = grid_search("dtr", {"max_depth": [4]}, mean_ds, k = 5, seed = 0)
    assert len(surface.cells) == 1
    assert surface.best_index == 0
    assert surface.best.point == {"max_depth": 4}


def test_grid_search_shares_folds_with_cross_validate(mean_ds):
    surface = grid_search("dtr", {"max_depth": [2, 6], "min_samples_leaf": [1, 5]}, mean_ds, k = 5, seed = 7)
    assert [c.point for c in surface.cells] == [
        {"max_depth": 2, "min_samples_leaf": 1},
        {"max_depth": 2, "min_samples_leaf": 5},
        {"max_depth": 6, "min_samples_leaf": 1},
        {"max_depth": 6, "min_samples_leaf": 5},
    ]
    for cell in surface.cells:
        assert cell.report == cross_validate(cell.spec, mean_ds, 5, 7)
    best = min(c.report.mean_mse for c in surface.cells)
    assert surface.best.report.mean_mse == best
    assert surface.axis_names == ("max_depth", "min_samples_leaf")


def test_grid_search_dominated_cell_keeps_best(mean_ds):
    one = grid_search("dtr", {"max_depth": [6]}, mean_ds, k = 5, seed = 2)
    two = grid_search("dtr", {"max_depth": [6, 0]}, mean_ds, k = 5, seed = 2)
    assert two.best.point == one.best.point
    assert two.best.report == one.best.report


def test_grid_search_first_cell_wins_ties(mean_ds):
    # min_samples_leaf 1 and 2 give the same stump on 300 samples
    surface = grid_search("dtr", {"max_depth": [1], "min_samples_leaf": [2, 1]}, mean_ds, k = 5, seed = 2)
    assert surface.cells[0].report.mean_mse == surface.cells[1].report.mean_mse
    assert surface.best_index == 0


def test_grid_search_invalid_cell(mean_ds):
    with pytest.raises(EvaluationError, match = "grid cell"):
        grid_search("dtr", {"max_depth": [3, -1]}, mean_ds, k = 5, seed = 0)
    with pytest.raises(ParameterError):
        grid_search("dtr", {}, mean_ds, k = 5, seed = 0)


def test_dtr_surface_levels_off_at_large_depth():
    ds = generate_dataset(1500, noise_sd = 0.05, seed = 21)
    surface = grid_search("dtr", {"max_depth": [2, 20, 30], "max_leaf_nodes": [50, 250]}, ds, k = 5, seed = 4)
    cv = {(c.point["max_depth"], c.point["max_leaf_nodes"]): c.report.mean_mse for c in surface.cells}
    for leaves in (50, 250):
        assert cv[(30, leaves)] == pytest.approx(cv[(20, leaves)], rel = 0.05)
        assert cv[(2, leaves)] > 2.0 * cv[(20, leaves)]
    assert surface.best.point["max_depth"] != 2


def test_grid_search_worker_count_invariance(mean_ds):
    grid = {"max_depth": [2, 5]}
    a = grid_search("dtr", grid, mean_ds, 4, 3, n_jobs = 1)
    b = grid_search("dtr", grid, mean_ds, 4, 3, n_jobs = 2)
    assert [c.report for c in a.cells] == [c.report for c in b.cells]


### Train-test-validate
SMALL_GRIDS = {
    "dtr": {"max_depth": [3, 8]},
    "rf": {"n_trees": [4], "n_features": [2], "max_depth": [8]},
    "gbrt": {"learning_rate": [0.2], "max_tree_depth": [3], "n_trees": [40], "subsample_fraction": [0.5]},
}


@pytest.fixture(scope = "module")
def ttv(mean_ds):
    return run_ttv(mean_ds, SMALL_GRIDS, seed = 13, k = 5, compare_all = True)


def test_ttv_partition_audit(ttv, mean_ds):
    train, test = set(ttv.train_indices.tolist()), set(ttv.test_indices.tolist())
    assert not train & test
    assert train | test == set(range(len(mean_ds)))
    assert len(test) == 30
    # stage 2 fold members, mapped back to rows of the full dataset
    folds = kfold(mean_ds.subset(ttv.train_indices), 5, 13)
    members = [set(ttv.train_indices[folds.fold_indices(i)].tolist()) for i in range(5)]
    assert set().union(*members) == train
    assert all(not fold & test for fold in members)


def _rows(ds) -> set:
    return set(zip(ds.re.tolist(), ds.ti.tolist(), ds.theta.tolist(), ds.target.tolist()))


def test_ttv_stage_two_never_sees_test_rows(mean_ds, monkeypatch):
    seen = []
    score_fold = evaluation._score_fold

    def recording(spec, ds, folds, fold, tag = ""):
        seen.append(_rows(ds.subset(folds.train_indices(fold))) | _rows(ds.subset(folds.fold_indices(fold))))
        return score_fold(spec, ds, folds, fold, tag)

    monkeypatch.setattr(evaluation, "_score_fold", recording)
    grids = {"dtr": {"max_depth": [2, 4]}, "gbrt": {"n_trees": [5], "max_tree_depth": [2]}}
    result = run_ttv(mean_ds, grids, seed = 13, k = 5)
    test_rows = _rows(mean_ds.subset(result.test_indices))
    train_rows = _rows(mean_ds.subset(result.train_indices))
    assert len(test_rows) == 30 and len(train_rows) == 270
    assert len(seen) == 3 * 5
    for rows in seen:
        assert rows == train_rows
        assert not rows & test_rows


def test_ttv_chooses_lowest_cv(ttv):
    best = min(ttv.surfaces.values(), key = lambda s: s.best.report.mean_mse)
    assert ttv.chosen == best.best.spec
    assert ttv.cv_mse == best.best.report.mean_mse
    assert set(ttv.comparison) == set(LearnerKind)
    assert ttv.comparison[ttv.chosen.kind]["test_mse"] == ttv.test_mse


def test_ttv_refit_from_serialized_spec(ttv, mean_ds):
    spec = spec_from_dict(spec_to_dict(ttv.chosen))
    train, test = mean_ds.subset(ttv.train_indices), mean_ds.subset(ttv.test_indices)
    model = fit_learner(spec, train)
    assert mse(predict_model(model, test.features()), test.target) == ttv.test_mse


def test_ttv_single_spec(mean_ds):
    result = run_ttv(mean_ds, {"dtr": {"max_depth": [5]}}, seed = 1, k = 4)
    assert result.chosen == build_spec("dtr", {"max_depth": 5})
    assert result.comparison == {}
    assert 0.0 < result.test_r2 <= 1.0


### Report files
def test_write_reports(tmp_path, mean_ds):
    report = CvReport.from_folds([0.5, 0.25])
    path = tmp_path / "cv.csv"
    write_cv_csv(report, str(path))
    assert path.read_text() == "fold,mse\n0,0.5\n1,0.25\n"

    surface = grid_search("dtr", {"max_depth": [1, 2], "max_leaf_nodes": [None]}, mean_ds, k = 3, seed = 0)
    path = tmp_path / "sweep.csv"
    write_sweep_csv(surface, str(path))
    lines = path.read_text().splitlines()
    assert lines[0] == "max_depth,max_leaf_nodes,mean_mse,std_mse"
    assert lines[1].startswith("1,none,")
    assert len(lines) == 3
