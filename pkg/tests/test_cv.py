import numpy as np
import pytest
from scipy import stats

from pride.core import LocalDesign, partition_features
from pride.cv import (
    DEFAULT_LAMBDA_GRID,
    CVTable,
    dual_path,
    fit_predict_cv,
    global_cv,
    kfold_indices,
    local_cv,
)
from pride.baselines import ridge_closed_form
from pride.data import SyntheticConfig, generate_confounded, train_test_split


def test_folds_partition_rows():
    folds = kfold_indices(23, 5, seed=1)
    assert sorted(np.concatenate(folds).tolist()) == list(range(23))
    assert [f.size for f in folds] == [5, 5, 5, 4, 4]
    assert all(np.array_equal(a, b) for a, b in zip(folds, kfold_indices(23, 5, seed=1)))
    with pytest.raises(ValueError):
        kfold_indices(3, 5, 0)
    with pytest.raises(ValueError):
        kfold_indices(10, 1, 0)


def test_single_element_grid(small_synthetic):
    train, _ = small_synthetic
    lam, table = global_cv(train, partition_features(train.p, 2), 0.1, [0.7], 1.0)
    assert lam == 0.7 and table.fold_scores.shape == (1, 5)


def test_grid_validation(small_synthetic):
    train, _ = small_synthetic
    with pytest.raises(ValueError):
        global_cv(train, partition_features(train.p, 2), 0.1, [], 1.0)
    with pytest.raises(ValueError):
        global_cv(train, partition_features(train.p, 2), 0.1, [0.1, -1.0], 1.0)


def test_table_rows():
    t = CVTable(np.array([0.1, 1.0]), np.array([[2.0, 4.0], [1.0, 1.0]]))
    assert t.best_lam == 1.0 and t.best_index == 1
    assert list(t.rows())[0] == (0.1, 3.0, [2.0, 4.0])


def test_sdca_path_matches_direct(rng):
    X = rng.standard_normal((40, 6))
    y = X @ rng.standard_normal(6) + rng.standard_normal(40)
    lams = [0.01, 0.1, 1.0]
    direct = dual_path(X, y, lams, "squared")
    sdca = dual_path(X, y, lams, "squared", solver="sdca", tol=1e-12, epochs=5000)
    for a, b in zip(direct, sdca):
        np.testing.assert_allclose(a, b, atol=1e-6)


def test_logistic_cv_runs(rng):
    X = rng.standard_normal((60, 4))
    y = np.where(X[:, 0] + 0.3 * rng.standard_normal(60) > 0, 1.0, -1.0)
    lam, table = local_cv(LocalDesign(0, X, 4), y, [1e-3, 1e-1, 10.0], folds=3, loss="logistic",
                          solver="sdca")
    assert lam in (1e-3, 1e-1) and np.all(table.fold_scores > 0)


def test_single_party_local_equals_global(small_synthetic):
    train, _ = small_synthetic
    part = partition_features(train.p, 1)
    g, gt = global_cv(train, part, 1, DEFAULT_LAMBDA_GRID, private=False, seed=3)
    l, lt = local_cv(LocalDesign(0, train.X, train.p), train.y, DEFAULT_LAMBDA_GRID, seed=3)
    assert g == l
    np.testing.assert_allclose(gt.fold_scores, lt.fold_scores, rtol=1e-10)


def test_fit_predict_cv_matches_single_party_cv(small_synthetic):
    train, _ = small_synthetic
    grid = [0.01, 0.1, 1.0]
    _, ref = global_cv(train, partition_features(train.p, 1), 1, grid, private=False, seed=2)
    _, gen = fit_predict_cv(lambda Xt, yt, Xv, lam: Xv @ ridge_closed_form(Xt, yt, lam),
                            train.X, train.y, grid, seed=2)
    np.testing.assert_allclose(gen.fold_scores, ref.fold_scores, rtol=1e-8)


def test_no_privacy_selection_near_single_machine_optimum():
    for s in range(3):
        train, _ = train_test_split(generate_confounded(SyntheticConfig(seed=s)), 0.8, seed=s + 100)
        lam, _ = global_cv(train, partition_features(400, 2), 0.2, private=False, seed=s)
        _, sm = global_cv(train, partition_features(400, 1), 1, private=False, seed=s)
        i = int(np.flatnonzero(sm.lams == lam)[0])
        assert sm.mean_scores[i] <= 1.05 * sm.mean_scores.min()


@pytest.mark.xfail(strict=True, reason="selected lambda rises as epsilon falls on this generator; "
                   "the rank-tau_subs noise does not act as an isotropic ridge when n > tau_subs")
def test_global_lambda_falls_with_epsilon():
    eps = [0.25, 1, 5, 20]
    idx = np.zeros((10, len(eps)))
    for s in range(10):
        train, _ = train_test_split(generate_confounded(SyntheticConfig(seed=s)), 0.8, seed=s + 100)
        part = partition_features(400, 2)
        for j, e in enumerate(eps):
            lam, t = global_cv(train, part, 0.2, epsilon=e, seed=s)
            idx[s, j] = t.best_index
    assert stats.spearmanr(eps, idx.mean(axis=0)).statistic >= 0
