import numpy as np
import pytest
from scipy import stats

from pride.analysis import build_theta, estimation_error, kernel_gap
from pride.baselines import ridge_closed_form, semi_naive_bayes
from pride.core import (
    FeatureShare,
    Partition,
    ProtocolError,
    assemble_local_design,
    exchange_shares,
    local_designs,
    partition_features,
    party_seeds,
    party_share,
    party_sigmas,
    predict_global,
    predict_local,
    resolve_tau_subs,
    run_dual_loco,
    run_pride,
    solve_local,
)
from pride.data import SyntheticConfig, generate_confounded, standardize, train_test_split
from pride.transform import srht_apply, srht_new


def std_data(n, p, seed):
    from pride.data import DataSet

    r = np.random.default_rng(seed)
    X, mu, sd = standardize(r.standard_normal((n, p)) @ r.standard_normal((p, p)))
    y = X @ r.standard_normal(p) + r.standard_normal(n)
    return DataSet(X, y, mu, sd)


class TestPartition:
    def test_contiguous(self):
        part = partition_features(400, 2)
        np.testing.assert_array_equal(part.blocks[0], np.arange(200))
        np.testing.assert_array_equal(part.blocks[1], np.arange(200, 400))
        assert part.sizes == [200, 200]

    def test_singletons(self):
        assert [b.tolist() for b in partition_features(5, 5).blocks] == [[0], [1], [2], [3], [4]]

    def test_explicit(self):
        part = partition_features(3, scheme="explicit", sets=[[0, 2], [1]])
        assert part.K == 2
        np.testing.assert_array_equal(part.complement(0), [1])
        with pytest.raises(ValueError):
            partition_features(2, scheme="explicit", sets=[[0], [0, 1]])
        with pytest.raises(ValueError):
            partition_features(3, scheme="explicit", sets=[[0], [1]])

    def test_too_many_parties(self):
        with pytest.raises(ValueError):
            partition_features(3, 4)


def test_resolve_tau_subs():
    assert resolve_tau_subs(0.2, 200) == 40
    assert resolve_tau_subs(0.05, 2592) == 130
    assert resolve_tau_subs(0.01, 200) == 2
    assert resolve_tau_subs(25, 500) == 25


class TestShares:
    def test_zero_sigma_equals_plain_srht(self, rng):
        Xk = rng.standard_normal((30, 12))
        share = party_share(Xk, 5, 0.0, 11, 12)
        np.testing.assert_array_equal(share.payload, srht_apply(srht_new(12, 5, 11), Xk))

    def test_payload_shape(self, rng):
        share = party_share(rng.standard_normal((4, 2592)), 130, 1.0, 1, 2)
        assert share.payload.shape == (4, 130)
        assert not share.payload.flags.writeable

    def test_parties_are_independent(self, rng):
        X = rng.standard_normal((500, 40))
        part = partition_features(40, 2)
        s0, s1 = exchange_shares(X, part, 20, [1.0, 1.0], master_seed=3)
        corr = np.corrcoef(s0.payload.ravel(), s1.payload.ravel())[0, 1]
        assert abs(corr) < 0.05

    def test_seeds_are_distinct(self):
        assert len({*party_seeds(0, 0), *party_seeds(0, 1), *party_seeds(1, 0)}) == 6


class TestAssemble:
    def share(self, origin, n=6, t=2):
        return FeatureShare(origin, np.full((n, t), float(origin)), 0.0, 0, 0)

    def test_shape_and_order(self):
        d = assemble_local_design(0, np.zeros((6, 3)), [self.share(1)])
        assert d.matrix.shape == (6, 5) and d.tau == 3 and d.tau_K == 2
        d = assemble_local_design(1, np.zeros((6, 3)), [self.share(3), self.share(0), self.share(2)])
        np.testing.assert_array_equal(d.matrix[0, 3:], [0, 0, 2, 2, 3, 3])

    def test_cancer_shape(self, rng):
        X = rng.standard_normal((10, 2000))
        part = partition_features(2000, 4)
        designs = local_designs(X, part, exchange_shares(X, part, 100, [0.0] * 4, 0))
        assert all(d.matrix.shape == (10, 800) for d in designs)

    def test_value_semantics(self):
        payload = np.ones((6, 2))
        share = FeatureShare(1, payload, 0.0, 0, 0)
        d = assemble_local_design(0, np.zeros((6, 3)), [share])
        payload[:] = 9.0
        assert np.all(d.matrix[:, 3:] == 1.0)
        assert not d.matrix.flags.writeable

    @pytest.mark.parametrize("origins", [[0], [1, 1], []])
    def test_protocol_errors(self, origins):
        with pytest.raises(ProtocolError):
            assemble_local_design(0, np.zeros((6, 3)), [self.share(o) for o in origins], n_parties=2)

    def test_row_mismatch(self):
        with pytest.raises(ProtocolError):
            assemble_local_design(0, np.zeros((6, 3)), [self.share(1, n=5)])


def test_sigma_policies():
    assert party_sigmas([1.0, 2.0], None, 0.05, private=False) == [0.0, 0.0]
    s = party_sigmas([1.0, 2.0], 1.0, 0.05)
    assert s[1] == pytest.approx(2 * s[0])
    assert party_sigmas([1.0, 2.0], 1.0, 0.05, policy="max") == [s[1], s[1]]
    with pytest.raises(ValueError):
        party_sigmas([1.0], None, 0.05)


class TestRunPride:
    def test_single_party_is_ridge(self):
        data = std_data(80, 10, 0)
        res = run_pride(data, partition_features(10, 1), 1, 0.1, private=False, tol=1e-12,
                        epochs=3000)
        ref = ridge_closed_form(data.X, data.y, 0.1)
        assert np.linalg.norm(res.global_beta - ref) / np.linalg.norm(ref) < 1e-6
        mse = np.mean((data.y - predict_global(res, data.X)) ** 2)
        assert mse == pytest.approx(np.mean((data.y - data.X @ ref) ** 2), rel=1e-6)

    def test_rejects_unstandardized(self, rng):
        from pride.data import DataSet

        data = DataSet(rng.standard_normal((20, 4)) + 3, rng.standard_normal(20), None, None)
        with pytest.raises(ValueError, match="standardized"):
            run_pride(data, partition_features(4, 2), 1, 0.1, 1.0)

    def test_deterministic(self, small_synthetic):
        train, _ = small_synthetic
        part = partition_features(train.p, 2)
        a = run_pride(train, part, 0.2, 0.5, 2.0, master_seed=4)
        b = run_pride(train, part, 0.2, 0.5, 2.0, master_seed=4)
        np.testing.assert_array_equal(a.global_beta, b.global_beta)
        c = run_pride(train, part, 0.2, 0.5, 2.0, master_seed=5)
        assert not np.array_equal(a.global_beta, c.global_beta)

    def test_no_privacy_flag_is_zero_sigma(self, small_synthetic):
        train, _ = small_synthetic
        part = partition_features(train.p, 2)
        a = run_dual_loco(train, part, 0.1, 0.3, master_seed=2)
        b = run_pride(train, part, 0.1, 0.3, 5.0, master_seed=2, sigmas=0.0)
        np.testing.assert_array_equal(a.global_beta, b.global_beta)
        assert a.sigmas == [0.0, 0.0]

    def test_per_party_lambda_and_diagnostics(self, small_synthetic):
        train, _ = small_synthetic
        part = partition_features(train.p, 2)
        res = run_pride(train, part, 0.1, [0.2, 0.4], 1.0, solver="direct")
        assert res.lams == [0.2, 0.4] and res.tau_subs == [20, 20]
        assert res.diagnostics["solver"] == "direct"
        with pytest.raises(ValueError):
            run_pride(train, part, 0.1, [0.2], 1.0)

    def test_raw_block_purity(self, small_synthetic):
        train, _ = small_synthetic
        X, y = train.X, train.y
        part = partition_features(train.p, 2)
        shares = exchange_shares(X, part, 20, [1.0, 1.0], master_seed=0)
        swapped = [party_share(X[:, part.blocks[0]], 20, 1.0, 999, 998, origin=0), shares[1]]
        betas = []
        for sh in (shares, swapped):
            d = local_designs(X, part, sh)[0]
            st = solve_local(d, y, 0.5, solver="direct")
            betas.append(-(X[:, part.blocks[0]].T @ st.alpha) / (X.shape[0] * 0.5))
        np.testing.assert_array_equal(betas[0], betas[1])

    def test_prediction_paths(self, small_synthetic):
        train, test = small_synthetic
        part = partition_features(train.p, 2)
        res = run_pride(train, part, 0.2, 1.0, 5.0, solver="direct")
        assert predict_global(res, test.X).shape == (test.n,)
        zeroed = type(res)(**{**res.__dict__, "per_party_beta": [np.zeros_like(b) for b in res.per_party_beta]})
        np.testing.assert_array_equal(predict_global(zeroed, test.X), 0.0)
        assert predict_local(res, 1, test.X).shape == (test.n,)
        with pytest.raises(ValueError):
            predict_global(res, test.X[:, :-1])


def _default_replicate(seed):
    data = generate_confounded(SyntheticConfig(seed=seed))
    return train_test_split(data, 0.8, seed=seed + 100)


def test_dual_loco_beats_semi_nb_on_block_x():
    # fixed lambda = 1 for both methods, 10 seeds
    gaps = []
    for s in range(10):
        train, _ = _default_replicate(s)
        part = partition_features(train.p, 2)
        x = np.array(train.block_labels) == "X"
        dl = run_dual_loco(train, part, 0.2, 1.0, master_seed=s, solver="direct").global_beta
        nb = semi_naive_bayes(train, part, 1.0, solver="direct").beta
        tb = train.true_beta
        gaps.append(estimation_error(nb[x], tb[x]).normalized - estimation_error(dl[x], tb[x]).normalized)
    assert np.mean(gaps) > 0


def test_error_trend_in_epsilon():
    eps = [0.1, 0.5, 1, 2, 5, 20]
    errs = np.zeros((10, len(eps)))
    for s in range(10):
        train, _ = _default_replicate(s)
        part = partition_features(train.p, 2)
        for j, e in enumerate(eps):
            b = run_pride(train, part, 0.2, 1.0, e, master_seed=s, solver="direct").global_beta
            errs[s, j] = estimation_error(b, train.true_beta).normalized
    rho = stats.spearmanr(eps, errs.mean(axis=0)).statistic
    assert rho < 0


def test_kernel_gap_shrinks_with_tau_subs():
    train, _ = _default_replicate(0)
    part = partition_features(train.p, 2)
    gaps = []
    for frac in (0.05, 0.1, 0.2):
        t = resolve_tau_subs(frac, 200)
        g = []
        for s in range(5):
            projs = [srht_new(200, t, 1000 * s + k).dense() for k in range(2)]
            theta, order = build_theta(part, 0, projs)
            g.append(kernel_gap(train.X[:, order], theta))
        gaps.append(np.mean(g))
    assert gaps[0] > gaps[1] > gaps[2]
