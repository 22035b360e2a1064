import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from pride.baselines import ridge_closed_form
from pride.dual_solver import (
    DualState,
    LossKind,
    conjugate_value,
    dual_objective,
    primal_gradient,
    primal_objective,
    primal_recover,
    sdca_solve,
    squared_dual_direct,
    squared_dual_path,
)


def ridge_instance(n, d, seed):
    r = np.random.default_rng(seed)
    X = r.standard_normal((n, d))
    y = X @ r.standard_normal(d) + 0.5 * r.standard_normal(n)
    return X, y


def logistic_instance(n, d, seed):
    r = np.random.default_rng(seed)
    X = r.standard_normal((n, d))
    y = np.where(X @ r.standard_normal(d) + r.standard_normal(n) > 0, 1.0, -1.0)
    return X, y


def fd_gradient(f, b, h=1e-5):
    g = np.empty_like(b)
    for j in range(b.size):
        e = np.zeros_like(b)
        e[j] = h
        g[j] = (f(b + e) - f(b - e)) / (2 * h)
    return g


class TestConjugate:
    def test_squared_values(self):
        assert conjugate_value("squared", 2.0, 0.0) == 2.0
        assert conjugate_value("squared", -1.0, 1.0) == -0.5

    def test_logistic_midpoint(self):
        assert conjugate_value("logistic", -0.5, 1.0) == pytest.approx(-math.log(2), abs=1e-12)
        assert conjugate_value("logistic", 0.5, -1.0) == pytest.approx(-math.log(2), abs=1e-12)

    def test_logistic_endpoints_and_domain(self):
        assert conjugate_value("logistic", 0.0, 1.0) == 0.0
        assert conjugate_value("logistic", -1.0, 1.0) == 0.0
        with pytest.raises(ValueError):
            conjugate_value("logistic", 0.2, 1.0)

    @pytest.mark.parametrize("a", [-0.9, -0.5, -0.1])
    def test_logistic_matches_numerical_sup(self, a):
        u = np.linspace(-40, 40, 400_001)
        sup = np.max(a * u - np.logaddexp(0.0, -u))
        assert conjugate_value("logistic", a, 1.0) == pytest.approx(sup, abs=1e-6)


def test_sdca_matches_ridge():
    X, y = ridge_instance(50, 20, 0)
    st_ = sdca_solve(X, y, 0.1, epochs=1000, tol=1e-10, seed=3)
    ref = ridge_closed_form(X, y, 0.1)
    assert st_.converged
    assert np.linalg.norm(st_.beta - ref) / np.linalg.norm(ref) < 1e-6


def test_zero_response_gives_zero_solution():
    X, _ = ridge_instance(30, 5, 1)
    st_ = sdca_solve(X, np.zeros(30), 0.5)
    np.testing.assert_array_equal(st_.alpha, 0.0)
    np.testing.assert_array_equal(st_.beta, 0.0)


@pytest.mark.parametrize("loss", ["squared", "logistic"])
def test_dual_objective_monotone(loss):
    X, y = (ridge_instance if loss == "squared" else logistic_instance)(80, 15, 4)
    hist = np.array(sdca_solve(X, y, 0.05, loss, epochs=50, tol=0.0, seed=1).objective_history)
    assert np.all(np.diff(hist) <= 1e-9 * np.abs(hist[:-1]).max())


def test_primal_cache_consistent_and_gap_closes():
    X, y = ridge_instance(60, 25, 2)
    lam = 0.2
    s = sdca_solve(X, y, lam, tol=1e-12, epochs=2000)
    np.testing.assert_allclose(s.primal_cache, X.T @ s.alpha / (60 * lam), atol=1e-8)
    gap = primal_objective(s.beta, X, y, lam, "squared") + dual_objective(s, X, y)
    assert abs(gap) < 1e-6


def test_logistic_gradient_matches_finite_differences():
    X, y = logistic_instance(120, 10, 5)
    lam = 0.01
    f = lambda b: primal_objective(b, X, y, lam, "logistic")
    b0 = np.random.default_rng(0).standard_normal(10)
    g, g_fd = primal_gradient(b0, X, y, lam, "logistic"), fd_gradient(f, b0)
    assert np.linalg.norm(g - g_fd) / np.linalg.norm(g_fd) < 1e-4


def test_logistic_solution_is_stationary():
    X, y = logistic_instance(120, 10, 6)
    lam = 0.01
    s = sdca_solve(X, y, lam, "logistic", epochs=2000, tol=1e-12)
    assert s.converged
    t = -s.alpha * y
    assert np.all((t >= 0) & (t <= 1))
    f = lambda b: primal_objective(b, X, y, lam, "logistic")
    g_fd = fd_gradient(f, s.beta)
    # compare with the size of the loss gradient at beta = 0
    scale = np.linalg.norm(primal_gradient(np.zeros(10), X, y, lam, "logistic"))
    assert np.linalg.norm(g_fd) / scale < 1e-4
    assert primal_objective(s.beta, X, y, lam, "logistic") + dual_objective(s, X, y) < 1e-6


def test_permutation_seed_does_not_change_optimum():
    X, y = ridge_instance(70, 30, 7)
    a = sdca_solve(X, y, 0.05, seed=1, tol=1e-11, epochs=3000).beta
    b = sdca_solve(X, y, 0.05, seed=2, tol=1e-11, epochs=3000).beta
    np.testing.assert_allclose(a, b, atol=1e-5)


def test_nonconvergence_is_flagged():
    X, y = ridge_instance(100, 40, 8)
    s = sdca_solve(X, y, 1e-4, epochs=2, tol=1e-14)
    assert not s.converged and s.epochs_run == 2


@pytest.mark.parametrize("bad", [dict(lam=0.0), dict(lam=-1.0), dict(y=np.array([np.nan] + [0.0] * 9))])
def test_rejects_invalid_input(bad):
    X = np.ones((10, 2))
    kw = {"y": np.zeros(10), "lam": 1.0, **bad}
    with pytest.raises(ValueError):
        sdca_solve(X, kw["y"], kw["lam"])


def test_logistic_rejects_non_sign_labels():
    with pytest.raises(ValueError):
        sdca_solve(np.ones((4, 2)), np.array([0.0, 1, 1, -1]), 1.0, "logistic")


def test_dual_objective_dense_oracle():
    r = np.random.default_rng(9)
    X, y, a = r.standard_normal((10, 5)), r.standard_normal(10), r.standard_normal(10)
    lam = 0.3
    dense = sum(0.5 * a[i] ** 2 + a[i] * y[i] for i in range(10))
    dense += np.sum((X.T @ a) ** 2) / (2 * 10 * lam)
    assert dual_objective(a, X, y, lam, "squared") == pytest.approx(dense, abs=1e-10)
    assert dual_objective(np.zeros(10), X, y, lam, "squared") == 0.0


def test_primal_recover():
    r = np.random.default_rng(10)
    X, a = r.standard_normal((12, 4)), r.standard_normal(12)
    np.testing.assert_array_equal(primal_recover(X, np.zeros(12), 1.0), 0.0)
    np.testing.assert_allclose(primal_recover(X, 3 * a, 0.5), 3 * primal_recover(X, a, 0.5))
    with pytest.raises(ValueError):
        primal_recover(X, np.zeros(11), 1.0)


@settings(max_examples=25, deadline=None)
@given(st.integers(5, 60), st.integers(1, 80), st.floats(1e-3, 10.0), st.integers(0, 10**6))
def test_direct_solver_matches_ridge(n, d, lam, seed):
    X, y = ridge_instance(n, d, seed)
    ref = ridge_closed_form(X, y, lam)
    np.testing.assert_allclose(squared_dual_direct(X, y, lam).beta, ref, rtol=1e-8, atol=1e-10)


def test_path_matches_single_solves():
    X, y = ridge_instance(40, 60, 11)
    lams = [0.01, 0.1, 1.0]
    for lam, s in zip(lams, squared_dual_path(X, y, lams)):
        assert isinstance(s, DualState) and s.loss is LossKind.SQUARED
        np.testing.assert_allclose(s.beta, ridge_closed_form(X, y, lam), rtol=1e-8, atol=1e-12)
