"""Choosing lambda by k-fold cross-validation.

*Global* CV adds up the parties' partial predictions on held-out rows and
scores them on the global objective; the noisy shares are released once per
fold and reused across the lambda grid. *Local* CV lets each party score
lambdas on its own local design only, so no prediction leaves the party.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from pride.core import (
    LocalDesign,
    Partition,
    exchange_shares,
    local_designs,
    party_sigmas,
    party_thetas,
)
from pride.dual_solver import LossKind, as_loss, primal_recover, sdca_solve, squared_dual_path
from pride.rng import derive_seed, substream

DEFAULT_LAMBDA_GRID = tuple(np.logspace(-4, 3, 30))


@dataclass
class CVTable:
    lams: np.ndarray
    fold_scores: np.ndarray  # (n_lams, n_folds)

    @property
    def mean_scores(self) -> np.ndarray:
        return self.fold_scores.mean(axis=1)

    @property
    def best_index(self) -> int:
        return int(np.argmin(self.mean_scores))

    @property
    def best_lam(self) -> float:
        return float(self.lams[self.best_index])

    def rows(self):
        for lam, scores in zip(self.lams, self.fold_scores):
            yield float(lam), float(scores.mean()), [float(s) for s in scores]


def kfold_indices(n: int, folds: int, seed: int) -> list[np.ndarray]:
    """Disjoint, sorted validation index sets covering ``range(n)``."""
    if folds < 2:
        raise ValueError(f"need at least 2 folds, got {folds}")
    if n < folds:
        raise ValueError(f"{n} rows cannot fill {folds} folds")
    perm = substream(seed, "cv-folds").permutation(n)
    return [np.sort(f) for f in np.array_split(perm, folds)]


def _check_grid(lam_grid) -> np.ndarray:
    grid = np.asarray(lam_grid, dtype=float).ravel()
    if grid.size == 0 or np.any(grid <= 0):
        raise ValueError("lambda grid must be nonempty and positive")
    return grid


def validation_score(y, y_hat, loss) -> float:
    if as_loss(loss) is LossKind.SQUARED:
        return float(np.mean((y - y_hat) ** 2))
    return float(np.mean(np.logaddexp(0.0, -y * y_hat)))


def dual_path(X, y, lams, loss, solver="direct", seed=0, epochs=500, tol=1e-8):
    """Dual solutions for every lambda of the grid on one design."""
    loss = as_loss(loss)
    if loss is LossKind.SQUARED and solver == "direct":
        return [st.alpha for st in squared_dual_path(X, y, lams)]
    # descending lambda with warm starts, returned in grid order
    out, warm = [None] * len(lams), None
    for i in np.argsort(lams)[::-1]:
        st = sdca_solve(X, y, lams[i], loss, epochs=epochs, tol=tol, seed=seed, alpha0=warm)
        out[i] = warm = st.alpha
    return out


def global_cv(
    data,
    partition: Partition,
    tau_subs,
    lam_grid=DEFAULT_LAMBDA_GRID,
    epsilon: float | None = None,
    delta: float = 0.05,
    folds: int = 5,
    loss="squared",
    seed: int = 0,
    *,
    private: bool = True,
    sigma_policy: str = "per_party",
    solver: str = "direct",
    communicate: bool = True,
) -> tuple[float, CVTable]:
    """One lambda for all parties, scored on summed partial predictions.

    ``communicate=False`` skips the share exchange (semi-naive-Bayes).
    """
    grid = _check_grid(lam_grid)
    X = np.asarray(data.X, dtype=float)
    y = np.asarray(data.y, dtype=float)
    val_sets = kfold_indices(X.shape[0], folds, seed)
    scores = np.zeros((grid.size, folds))
    for f, va in enumerate(val_sets):
        tr = np.setdiff1d(np.arange(X.shape[0]), va)
        Xtr, ytr = X[tr], y[tr]
        fold_seed = derive_seed(seed, f"cv-fold-{f}")
        shares = []
        if communicate and partition.K > 1:
            thetas = party_thetas(Xtr, partition)
            sigmas = party_sigmas(thetas, epsilon, delta, private, sigma_policy)
            shares = exchange_shares(Xtr, partition, tau_subs, sigmas, fold_seed)
        designs = local_designs(Xtr, partition, shares) if shares or partition.K == 1 else [
            LocalDesign(k, Xtr[:, b], b.size) for k, b in enumerate(partition.blocks)
        ]
        preds = np.zeros((grid.size, va.size))
        for k, design in enumerate(designs):
            blk = partition.blocks[k]
            alphas = dual_path(design.matrix, ytr, grid, loss, solver,
                               derive_seed(fold_seed, f"party-{k}-sdca"))
            for i, (lam, alpha) in enumerate(zip(grid, alphas)):
                preds[i] += X[va][:, blk] @ primal_recover(Xtr[:, blk], alpha, lam)
        for i in range(grid.size):
            scores[i, f] = validation_score(y[va], preds[i], loss)
    table = CVTable(grid, scores)
    return table.best_lam, table


def local_cv(
    party_design: LocalDesign,
    y,
    lam_grid=DEFAULT_LAMBDA_GRID,
    folds: int = 5,
    loss="squared",
    seed: int = 0,
    *,
    solver: str = "direct",
) -> tuple[float, CVTable]:
    """Lambda chosen by one party on its own local design."""
    grid = _check_grid(lam_grid)
    Xbar = np.asarray(party_design.matrix, dtype=float)
    y = np.asarray(y, dtype=float)
    val_sets = kfold_indices(Xbar.shape[0], folds, seed)
    scores = np.zeros((grid.size, folds))
    for f, va in enumerate(val_sets):
        tr = np.setdiff1d(np.arange(Xbar.shape[0]), va)
        fold_seed = derive_seed(seed, f"cv-fold-{f}")
        alphas = dual_path(Xbar[tr], y[tr], grid, loss, solver,
                           derive_seed(fold_seed, f"party-{party_design.party}-sdca"))
        for i, (lam, alpha) in enumerate(zip(grid, alphas)):
            w = primal_recover(Xbar[tr], alpha, lam)
            scores[i, f] = validation_score(y[va], Xbar[va] @ w, loss)
    table = CVTable(grid, scores)
    return table.best_lam, table


def local_cv_all(data, partition, tau_subs, lam_grid=DEFAULT_LAMBDA_GRID, epsilon=None,
                 delta=0.05, folds=5, loss="squared", seed=0, *, private=True,
                 sigma_policy="per_party", master_seed=0, solver="direct"):
    """Local CV for every party on the designs a full run with ``master_seed`` would build."""
    X = np.asarray(data.X, dtype=float)
    sigmas = party_sigmas(party_thetas(X, partition), epsilon, delta, private, sigma_policy)
    shares = exchange_shares(X, partition, tau_subs, sigmas, master_seed) if partition.K > 1 else []
    designs = local_designs(X, partition, shares)
    results = [local_cv(d, data.y, lam_grid, folds, loss, seed, solver=solver) for d in designs]
    return [r[0] for r in results], [r[1] for r in results]


def fit_predict_cv(fit_predict, X, y, lam_grid, folds=5, loss="squared", seed=0):
    """Generic global CV: ``fit_predict(X_tr, y_tr, X_va, lam) -> y_hat``."""
    grid = _check_grid(lam_grid)
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float)
    val_sets = kfold_indices(X.shape[0], folds, seed)
    scores = np.zeros((grid.size, folds))
    for f, va in enumerate(val_sets):
        tr = np.setdiff1d(np.arange(X.shape[0]), va)
        for i, lam in enumerate(grid):
            scores[i, f] = validation_score(y[va], fit_predict(X[tr], y[tr], X[va], lam), loss)
    table = CVTable(grid, scores)
    return table.best_lam, table
