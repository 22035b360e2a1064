"""Comparison estimators: semi-naive-Bayes, single machine, closed-form ridge."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from pride.dual_solver import LossKind, as_loss, sdca_solve, squared_dual_direct

RIDGE_LAMBDA_FLOOR = 1e-12


@dataclass
class BaselineResult:
    method: str
    beta: np.ndarray
    lam: float | list[float]
    blocks: list[np.ndarray] | None = None
    converged: bool = True


def ridge_closed_form(X, y, lam: float) -> np.ndarray:
    """``(X^T X + n lam I)^{-1} X^T y`` via the SVD; ``lam`` is floored at 1e-12."""
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float)
    if not (np.all(np.isfinite(X)) and np.all(np.isfinite(y))):
        raise ValueError("non-finite values in ridge input")
    n = X.shape[0]
    nlam = n * max(float(lam), RIDGE_LAMBDA_FLOOR)
    U, s, Vt = np.linalg.svd(X, full_matrices=False)
    return Vt.T @ (s / (s**2 + nlam) * (U.T @ y))


def _fit(X, y, lam, loss, seed, solver, epochs, tol):
    loss = as_loss(loss)
    if solver == "direct" and loss is LossKind.SQUARED:
        st = squared_dual_direct(X, y, lam)
    else:
        st = sdca_solve(X, y, lam, loss, epochs=epochs, tol=tol, seed=seed)
    return st.beta, st.converged


def single_machine(data, lam: float, loss="squared", seed: int = 0, *, solver="sdca",
                   epochs=500, tol=1e-8) -> BaselineResult:
    """Undistributed, unperturbed optimum on the full design."""
    beta, conv = _fit(data.X, data.y, lam, loss, seed, solver, epochs, tol)
    return BaselineResult("single_machine", beta, float(lam), converged=conv)


def semi_naive_bayes(data, partition, lam, loss="squared", seed: int = 0, *,
                     solver="sdca", epochs=500, tol=1e-8) -> BaselineResult:
    """Each party fits its own block alone; nothing is communicated.

    ``lam`` is a scalar or one value per party.
    """
    lams = [float(lam)] * partition.K if np.ndim(lam) == 0 else [float(v) for v in lam]
    if len(lams) != partition.K:
        raise ValueError(f"need {partition.K} lambdas, got {len(lams)}")
    beta = np.zeros(partition.p)
    blocks, conv = [], True
    for k, blk in enumerate(partition.blocks):
        b, c = _fit(data.X[:, blk], data.y, lams[k], loss, seed + k, solver, epochs, tol)
        beta[blk] = b
        blocks.append(b)
        conv &= c
    return BaselineResult("semi_nb", beta, lams[0] if len(set(lams)) == 1 else lams, blocks, conv)


def ridge_baseline(data, lam: float) -> BaselineResult:
    return BaselineResult("ridge_closed_form", ridge_closed_form(data.X, data.y, lam), float(lam))
