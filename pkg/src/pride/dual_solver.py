"""Stochastic dual coordinate ascent for l2-regularized linear models.

Primal (per-sample scaling)::

    P(b) = sum_i f_i(x_i^T b) + (n lam / 2) ||b||^2

Dual, written as a minimization::

    D(alpha) = sum_i f_i^*(alpha_i) + 1/(2 n lam) alpha^T X X^T alpha

with ``b = -(1/(n lam)) X^T alpha`` and ``P(b(alpha*)) = -D(alpha*)``.
The inner coordinate loops are compiled with numba.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numba
import numpy as np

from pride.rng import substream

_LOGISTIC_EDGE = 1e-12


class LossKind(str, enum.Enum):
    SQUARED = "squared"
    LOGISTIC = "logistic"


def as_loss(loss) -> LossKind:
    return loss if isinstance(loss, LossKind) else LossKind(str(loss).lower())


@dataclass
class DualState:
    alpha: np.ndarray
    primal_cache: np.ndarray  # (1/(n lam)) X^T alpha
    lam: float
    loss: LossKind
    epochs_run: int = 0
    converged: bool = False
    objective_history: list[float] = field(default_factory=list)

    @property
    def beta(self) -> np.ndarray:
        return -self.primal_cache


def _entropy(t):
    t = np.asarray(t, dtype=float)
    out = np.zeros_like(t)
    inner = (t > 0) & (t < 1)
    ti = t[inner]
    out[inner] = ti * np.log(ti) + (1 - ti) * np.log1p(-ti)
    return out


def conjugate_value(loss, alpha, y):
    """Fenchel conjugate ``f_i^*(alpha_i)``; vectorized over arrays.

    squared: ``alpha^2/2 + alpha y``; logistic (``y`` in {-1, +1}): with
    ``t = -alpha y`` in [0, 1], ``t ln t + (1 - t) ln(1 - t)``.
    """
    loss = as_loss(loss)
    alpha = np.asarray(alpha, dtype=float)
    y = np.asarray(y, dtype=float)
    if loss is LossKind.SQUARED:
        out = 0.5 * alpha**2 + alpha * y
    else:
        t = -alpha * y
        if np.any(t < -1e-15) or np.any(t > 1 + 1e-15):
            raise ValueError("logistic conjugate requires alpha*y in [-1, 0]")
        out = _entropy(np.clip(t, 0.0, 1.0))
    return float(out) if out.ndim == 0 else out


def primal_loss(loss, margins, y) -> np.ndarray:
    loss = as_loss(loss)
    if loss is LossKind.SQUARED:
        return 0.5 * (y - margins) ** 2
    return np.logaddexp(0.0, -y * margins)


def primal_objective(beta, X, y, lam, loss) -> float:
    X = np.asarray(X, dtype=float)
    n = X.shape[0]
    return float(np.sum(primal_loss(loss, X @ beta, y)) + 0.5 * n * lam * beta @ beta)


def primal_gradient(beta, X, y, lam, loss) -> np.ndarray:
    loss = as_loss(loss)
    X = np.asarray(X, dtype=float)
    n = X.shape[0]
    m = X @ beta
    if loss is LossKind.SQUARED:
        d = m - y
    else:
        d = -y / (1.0 + np.exp(y * m))
    return X.T @ d + n * lam * beta


def dual_objective(state_or_alpha, X, y, lam=None, loss=None) -> float:
    """Minimization-form dual objective ``D(alpha)``.

    Accepts a :class:`DualState` (lam/loss taken from it) or a raw alpha.
    """
    if isinstance(state_or_alpha, DualState):
        alpha = state_or_alpha.alpha
        lam = state_or_alpha.lam if lam is None else lam
        loss = state_or_alpha.loss if loss is None else loss
    else:
        alpha = np.asarray(state_or_alpha, dtype=float)
    X = np.asarray(X, dtype=float)
    n = X.shape[0]
    w = X.T @ alpha
    return float(np.sum(conjugate_value(loss, alpha, y)) + (w @ w) / (2.0 * n * lam))


def primal_recover(X_raw, alpha, lam) -> np.ndarray:
    """Coefficients ``-(1/(n lam)) X_raw^T alpha`` for a party's raw block."""
    X_raw = np.asarray(X_raw, dtype=float)
    alpha = np.asarray(alpha, dtype=float)
    if X_raw.ndim != 2 or X_raw.shape[0] != alpha.shape[0]:
        raise ValueError(
            f"row count of X_raw {X_raw.shape} does not match alpha length {alpha.shape}"
        )
    n = X_raw.shape[0]
    return -(X_raw.T @ alpha) / (n * lam)


@numba.njit(cache=True)
def _squared_epoch(X, y, alpha, v, sqnorm, order, nlam):
    max_delta = 0.0
    d = X.shape[1]
    for idx in range(order.shape[0]):
        i = order[idx]
        xv = 0.0
        for j in range(d):
            xv += X[i, j] * v[j]
        q = sqnorm[i] / nlam
        new = -(y[i] + xv - q * alpha[i]) / (1.0 + q)
        delta = new - alpha[i]
        if delta != 0.0:
            alpha[i] = new
            s = delta / nlam
            for j in range(d):
                v[j] += s * X[i, j]
            if abs(delta) > max_delta:
                max_delta = abs(delta)
    return max_delta


@numba.njit(cache=True)
def _logistic_coord(t0, kii, yc, nlam, edge):
    # minimize g(t) = t ln t + (1-t) ln(1-t) + (kii t^2 - 2 yc t)/(2 nlam) over (0, 1)
    lo = edge
    hi = 1.0 - edge
    t = min(max(t0, lo), hi)
    for _ in range(20):
        g = math.log(t / (1.0 - t)) + (kii * t - yc) / nlam
        if abs(g) < 1e-13:
            return t
        if g > 0.0:
            hi = t
        else:
            lo = t
        h = 1.0 / (t * (1.0 - t)) + kii / nlam
        step = t - g / h
        if step <= lo or step >= hi:
            step = 0.5 * (lo + hi)
        t = step
        if hi - lo < 1e-15:
            break
    return t


@numba.njit(cache=True)
def _logistic_epoch(X, y, alpha, v, sqnorm, order, nlam, edge):
    max_delta = 0.0
    d = X.shape[1]
    for idx in range(order.shape[0]):
        i = order[idx]
        xv = 0.0
        for j in range(d):
            xv += X[i, j] * v[j]
        kii = sqnorm[i]
        # c = sum_{j != i} K_ij alpha_j
        c = nlam * xv - kii * alpha[i]
        t0 = -alpha[i] * y[i]
        t = _logistic_coord(t0, kii, y[i] * c, nlam, edge)
        new = -y[i] * t
        delta = new - alpha[i]
        if delta != 0.0:
            alpha[i] = new
            s = delta / nlam
            for j in range(d):
                v[j] += s * X[i, j]
            if abs(delta) > max_delta:
                max_delta = abs(delta)
    return max_delta


def _validate(X, y, lam, loss):
    X = np.ascontiguousarray(X, dtype=float)
    y = np.ascontiguousarray(y, dtype=float)
    if X.ndim != 2 or X.shape[0] < 1:
        raise ValueError(f"design must be a nonempty matrix, got shape {X.shape}")
    if y.shape != (X.shape[0],):
        raise ValueError(f"response length {y.shape} does not match {X.shape[0]} rows")
    if not (np.all(np.isfinite(X)) and np.all(np.isfinite(y))):
        raise ValueError("non-finite values in design or response")
    if not lam > 0 or not math.isfinite(lam):
        raise ValueError(f"lam must be positive and finite, got {lam}")
    if loss is LossKind.LOGISTIC and not np.all(np.abs(y) == 1.0):
        raise ValueError("logistic loss requires labels in {-1, +1}")
    return X, y


def sdca_solve(
    Xbar,
    y,
    lam: float,
    loss="squared",
    epochs: int = 500,
    tol: float = 1e-8,
    seed: int = 0,
    alpha0=None,
) -> DualState:
    """Minimize the dual objective by randomized coordinate descent.

    Each epoch visits the coordinates in a fresh seeded permutation. Stops when
    the largest coordinate change in an epoch drops below ``tol`` or after
    ``epochs`` passes; in the latter case ``converged`` is False.

    Squared loss uses the exact coordinate minimizer; logistic loss uses a
    safeguarded Newton/bisection step on the interior of ``alpha*y in [-1, 0]``.
    """
    loss = as_loss(loss)
    X, y = _validate(Xbar, y, lam, loss)
    n = X.shape[0]
    nlam = n * lam
    if alpha0 is None:
        alpha = np.zeros(n) if loss is LossKind.SQUARED else -0.5 * y
    else:
        alpha = np.array(alpha0, dtype=float)
    v = X.T @ alpha / nlam
    sqnorm = np.einsum("ij,ij->i", X, X)
    rng = substream(seed, "sdca-permutation")

    state = DualState(alpha, v, float(lam), loss)
    state.objective_history.append(dual_objective(state, X, y))
    for epoch in range(int(epochs)):
        order = rng.permutation(n)
        if loss is LossKind.SQUARED:
            max_delta = _squared_epoch(X, y, alpha, v, sqnorm, order, nlam)
        else:
            max_delta = _logistic_epoch(X, y, alpha, v, sqnorm, order, nlam, _LOGISTIC_EDGE)
        state.epochs_run = epoch + 1
        state.objective_history.append(dual_objective(state, X, y))
        if max_delta < tol:
            state.converged = True
            break
    # drop accumulated drift in the incremental cache
    state.primal_cache = X.T @ alpha / nlam
    return state


def squared_dual_direct(Xbar, y, lam: float) -> DualState:
    """Exact squared-loss dual optimum ``alpha = -(I + K/(n lam))^{-1} y``.

    Used where many lambdas are solved on one design (cross-validation);
    SDCA converges to the same point.
    """
    X, y = _validate(Xbar, y, lam, LossKind.SQUARED)
    return squared_dual_path(X, y, [lam])[0]


def squared_dual_path(Xbar, y, lams) -> list[DualState]:
    """Exact squared-loss dual optima for several lambdas from one eigendecomposition."""
    X = np.asarray(Xbar, dtype=float)
    y = np.asarray(y, dtype=float)
    n = X.shape[0]
    if X.shape[1] < n:
        # alpha = -(y - X b) with b the ridge solution; work in feature space
        U, s, Vt = np.linalg.svd(X, full_matrices=False)
        Uty = U.T @ y
    else:
        evals, U = np.linalg.eigh(X @ X.T)
        s = np.sqrt(np.clip(evals, 0.0, None))
        Uty = U.T @ y
    states = []
    for lam in lams:
        if not lam > 0:
            raise ValueError(f"lam must be positive, got {lam}")
        nlam = n * lam
        # (I + K/nlam)^{-1} y = y - U diag(s^2/(s^2 + nlam)) U^T y
        alpha = -(y - U @ (s**2 / (s**2 + nlam) * Uty))
        st = DualState(alpha, X.T @ alpha / nlam, float(lam), LossKind.SQUARED, 0, True)
        states.append(st)
    return states
