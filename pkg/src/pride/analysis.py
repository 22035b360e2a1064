"""Error metrics and theoretical diagnostics (error bound, kernel gap, noise-as-ridge)."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from pride.rng import substream


class EstimationError(NamedTuple):
    l2: float
    normalized: float  # ||b - ref||^2 / ||ref||^2


def estimation_error(beta_hat, beta_ref) -> EstimationError:
    beta_hat = np.asarray(beta_hat, dtype=float)
    beta_ref = np.asarray(beta_ref, dtype=float)
    if beta_hat.shape != beta_ref.shape:
        raise ValueError(f"shape mismatch {beta_hat.shape} vs {beta_ref.shape}")
    ref2 = float(beta_ref @ beta_ref)
    if ref2 == 0:
        raise ValueError("reference coefficients are zero; normalized error undefined")
    diff = beta_hat - beta_ref
    d2 = float(diff @ diff)
    return EstimationError(math.sqrt(d2), d2 / ref2)


def coefficient_correlation(beta_hat, beta_ref) -> float:
    a = np.asarray(beta_hat, dtype=float)
    b = np.asarray(beta_ref, dtype=float)
    if a.shape != b.shape:
        raise ValueError(f"shape mismatch {a.shape} vs {b.shape}")
    a = a - a.mean()
    b = b - b.mean()
    na, nb = np.linalg.norm(a), np.linalg.norm(b)
    if na == 0 or nb == 0:
        raise ValueError("correlation undefined for a constant coefficient vector")
    return float(np.clip(a @ b / (na * nb), -1.0, 1.0))


def prediction_mse_normalized(y, y_hat) -> float:
    """``||y - y_hat||^2 / ||y - mean(y)||^2``."""
    y = np.asarray(y, dtype=float)
    y_hat = np.asarray(y_hat, dtype=float)
    denom = float(np.sum((y - y.mean()) ** 2))
    if denom == 0:
        raise ValueError("constant response; normalized MSE undefined")
    return float(np.sum((y - y_hat) ** 2)) / denom


def spectral_norm(A, tol: float = 1e-6, max_iter: int = 10_000, seed: int = 0) -> float:
    """Largest singular value by power iteration on ``A^T A``."""
    A = np.asarray(A, dtype=float)
    if not np.any(A):
        return 0.0
    v = substream(seed, "power-iteration").standard_normal(A.shape[1])
    v /= np.linalg.norm(v)
    est = 0.0
    for _ in range(max_iter):
        w = A.T @ (A @ v)
        nw = np.linalg.norm(w)
        if nw == 0:
            return 0.0
        new = math.sqrt(nw)
        v = w / nw
        if abs(new - est) <= tol * max(new, 1e-300):
            return new
        est = new
    return est


def effective_rank(X) -> float:
    """``tr(X^T X) / ||X||_2^2``."""
    X = np.asarray(X, dtype=float)
    top = np.linalg.norm(X, 2)
    if top == 0:
        raise ValueError("effective rank of a zero matrix is undefined")
    return float(np.sum(X * X)) / top**2


def d_min(X) -> float:
    """Smallest singular value above ``max(n, p) * s_max * 1e-12``."""
    X = np.asarray(X, dtype=float)
    s = np.linalg.svd(X, compute_uv=False)
    if s.size == 0 or s[0] == 0:
        raise ValueError("d_min of a zero matrix is undefined")
    cutoff = max(X.shape) * s[0] * 1e-12
    return float(s[s > cutoff].min())


def variance_components(X, fractions=(0.8, 0.9)) -> dict[float, int]:
    """Number of principal components explaining each fraction of the variance."""
    s = np.linalg.svd(np.asarray(X, dtype=float), compute_uv=False)
    share = np.cumsum(s**2) / np.sum(s**2)
    return {f: int(np.searchsorted(share, f) + 1) for f in fractions}


def rho(r: int, tau_K: int, C_const: float = 1.0, xi: float = 0.05) -> float:
    """``C sqrt(r log(2r/xi) / tau_K)``."""
    if r < 1 or tau_K < 1 or not C_const > 0 or not 0 < xi < 1:
        raise ValueError("rho needs r >= 1, tau_K >= 1, C > 0 and xi in (0, 1)")
    return C_const * math.sqrt(r * math.log(2 * r / xi) / tau_K)


@dataclass(frozen=True)
class BoundInputs:
    r: int
    tau_K: int
    sigma: float
    d_min: float
    beta_star_norm: float
    K: int
    C_const: float = 1.0
    xi: float = 0.05


class Bound(NamedTuple):
    term_i: float
    term_ii: float
    total: float
    rho: float
    vacuous: bool


def error_bound(inp: BoundInputs) -> Bound:
    """Estimation error bound; ``vacuous=True`` (and infinite terms) when rho >= 1/2."""
    if not inp.d_min > 0:
        raise ValueError("d_min must be positive")
    if inp.sigma < 0:
        raise ValueError("sigma must be nonnegative")
    rh = rho(inp.r, inp.tau_K, inp.C_const, inp.xi)
    if rh >= 0.5:
        return Bound(math.inf, math.inf, math.inf, rh, True)
    lead = math.sqrt(inp.K) * rh / (1 - 2 * rh) * inp.beta_star_norm
    s, t, d = inp.sigma, inp.tau_K, inp.d_min
    term_i = lead
    term_ii = lead * (s / d) * (2 + (s * t + s * t**2) / d)
    return Bound(term_i, term_ii, term_i + term_ii, rh, False)


def build_theta(partition, party: int, projections) -> tuple[np.ndarray, np.ndarray]:
    """Block-diagonal ``diag(I, Pi_l ...)`` for ``party`` and the matching column order.

    ``projections[l]`` is party l's dense ``tau_l x tau_subs`` matrix. Returns
    ``(Theta, order)``; apply as ``X[:, order] @ Theta``.
    """
    blocks = [partition.blocks[party]] + [
        b for l, b in enumerate(partition.blocks) if l != party
    ]
    mats = [np.eye(partition.blocks[party].size)] + [
        np.asarray(projections[l]) for l in range(partition.K) if l != party
    ]
    rows = sum(m.shape[0] for m in mats)
    cols = sum(m.shape[1] for m in mats)
    theta = np.zeros((rows, cols))
    r = c = 0
    for m in mats:
        theta[r : r + m.shape[0], c : c + m.shape[1]] = m
        r += m.shape[0]
        c += m.shape[1]
    return theta, np.concatenate(blocks)


def kernel_gap(X, Theta, E=None, tol: float = 1e-6) -> float:
    """``||X X^T - (X Theta + E)(X Theta + E)^T||_2`` by power iteration."""
    X = np.asarray(X, dtype=float)
    Theta = np.asarray(Theta, dtype=float)
    if X.shape[1] != Theta.shape[0]:
        raise ValueError(f"X has {X.shape[1]} columns but Theta has {Theta.shape[0]} rows")
    Xt = X @ Theta
    if E is not None:
        E = np.asarray(E, dtype=float)
        if E.shape != Xt.shape:
            raise ValueError(f"E shape {E.shape} does not match {Xt.shape}")
        Xt = Xt + E
    return spectral_norm(X @ X.T - Xt @ Xt.T, tol=tol)


def noise_regularizer_check(
    X_design, y, b, sigma: float, n_draws: int, seed: int, raw_dims: int = 0, chunk: int = 2000
) -> tuple[float, float]:
    """Monte-Carlo mean of ``||y - (X_design + W) b||^2`` against its closed form.

    ``W`` is i.i.d. N(0, sigma^2) on the columns from ``raw_dims`` on (the
    random features) and zero on the raw columns. The closed form is
    ``||y - X_design b||^2 + n sigma^2 ||b_random||^2``.
    """
    X = np.asarray(X_design, dtype=float)
    y = np.asarray(y, dtype=float)
    b = np.asarray(b, dtype=float)
    n, q = X.shape
    b_rand = b[raw_dims:]
    resid = y - X @ b
    analytic = float(resid @ resid + n * sigma**2 * (b_rand @ b_rand))
    if sigma == 0 or not np.any(b_rand):
        return float(resid @ resid), analytic
    rng = substream(seed, "noise-regularizer")
    total = 0.0
    done = 0
    while done < n_draws:
        m = min(chunk, n_draws - done)
        W = sigma * rng.standard_normal((m, n, q - raw_dims))
        r = resid[None, :] - W @ b_rand
        total += float(np.sum(r * r))
        done += m
    return total / n_draws, analytic


def low_rank_design(n: int, p: int, r: int, seed: int, noise_sd: float = 0.1):
    """Standardized rank-``r`` design with a response from a dense coefficient vector."""
    from pride.data import DataSet, standardize

    rng = substream(seed, "low-rank-design")
    X, mu, sd = standardize(rng.standard_normal((n, r)) @ rng.standard_normal((r, p)))
    beta = rng.standard_normal(p) / math.sqrt(p)
    y = X @ beta + noise_sd * rng.standard_normal(n)
    return DataSet(X, y, mu, sd, true_beta=beta)


def bound_tracking(data, partition, tau_subs, lam, sigmas, seeds, C_const=1.0, xi=0.05):
    """Empirical ``||beta_hat - beta*||`` against the bound for each noise level.

    ``beta*`` is the single-machine optimum at the same ``lam``; every party
    uses the same ``sigma``. Returns one dict per sigma with the seed-averaged
    error, the bound and their ratio.
    """
    from pride.baselines import single_machine
    from pride.core import resolve_tau_subs, run_pride

    beta_star = single_machine(data, lam, solver="direct").beta
    r = int(np.linalg.matrix_rank(data.X))
    tau_K = sum(resolve_tau_subs(tau_subs, s) for s in partition.sizes[1:])
    dm = d_min(data.X)
    out = []
    for sigma in sigmas:
        errs = [
            float(np.linalg.norm(
                run_pride(data, partition, tau_subs, lam, sigmas=sigma, master_seed=s,
                          solver="direct").global_beta - beta_star))
            for s in seeds
        ]
        b = error_bound(BoundInputs(r, tau_K, sigma, dm, float(np.linalg.norm(beta_star)),
                                       partition.K, C_const, xi))
        err = float(np.mean(errs))
        out.append({"sigma": float(sigma), "error": err, "bound": b.total,
                    "ratio": err / b.total if not b.vacuous else 0.0, "rho": b.rho})
    return out
