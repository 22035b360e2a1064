"""Datasets: standardization, CSV ingestion, splitting and the confounded simulator."""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np

from pride.rng import substream

X_BLOCK = "X"
C_BLOCK = "C"


class DataParseError(ValueError):
    """Malformed CSV input; the message names the offending row/column."""


@dataclass
class DataSet:
    X: np.ndarray
    y: np.ndarray
    column_means: np.ndarray
    column_stds: np.ndarray
    true_beta: np.ndarray | None = None
    block_labels: list[str] | None = None
    feature_names: list[str] | None = None
    response_offset: float = 0.0
    confound_pairs: list[tuple[int, int]] | None = None
    row_index: np.ndarray | None = None

    @property
    def n(self) -> int:
        return self.X.shape[0]

    @property
    def p(self) -> int:
        return self.X.shape[1]


@dataclass(frozen=True)
class SyntheticConfig:
    """Confounded two-block simulator.

    The two blocks X and C each live on one half (``grid_side/2 x grid_side``)
    of a ``grid_side x grid_side`` grid, so ``p = grid_side**2`` and each block
    has ``p/2`` features.
    """

    grid_side: int = 20
    n: int = 1000
    n_confound_pairs: int = 20
    n_signal_pcs: int = 20
    target_snr: float = 5.0
    grf_length_scale: float = 8.0
    seed: int = 0

    def __post_init__(self):
        if self.grid_side < 2 or self.grid_side % 2:
            raise ValueError("grid_side must be an even integer >= 2")
        if self.n < 2:
            raise ValueError("n must be >= 2")
        tau = self.grid_side**2 // 2
        if not 0 <= self.n_confound_pairs <= tau:
            raise ValueError(f"n_confound_pairs must lie in [0, {tau}]")
        if not 1 <= self.n_signal_pcs <= min(self.grid_side**2, self.n):
            raise ValueError("n_signal_pcs must lie in [1, min(p, n)]")
        if not self.target_snr > 0:
            raise ValueError("target_snr must be positive")
        if not self.grf_length_scale > 0:
            raise ValueError("grf_length_scale must be positive")


def standardize(X) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Center and scale columns with the population (1/n) standard deviation."""
    X = np.asarray(X, dtype=float)
    means = X.mean(axis=0)
    stds = X.std(axis=0)
    bad = np.flatnonzero(stds < 1e-12)
    if bad.size:
        raise ValueError(f"constant column(s) cannot be standardized: {bad.tolist()}")
    return (X - means) / stds, means, stds


def apply_standardization(X, means, stds) -> np.ndarray:
    return (np.asarray(X, dtype=float) - means) / stds


def is_standardized(X, mean_tol: float = 1e-6, std_tol: float = 1e-3) -> bool:
    X = np.asarray(X, dtype=float)
    return bool(
        np.all(np.abs(X.mean(axis=0)) <= mean_tol)
        and np.all(np.abs(X.std(axis=0) - 1.0) <= std_tol)
    )


def grid_coordinates(rows: int, cols: int) -> np.ndarray:
    ii, jj = np.meshgrid(np.arange(rows), np.arange(cols), indexing="ij")
    return np.column_stack([ii.ravel(), jj.ravel()]).astype(float)


def squared_exponential_cov(coords: np.ndarray, length_scale: float) -> np.ndarray:
    if not length_scale > 0:
        raise ValueError(f"length scale must be positive, got {length_scale}")
    diff = coords[:, None, :] - coords[None, :, :]
    d2 = np.einsum("ijk,ijk->ij", diff, diff)
    return np.exp(-d2 / (2.0 * length_scale**2))


def sample_grf(n: int, cov: np.ndarray, rng: np.random.Generator, jitter: float = 1e-10):
    """``n`` draws of a zero-mean Gaussian field with covariance ``cov`` (Cholesky)."""
    L = np.linalg.cholesky(cov + jitter * np.eye(cov.shape[0]))
    return rng.standard_normal((n, cov.shape[0])) @ L.T


def generate_confounded(config: SyntheticConfig = SyntheticConfig()) -> DataSet:
    """Simulate ``y = [X C] beta + noise`` where C confounds X.

    Steps: independent fields X0 and C; ``n_confound_pairs`` random pairs
    ``(i_x, j_c)`` with ``X[:, i_x] = X0[:, i_x] + C[:, j_c]``; standardize
    ``[X C]``; ``beta`` is the sum of the top ``n_signal_pcs`` right singular
    vectors; noise variance is set so Var(signal)/Var(noise) = target_snr.
    Columns are ordered X block first.
    """
    cfg = config
    rng = substream(cfg.seed, "synthetic-data")
    half = cfg.grid_side // 2
    cov = squared_exponential_cov(grid_coordinates(half, cfg.grid_side), cfg.grf_length_scale)
    tau = cov.shape[0]

    C = sample_grf(cfg.n, cov, rng)
    X = sample_grf(cfg.n, cov, rng)
    ix = rng.choice(tau, size=cfg.n_confound_pairs, replace=False)
    jc = rng.choice(tau, size=cfg.n_confound_pairs, replace=False)
    X[:, ix] += C[:, jc]

    Z, means, stds = standardize(np.hstack([X, C]))
    _, _, Vt = np.linalg.svd(Z, full_matrices=False)
    beta = Vt[: cfg.n_signal_pcs].sum(axis=0)
    signal = Z @ beta
    noise = rng.standard_normal(cfg.n)
    noise *= math.sqrt(signal.var() / (cfg.target_snr * noise.var()))
    y = signal + noise

    return DataSet(
        X=Z,
        y=y,
        column_means=means,
        column_stds=stds,
        true_beta=beta,
        block_labels=[X_BLOCK] * tau + [C_BLOCK] * tau,
        feature_names=[f"x{j}" for j in range(tau)] + [f"c{j}" for j in range(tau)],
        confound_pairs=list(zip(ix.tolist(), jc.tolist())),
    )


def load_csv(path, response_column: str) -> DataSet:
    """Read a header-ed, comma separated numeric file. X is left unstandardized."""
    path = Path(path)
    with path.open(newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise DataParseError(f"{path}: empty file") from None
        header = [h.strip() for h in header]
        if response_column not in header:
            raise DataParseError(
                f"{path}: response column {response_column!r} not in header {header}"
            )
        rows = []
        for lineno, row in enumerate(reader, start=2):
            if not row or all(not c.strip() for c in row):
                continue
            if len(row) != len(header):
                raise DataParseError(
                    f"{path}:{lineno}: expected {len(header)} fields, got {len(row)}"
                )
            values = []
            for col, cell in zip(header, row):
                try:
                    v = float(cell)
                except ValueError:
                    raise DataParseError(
                        f"{path}:{lineno}: column {col!r}: non-numeric value {cell!r}"
                    ) from None
                if not math.isfinite(v):
                    raise DataParseError(f"{path}:{lineno}: column {col!r}: non-finite value")
                values.append(v)
            rows.append(values)
    if not rows:
        raise DataParseError(f"{path}: no data rows")
    table = np.array(rows)
    r = header.index(response_column)
    feature_idx = [j for j in range(len(header)) if j != r]
    X = table[:, feature_idx]
    return DataSet(
        X=X,
        y=table[:, r],
        column_means=np.zeros(X.shape[1]),
        column_stds=np.ones(X.shape[1]),
        feature_names=[header[j] for j in feature_idx],
    )


def save_csv(data: DataSet, path, response_column: str = "y") -> None:
    names = data.feature_names or [f"x{j}" for j in range(data.p)]
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow([*names, response_column])
        for xi, yi in zip(data.X, data.y):
            w.writerow([repr(float(v)) for v in xi] + [repr(float(yi))])


def train_test_split(
    data: DataSet, fraction: float, seed: int, center_response: bool = False
) -> tuple[DataSet, DataSet]:
    """Random row split; both parts standardized with the training statistics.

    With ``center_response`` the training mean of y is subtracted from both
    parts and kept in ``response_offset``.
    """
    if not 0 < fraction < 1:
        raise ValueError(f"fraction must lie in (0, 1), got {fraction}")
    n = data.n
    n_train = int(round(fraction * n))
    if not 1 <= n_train <= n - 1:
        raise ValueError(f"split of {n} rows at fraction {fraction} leaves an empty part")
    perm = substream(seed, "train-test-split").permutation(n)
    tr, te = np.sort(perm[:n_train]), np.sort(perm[n_train:])
    Xtr, means, stds = standardize(data.X[tr])
    Xte = apply_standardization(data.X[te], means, stds)
    offset = float(data.y[tr].mean()) if center_response else 0.0
    common = dict(column_means=means, column_stds=stds, response_offset=offset)
    train = replace(data, X=Xtr, y=data.y[tr] - offset, row_index=tr, **common)
    test = replace(data, X=Xte, y=data.y[te] - offset, row_index=te, **common)
    return train, test
