"""Sweep harness: methods x epsilon x projection dimension x seeds -> long CSV."""

from __future__ import annotations

import csv
import json
import logging
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path

import numpy as np
import yaml

from pride.analysis import (
    coefficient_correlation,
    estimation_error,
    prediction_mse_normalized,
)
from pride.baselines import semi_naive_bayes, single_machine
from pride.core import LocalDesign, partition_features, run_pride
from pride.cv import DEFAULT_LAMBDA_GRID, global_cv, local_cv, local_cv_all
from pride.data import (
    C_BLOCK,
    X_BLOCK,
    SyntheticConfig,
    generate_confounded,
    load_csv,
    train_test_split,
)
from pride.rng import derive_seed

log = logging.getLogger(__name__)

METHODS = ("single_machine", "semi_nb", "dual_loco", "pride")
NO_PRIVACY = "none"

DETAIL_COLUMNS = [
    "method", "epsilon", "delta", "tau_subs_config", "tau_subs", "lam", "seed",
    "sigma_max", "sigmas", "err_true", "err_true_X", "err_true_C", "err_ref",
    "corr_true", "corr_ref", "train_mse", "test_mse", "converged", "error",
]
METRICS = ["sigma_max", "err_true", "err_true_X", "err_true_C", "err_ref",
           "corr_true", "corr_ref", "train_mse", "test_mse"]


class ConfigError(ValueError):
    pass


@dataclass
class ExperimentConfig:
    dataset: dict = field(default_factory=lambda: {"kind": "synthetic"})
    test_fraction: float = 0.2
    K: int = 2
    partition: str | list = "contiguous"
    tau_subs: list = field(default_factory=lambda: [0.01, 0.05, 0.1, 0.2])
    epsilons: list = field(default_factory=lambda: [0.1, 0.25, 0.5, 0.75, 1, 2, 5, 10, 20, NO_PRIVACY])
    delta: float = 0.05
    lam: float | str = "cv-global"
    lam_grid: list = field(default_factory=lambda: [float(v) for v in DEFAULT_LAMBDA_GRID])
    folds: int = 5
    loss: str = "squared"
    methods: list = field(default_factory=lambda: list(METHODS))
    n_seeds: int = 10
    master_seed: int = 0
    solver: str = "sdca"
    cv_solver: str = "direct"
    epochs: int = 500
    tol: float = 1e-8
    sigma_policy: str = "per_party"
    center_response: bool = False
    output_dir: str = "results"

    def __post_init__(self):
        if not self.tau_subs or not self.epsilons or not self.methods:
            raise ConfigError("tau_subs, epsilons and methods must be nonempty")
        for t in self.tau_subs:
            if isinstance(t, float) and not 0 < t <= 1:
                raise ConfigError(f"tau_subs fraction {t} outside (0, 1]")
            if not isinstance(t, (int, float)) or t <= 0:
                raise ConfigError(f"invalid tau_subs entry {t!r}")
        for e in self.epsilons:
            if e != NO_PRIVACY and not (isinstance(e, (int, float)) and e > 0):
                raise ConfigError(f"invalid epsilon entry {e!r}")
        if self.n_seeds < 1:
            raise ConfigError("n_seeds must be >= 1")
        if not 0 < self.delta < 0.5:
            raise ConfigError("delta must lie in (0, 1/2)")
        bad = set(self.methods) - set(METHODS)
        if bad:
            raise ConfigError(f"unknown methods {sorted(bad)}")
        if not (isinstance(self.lam, (int, float)) and self.lam > 0) and self.lam not in (
            "cv-global", "cv-local"):
            raise ConfigError(f"lam must be positive or 'cv-global'/'cv-local', got {self.lam!r}")
        kind = self.dataset.get("kind")
        if kind not in ("synthetic", "csv"):
            raise ConfigError(f"dataset.kind must be 'synthetic' or 'csv', got {kind!r}")
        if kind == "csv" and not {"path", "response"} <= set(self.dataset):
            raise ConfigError("csv datasets need 'path' and 'response'")

    @classmethod
    def from_file(cls, path) -> "ExperimentConfig":
        path = Path(path)
        try:
            raw = yaml.safe_load(path.read_text(encoding="utf-8")) or {}
        except (OSError, yaml.YAMLError) as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from exc
        known = {f.name for f in fields(cls)}
        unknown = set(raw) - known
        if unknown:
            raise ConfigError(f"unknown config keys {sorted(unknown)}")
        cfg = cls(**raw)
        if cfg.dataset.get("kind") == "csv":
            p = Path(cfg.dataset["path"])
            if not p.is_absolute():
                cfg.dataset = {**cfg.dataset, "path": str(path.parent / p)}
        return cfg


def synthetic_config(cfg: ExperimentConfig, seed: int) -> SyntheticConfig:
    opts = {k: v for k, v in cfg.dataset.items() if k != "kind"}
    return SyntheticConfig(**{**opts, "seed": seed})


def load_dataset(cfg: ExperimentConfig, seed_index: int):
    """Train/test pair for one replicate; synthetic data is redrawn per replicate."""
    data_seed = derive_seed(cfg.master_seed, f"replicate-{seed_index}-data")
    if cfg.dataset["kind"] == "synthetic":
        data = generate_confounded(synthetic_config(cfg, data_seed))
    else:
        data = load_csv(cfg.dataset["path"], cfg.dataset["response"])
    split_seed = derive_seed(cfg.master_seed, f"replicate-{seed_index}-split")
    return train_test_split(data, 1 - cfg.test_fraction, split_seed, cfg.center_response)


def make_partition(cfg: ExperimentConfig, p: int):
    if cfg.partition == "contiguous":
        return partition_features(p, cfg.K)
    return partition_features(p, cfg.K, "explicit", cfg.partition)


def _fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, (bool, np.bool_)):
        return str(bool(v))
    if isinstance(v, (float, np.floating)):
        return format(float(v), ".17g")
    if isinstance(v, (list, tuple)):
        return ";".join(_fmt(x) for x in v)
    return str(v)


def _metrics(beta, train, test, beta_ref, partition_blocks_labels):
    row = {}
    tb = train.true_beta
    if tb is not None:
        row["err_true"] = estimation_error(beta, tb).normalized
        row["corr_true"] = coefficient_correlation(beta, tb)
        if partition_blocks_labels is not None:
            labels = np.array(partition_blocks_labels)
            for name, tag in (("err_true_X", X_BLOCK), ("err_true_C", C_BLOCK)):
                m = labels == tag
                if m.any() and np.any(tb[m]):
                    row[name] = estimation_error(beta[m], tb[m]).normalized
    if beta_ref is not None:
        row["err_ref"] = estimation_error(beta, beta_ref).normalized
        try:
            row["corr_ref"] = coefficient_correlation(beta, beta_ref)
        except ValueError:
            pass
    row["train_mse"] = prediction_mse_normalized(train.y, train.X @ beta)
    row["test_mse"] = prediction_mse_normalized(test.y, test.X @ beta)
    return row


def run_replicate(cfg: ExperimentConfig, seed_index: int) -> tuple[list[dict], list[dict]]:
    """Every cell of one replicate; failures become rows with an ``error`` message."""
    train, test = load_dataset(cfg, seed_index)
    part = make_partition(cfg, train.p)
    one = partition_features(train.p, 1)
    run_seed = derive_seed(cfg.master_seed, f"replicate-{seed_index}-run")
    cv_seed = derive_seed(cfg.master_seed, f"replicate-{seed_index}-cv")
    grid = cfg.lam_grid
    solve_kw = dict(solver=cfg.solver, epochs=cfg.epochs, tol=cfg.tol)
    rows, timings = [], []

    def cell(method, epsilon, tau_cfg, fn):
        t0 = time.perf_counter()
        base = {"method": method, "epsilon": epsilon, "delta": cfg.delta,
                "tau_subs_config": tau_cfg, "seed": seed_index}
        try:
            base.update(fn())
        except Exception as exc:  # per-cell failures are recorded, the sweep goes on
            log.warning("cell %s failed: %s", base, exc)
            base["error"] = f"{type(exc).__name__}: {exc}"
        rows.append(base)
        timings.append({**{k: base[k] for k in ("method", "epsilon", "tau_subs_config", "seed")},
                        "seconds": time.perf_counter() - t0})

    def select_lam(epsilon, tau, communicate=True, partition=part):
        if not isinstance(cfg.lam, str):
            return float(cfg.lam)
        private = epsilon != NO_PRIVACY
        eps = None if not private else float(epsilon)
        if cfg.lam == "cv-global" or partition.K == 1:
            lam, _ = global_cv(train, partition, tau, grid, eps, cfg.delta, cfg.folds, cfg.loss,
                               cv_seed, private=private, sigma_policy=cfg.sigma_policy,
                               solver=cfg.cv_solver, communicate=communicate)
            return lam
        if not communicate:
            return [local_cv(LocalDesign(k, train.X[:, b], b.size), train.y, grid, cfg.folds,
                             cfg.loss, cv_seed, solver=cfg.cv_solver)[0]
                    for k, b in enumerate(partition.blocks)]
        lams, _ = local_cv_all(train, partition, tau, grid, eps, cfg.delta, cfg.folds, cfg.loss,
                               cv_seed, private=private, sigma_policy=cfg.sigma_policy,
                               master_seed=run_seed, solver=cfg.cv_solver)
        return lams

    sm_lam = select_lam(NO_PRIVACY, 1, partition=one)
    sm = single_machine(train, sm_lam, cfg.loss, derive_seed(run_seed, "single-machine"), **solve_kw)
    beta_ref = sm.beta
    labels = train.block_labels

    if "single_machine" in cfg.methods:
        cell("single_machine", NO_PRIVACY, "", lambda: {
            "lam": sm_lam, "converged": sm.converged, "sigma_max": 0.0,
            **_metrics(sm.beta, train, test, beta_ref, labels)})

    if "semi_nb" in cfg.methods:
        def nb_cell():
            lam = select_lam(NO_PRIVACY, 1, communicate=False)
            res = semi_naive_bayes(train, part, lam, cfg.loss, derive_seed(run_seed, "semi-nb"),
                                   **solve_kw)
            return {"lam": lam, "converged": res.converged, "sigma_max": 0.0,
                    **_metrics(res.beta, train, test, beta_ref, labels)}
        cell("semi_nb", NO_PRIVACY, "", nb_cell)

    def pride_cell(epsilon, tau):
        def fn():
            private = epsilon != NO_PRIVACY
            eps = float(epsilon) if private else None
            lam = select_lam(epsilon, tau)
            res = run_pride(train, part, tau, lam, eps, cfg.delta, cfg.loss, run_seed,
                            private=private, sigma_policy=cfg.sigma_policy, **solve_kw)
            return {"lam": res.lams if len(set(res.lams)) > 1 else res.lams[0],
                    "tau_subs": res.tau_subs, "sigmas": res.sigmas,
                    "sigma_max": max(res.sigmas),
                    "converged": all(res.diagnostics["converged"]),
                    **_metrics(res.global_beta, train, test, beta_ref, labels)}
        return fn

    for tau in cfg.tau_subs:
        if "dual_loco" in cfg.methods:
            cell("dual_loco", NO_PRIVACY, tau, pride_cell(NO_PRIVACY, tau))
        if "pride" in cfg.methods:
            for eps in cfg.epsilons:
                cell("pride", eps, tau, pride_cell(eps, tau))
    return rows, timings


def _summarize(rows: list[dict]) -> list[dict]:
    groups: dict[tuple, list[dict]] = {}
    for r in rows:
        key = (r["method"], _fmt(r["epsilon"]), _fmt(r["tau_subs_config"]))
        groups.setdefault(key, []).append(r)
    out = []
    for (method, eps, tau), rs in groups.items():
        s = {"method": method, "epsilon": eps, "tau_subs_config": tau, "n": len(rs),
             "n_failed": sum(1 for r in rs if r.get("error"))}
        for m in METRICS:
            vals = [float(r[m]) for r in rs if r.get(m) not in (None, "") and not r.get("error")]
            if vals:
                s[f"{m}_mean"] = float(np.mean(vals))
                s[f"{m}_se"] = float(np.std(vals, ddof=1) / math.sqrt(len(vals))) if len(vals) > 1 else 0.0
        out.append(s)
    return out


def _write_csv(path: Path, rows: list[dict], columns: list[str]) -> None:
    with path.open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(columns)
        for r in rows:
            w.writerow([_fmt(r.get(c)) for c in columns])


def run_experiment(cfg: ExperimentConfig, out_dir=None, jobs: int = 1) -> dict:
    """Run every replicate and write ``details.csv``, ``summary.csv``,
    ``summary.json`` and ``timings.csv`` (wall times are kept out of the
    detail file so it stays byte-reproducible)."""
    out = Path(out_dir or cfg.output_dir)
    try:
        out.mkdir(parents=True, exist_ok=True)
        probe = out / ".write-test"
        probe.write_text("")
        probe.unlink()
    except OSError as exc:
        raise ConfigError(f"output directory {out} is not writable: {exc}") from exc

    seeds = range(cfg.n_seeds)
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(run_replicate, [cfg] * cfg.n_seeds, seeds))
    else:
        results = [run_replicate(cfg, s) for s in seeds]
    rows = [r for res in results for r in res[0]]
    timings = [t for res in results for t in res[1]]

    summary = _summarize(rows)
    _write_csv(out / "details.csv", rows, DETAIL_COLUMNS)
    sum_cols = ["method", "epsilon", "tau_subs_config", "n", "n_failed"] + [
        f"{m}_{s}" for m in METRICS for s in ("mean", "se")]
    _write_csv(out / "summary.csv", summary, sum_cols)
    (out / "summary.json").write_text(
        json.dumps({"config": asdict(cfg), "summary": summary}, indent=2, default=str) + "\n",
        encoding="utf-8")
    _write_csv(out / "timings.csv", timings, ["method", "epsilon", "tau_subs_config", "seed", "seconds"])
    return {"details": rows, "summary": summary, "out_dir": str(out)}
