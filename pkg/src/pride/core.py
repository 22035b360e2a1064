"""Private distributed estimation over vertically partitioned features.

A single-process simulation of K parties. Each party

1. compresses its raw block with its own SRHT and adds Gaussian noise,
2. sends the result to every other party (synchronous all-to-all),
3. builds a local design ``[raw block, shares of the others]``,
4. solves the local dual problem and
5. maps the dual solution back to coefficients on its raw features only.

With the noise switched off this is Dual-LOCO.
"""

from __future__ import annotations

from collections.abc import Sequence
from dataclasses import dataclass, field

import numpy as np

from pride.data import DataSet, is_standardized
from pride.dual_solver import (
    DualState,
    LossKind,
    as_loss,
    primal_recover,
    sdca_solve,
    squared_dual_direct,
)
from pride.privacy import column_range_bound, gaussian_perturb, noise_sigma
from pride.rng import derive_seed
from pride.transform import SrhtProjection, srht_apply, srht_new


class ProtocolError(RuntimeError):
    """Share exchange contract violated (missing, duplicate or foreign share)."""


@dataclass(frozen=True)
class Partition:
    blocks: tuple[np.ndarray, ...]

    def __post_init__(self):
        if not self.blocks:
            raise ValueError("a partition needs at least one block")
        seen = np.concatenate(self.blocks)
        if any(b.size == 0 for b in self.blocks):
            raise ValueError("every party must hold at least one feature")
        if np.unique(seen).size != seen.size:
            raise ValueError("feature sets overlap")
        if not np.array_equal(np.sort(seen), np.arange(seen.size)):
            raise ValueError(f"feature sets do not cover 0..{seen.size - 1}")

    @property
    def K(self) -> int:
        return len(self.blocks)

    @property
    def p(self) -> int:
        return int(sum(b.size for b in self.blocks))

    @property
    def sizes(self) -> list[int]:
        return [int(b.size) for b in self.blocks]

    def complement(self, k: int) -> np.ndarray:
        return np.sort(np.concatenate([b for j, b in enumerate(self.blocks) if j != k]))


def partition_features(p: int, K: int | None = None, scheme: str = "contiguous", sets=None):
    """Split ``p`` features over ``K`` parties.

    ``scheme="contiguous"`` gives nearly equal consecutive runs;
    ``scheme="explicit"`` validates the user supplied ``sets``.
    """
    if scheme == "contiguous":
        if K is None or K < 1 or p < K:
            raise ValueError(f"need 1 <= K <= p, got K={K}, p={p}")
        return Partition(tuple(np.array_split(np.arange(p), K)))
    if scheme == "explicit":
        if sets is None:
            raise ValueError("explicit scheme requires sets")
        blocks = tuple(np.array(sorted(int(i) for i in s), dtype=int) for s in sets)
        part = Partition(blocks)
        if part.p != p or (K is not None and part.K != K):
            raise ValueError(f"explicit sets describe p={part.p}, K={part.K}")
        return part
    raise ValueError(f"unknown partition scheme {scheme!r}")


def resolve_tau_subs(tau_subs, tau: int) -> int:
    """Absolute projection dimension; floats in (0, 1) are fractions of ``tau``."""
    if isinstance(tau_subs, (float, np.floating)) and 0 < tau_subs < 1:
        return max(1, int(round(tau_subs * tau)))
    value = int(tau_subs)
    if value != tau_subs or value < 1:
        raise ValueError(f"tau_subs must be a positive integer or a fraction, got {tau_subs}")
    return value


@dataclass(frozen=True)
class FeatureShare:
    origin: int
    payload: np.ndarray
    sigma_used: float
    projection_seed: int
    noise_seed: int


@dataclass(frozen=True)
class LocalDesign:
    party: int
    matrix: np.ndarray
    tau: int

    @property
    def tau_K(self) -> int:
        return self.matrix.shape[1] - self.tau


def party_seeds(master_seed: int, k: int) -> tuple[int, int]:
    return (
        derive_seed(master_seed, f"party-{k}-projection"),
        derive_seed(master_seed, f"party-{k}-noise"),
    )


def party_share(
    X_k, tau_subs: int, sigma: float, projection_seed: int, noise_seed: int, origin: int = 0
) -> FeatureShare:
    """Perturbed random features ``X_k Pi_k + W_k`` of one party."""
    X_k = np.asarray(X_k, dtype=float)
    proj = srht_new(X_k.shape[1], tau_subs, projection_seed)
    payload = gaussian_perturb(srht_apply(proj, X_k), sigma, noise_seed)
    payload.setflags(write=False)
    return FeatureShare(origin, payload, float(sigma), int(projection_seed), int(noise_seed))


def assemble_local_design(
    party: int, raw, shares: Sequence[FeatureShare], n_parties: int | None = None
) -> LocalDesign:
    """``[raw, shares...]`` with shares in ascending origin order; copies its inputs."""
    raw = np.asarray(raw, dtype=float)
    origins = [s.origin for s in shares]
    if party in origins:
        raise ProtocolError(f"party {party} received its own share")
    if len(set(origins)) != len(origins):
        raise ProtocolError(f"duplicate shares from parties {sorted(origins)}")
    if n_parties is not None:
        expected = set(range(n_parties)) - {party}
        if set(origins) != expected:
            raise ProtocolError(
                f"party {party} expected shares from {sorted(expected)}, got {sorted(origins)}"
            )
    ordered = sorted(shares, key=lambda s: s.origin)
    for s in ordered:
        if s.payload.shape[0] != raw.shape[0]:
            raise ProtocolError(
                f"share from party {s.origin} has {s.payload.shape[0]} rows, expected {raw.shape[0]}"
            )
    matrix = np.hstack([raw] + [s.payload for s in ordered])
    matrix.setflags(write=False)
    return LocalDesign(party, matrix, raw.shape[1])


def party_thetas(X, partition: Partition) -> list[float]:
    return [column_range_bound(X[:, b]) for b in partition.blocks]


def party_sigmas(
    thetas: Sequence[float],
    epsilon: float | None,
    delta: float,
    private: bool = True,
    policy: str = "per_party",
) -> list[float]:
    """Noise levels per party; ``private=False`` (no-privacy flag) gives zeros."""
    if not private:
        return [0.0] * len(thetas)
    if epsilon is None:
        raise ValueError("epsilon is required when private=True")
    sigmas = [noise_sigma(epsilon, delta, t, 1.0) for t in thetas]
    if policy == "max":
        return [max(sigmas)] * len(sigmas)
    if policy != "per_party":
        raise ValueError(f"unknown sigma policy {policy!r}")
    return sigmas


def exchange_shares(X, partition: Partition, tau_subs, sigmas, master_seed: int):
    """Every party's :class:`FeatureShare` (indexed by party)."""
    shares = []
    for k, block in enumerate(partition.blocks):
        t = resolve_tau_subs(tau_subs, block.size)
        if t > block.size:
            raise ValueError(f"tau_subs={t} exceeds party {k}'s {block.size} features")
        pseed, nseed = party_seeds(master_seed, k)
        shares.append(party_share(X[:, block], t, sigmas[k], pseed, nseed, origin=k))
    return shares


def local_designs(X, partition: Partition, shares) -> list[LocalDesign]:
    return [
        assemble_local_design(k, X[:, b], [s for s in shares if s.origin != k], partition.K)
        for k, b in enumerate(partition.blocks)
    ]


def solve_local(
    design: LocalDesign,
    y,
    lam: float,
    loss="squared",
    solver: str = "sdca",
    epochs: int = 500,
    tol: float = 1e-8,
    seed: int = 0,
) -> DualState:
    loss = as_loss(loss)
    if solver == "direct":
        if loss is not LossKind.SQUARED:
            raise ValueError("the direct solver only handles squared loss")
        return squared_dual_direct(design.matrix, y, lam)
    if solver != "sdca":
        raise ValueError(f"unknown solver {solver!r}")
    return sdca_solve(design.matrix, y, lam, loss, epochs=epochs, tol=tol, seed=seed)


@dataclass
class PrideResult:
    partition: Partition
    per_party_beta: list[np.ndarray]
    per_party_alpha: list[np.ndarray]
    global_beta: np.ndarray
    local_weights: list[np.ndarray]
    lams: list[float]
    thetas: list[float]
    sigmas: list[float]
    tau_subs: list[int]
    master_seed: int
    diagnostics: dict = field(default_factory=dict)


def _per_party(value, K: int, name: str) -> list:
    if np.ndim(value) == 0:
        return [value] * K
    value = list(value)
    if len(value) != K:
        raise ValueError(f"{name} needs one entry per party ({K}), got {len(value)}")
    return value


def run_pride(
    data: DataSet,
    partition: Partition,
    tau_subs,
    lam,
    epsilon: float | None = None,
    delta: float = 0.05,
    loss="squared",
    master_seed: int = 0,
    *,
    private: bool = True,
    sigmas: Sequence[float] | float | None = None,
    sigma_policy: str = "per_party",
    solver: str = "sdca",
    epochs: int = 500,
    tol: float = 1e-8,
    check_standardized: bool = True,
) -> PrideResult:
    """Run every party's share/assemble/solve/recover step.

    Parameters
    ----------
    data
        Training data; columns must be standardized.
    tau_subs
        Projection dimension per party, absolute or as a fraction of its block.
    lam
        Regularization, scalar or one value per party.
    epsilon, delta
        Privacy budget; each party's sigma comes from its own column range.
    private
        ``False`` is the no-privacy flag (Dual-LOCO); epsilon is then ignored.
    sigmas
        Explicit noise levels overriding the calibration (``0`` gives the
        unperturbed code path).
    """
    X = np.asarray(data.X, dtype=float)
    y = np.asarray(data.y, dtype=float)
    if partition.p != X.shape[1]:
        raise ValueError(f"partition covers {partition.p} features, data has {X.shape[1]}")
    if check_standardized and not is_standardized(X):
        raise ValueError("run_pride expects standardized columns (mean 0, variance 1)")
    K = partition.K
    lams = [float(v) for v in _per_party(lam, K, "lam")]
    if any(not v > 0 for v in lams):
        raise ValueError("lam must be positive")

    thetas = party_thetas(X, partition)
    if sigmas is None:
        sig = party_sigmas(thetas, epsilon, delta, private, sigma_policy)
    else:
        sig = [float(s) for s in _per_party(sigmas, K, "sigmas")]

    if K == 1:
        shares = []
        taus = [0]
    else:
        shares = exchange_shares(X, partition, tau_subs, sig, master_seed)
        taus = [s.payload.shape[1] for s in shares]
    designs = local_designs(X, partition, shares)

    betas, alphas, weights, epochs_run, converged = [], [], [], [], []
    for k, design in enumerate(designs):
        seed = derive_seed(master_seed, f"party-{k}-sdca")
        state = solve_local(design, y, lams[k], loss, solver, epochs, tol, seed)
        betas.append(primal_recover(X[:, partition.blocks[k]], state.alpha, lams[k]))
        alphas.append(state.alpha)
        weights.append(state.beta)
        epochs_run.append(state.epochs_run)
        converged.append(state.converged)

    global_beta = np.zeros(partition.p)
    for b, blk in zip(betas, partition.blocks):
        global_beta[blk] = b
    return PrideResult(
        partition=partition,
        per_party_beta=betas,
        per_party_alpha=alphas,
        global_beta=global_beta,
        local_weights=weights,
        lams=lams,
        thetas=thetas,
        sigmas=sig,
        tau_subs=taus,
        master_seed=master_seed,
        diagnostics={
            "epochs": epochs_run,
            "converged": converged,
            "projection_seeds": [s.projection_seed for s in shares],
            "noise_seeds": [s.noise_seed for s in shares],
            "solver": solver,
            "loss": as_loss(loss).value,
        },
    )


def run_dual_loco(data, partition, tau_subs, lam, loss="squared", master_seed=0, **kwargs):
    """Unperturbed random features; identical to ``run_pride(private=False)``."""
    return run_pride(data, partition, tau_subs, lam, None, 0.05, loss, master_seed,
                     private=False, **kwargs)


def predict_global(result: PrideResult, X_test) -> np.ndarray:
    """Sum of each party's partial predictor ``X_test[:, P_k] @ beta_k``."""
    X_test = np.asarray(X_test, dtype=float)
    part = result.partition
    if X_test.ndim != 2 or X_test.shape[1] != part.p:
        raise ValueError(f"expected {part.p} test columns, got shape {X_test.shape}")
    out = np.zeros(X_test.shape[0])
    for b, blk in zip(result.per_party_beta, part.blocks):
        out += X_test[:, blk] @ b
    return out


def share_test_rows(result: PrideResult, X_test) -> list[FeatureShare]:
    """Fresh test-row shares: same projections, fresh noise at the same sigmas.

    This is a second release of each party's features; the privacy budget is
    not split between it and the training release.
    """
    X_test = np.asarray(X_test, dtype=float)
    shares = []
    for k, blk in enumerate(result.partition.blocks):
        pseed, _ = party_seeds(result.master_seed, k)
        nseed = derive_seed(result.master_seed, f"party-{k}-test-noise")
        shares.append(
            party_share(X_test[:, blk], result.tau_subs[k], result.sigmas[k], pseed, nseed, k)
        )
    return shares


def predict_local(result: PrideResult, party: int, X_test) -> np.ndarray:
    """Party ``party``'s prediction from its own raw and received (perturbed) test features."""
    part = result.partition
    X_test = np.asarray(X_test, dtype=float)
    if part.K == 1:
        return X_test @ result.local_weights[0]
    shares = share_test_rows(result, X_test)
    design = assemble_local_design(
        party, X_test[:, part.blocks[party]], [s for s in shares if s.origin != party], part.K
    )
    return design.matrix @ result.local_weights[party]

