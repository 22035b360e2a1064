"""Gaussian-mechanism noise calibration for the shared random features."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from pride.rng import substream


def noise_sigma(epsilon: float, delta: float, theta: float, w2: float = 1.0) -> float:
    """Noise standard deviation ``w2 * theta / eps * sqrt(2 (ln(1/(2 delta)) + eps))``.

    The privacy guarantee requires sigma strictly above this value; the
    boundary value is returned, and callers wanting strict slack scale it
    by a factor > 1 (see :class:`PrivacyBudget.margin`).
    """
    if not epsilon > 0 or not math.isfinite(epsilon):
        raise ValueError(f"epsilon must be a positive finite number, got {epsilon}")
    if not 0 < delta < 0.5:
        raise ValueError(f"delta must lie in (0, 1/2), got {delta}")
    if theta < 0 or w2 < 0:
        raise ValueError("theta and w2 must be nonnegative")
    return w2 * theta / epsilon * math.sqrt(2.0 * (math.log(1.0 / (2.0 * delta)) + epsilon))


@dataclass(frozen=True)
class PrivacyBudget:
    epsilon: float
    delta: float
    theta: float
    sensitivity_w2: float = 1.0
    margin: float = 1.0

    def __post_init__(self):
        if self.margin < 1.0:
            raise ValueError("margin below 1 would weaken the guarantee")
        # validates epsilon / delta / theta
        noise_sigma(self.epsilon, self.delta, self.theta, self.sensitivity_w2)

    @property
    def sigma(self) -> float:
        return self.margin * noise_sigma(
            self.epsilon, self.delta, self.theta, self.sensitivity_w2
        )


def column_range_bound(X: np.ndarray) -> float:
    """Largest column range ``max_j (max_i X_ij - min_i X_ij)``."""
    X = np.asarray(X, dtype=float)
    if X.ndim != 2 or X.size == 0:
        raise ValueError(f"column_range_bound needs a nonempty matrix, got shape {X.shape}")
    return float(np.max(X.max(axis=0) - X.min(axis=0)))


def gaussian_perturb(Z: np.ndarray, sigma: float, seed: int) -> np.ndarray:
    """Return ``Z + W`` with ``W`` i.i.d. N(0, sigma^2); ``sigma == 0`` returns a copy of ``Z``."""
    if sigma < 0 or not math.isfinite(sigma):
        raise ValueError(f"sigma must be finite and nonnegative, got {sigma}")
    Z = np.asarray(Z, dtype=float)
    if sigma == 0:
        return Z.copy()
    rng = substream(seed, "gaussian-noise")
    return Z + sigma * rng.standard_normal(Z.shape)
