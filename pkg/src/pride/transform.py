"""Fast Walsh-Hadamard transform and the subsampled randomized Hadamard transform.

Convention: a party's feature block ``X_k`` (n x tau) is compressed as
``X_k @ Pi`` where

    Pi = sqrt(padded_dim / output_dim) * D @ H_norm @ R^T   (restricted to the first tau rows)

``D`` is a random +-1 diagonal, ``H_norm`` the orthonormal Hadamard matrix of
size ``padded_dim`` and ``R`` selects ``output_dim`` rows without replacement.
Every entry of ``Pi`` is +-1/sqrt(output_dim), so every row has unit l2 norm.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from pride.rng import substream


def is_power_of_two(n: int) -> bool:
    return n >= 1 and (n & (n - 1)) == 0


def next_power_of_two(n: int) -> int:
    if n < 1:
        raise ValueError(f"dimension must be >= 1, got {n}")
    return 1 << (int(n) - 1).bit_length()


def fwht(x: np.ndarray) -> np.ndarray:
    """Orthonormal Walsh-Hadamard transform along the last axis.

    Returns a new array; the input is not modified. Applying the transform
    twice returns the input (up to rounding).

    Raises
    ------
    ValueError
        If the last axis length is not a power of two.
    """
    a = np.array(x, dtype=float, copy=True)
    n = a.shape[-1] if a.ndim else 0
    if not is_power_of_two(n):
        raise ValueError(f"FWHT length must be a power of two, got {n}")
    lead = a.shape[:-1]
    h = 1
    while h < n:
        a = a.reshape(*lead, n // (2 * h), 2, h)
        top = a[..., 0, :]
        bot = a[..., 1, :]
        a = np.stack((top + bot, top - bot), axis=-2)
        h *= 2
    return a.reshape(*lead, n) / np.sqrt(n)


@dataclass(frozen=True)
class SrhtProjection:
    """Seeded SRHT for one party. Immutable; safe to share across threads."""

    input_dim: int
    padded_dim: int
    output_dim: int
    sign_flips: np.ndarray
    selected_rows: np.ndarray
    seed: int

    @property
    def scale(self) -> float:
        return float(np.sqrt(self.padded_dim / self.output_dim))

    def apply(self, X: np.ndarray) -> np.ndarray:
        return srht_apply(self, X)

    def dense(self) -> np.ndarray:
        """Explicit ``input_dim x output_dim`` matrix (for tests and diagnostics)."""
        return srht_apply(self, np.eye(self.input_dim))


def srht_new(input_dim: int, output_dim: int, seed: int) -> SrhtProjection:
    """Draw sign flips and ``output_dim`` distinct rows, deterministically in ``seed``."""
    input_dim = int(input_dim)
    output_dim = int(output_dim)
    if input_dim < 1:
        raise ValueError(f"input_dim must be >= 1, got {input_dim}")
    if not 1 <= output_dim <= input_dim:
        raise ValueError(f"output_dim must lie in [1, {input_dim}], got {output_dim}")
    padded = next_power_of_two(input_dim)
    rng = substream(seed, "srht")
    signs = rng.choice(np.array([-1.0, 1.0]), size=padded)
    rows = np.sort(rng.choice(padded, size=output_dim, replace=False))
    signs.setflags(write=False)
    rows.setflags(write=False)
    return SrhtProjection(input_dim, padded, output_dim, signs, rows, int(seed))


def srht_apply(proj: SrhtProjection, X: np.ndarray) -> np.ndarray:
    """Compute ``X @ Pi`` with the fast transform; ``X`` is ``n x input_dim``."""
    X = np.asarray(X, dtype=float)
    if X.ndim != 2 or X.shape[1] != proj.input_dim:
        raise ValueError(
            f"expected a matrix with {proj.input_dim} columns, got shape {X.shape}"
        )
    padded = np.zeros((X.shape[0], proj.padded_dim))
    padded[:, : proj.input_dim] = X
    padded *= proj.sign_flips
    transformed = fwht(padded)
    return proj.scale * transformed[:, proj.selected_rows]
