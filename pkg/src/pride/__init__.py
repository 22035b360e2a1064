"""Differentially private distributed estimation over vertically partitioned features."""

from pride.core import (
    Partition,
    PrideResult,
    partition_features,
    predict_global,
    predict_local,
    run_dual_loco,
    run_pride,
)
from pride.data import DataSet, SyntheticConfig, generate_confounded, standardize, train_test_split
from pride.privacy import PrivacyBudget, noise_sigma

__all__ = [
    "DataSet",
    "Partition",
    "PrideResult",
    "PrivacyBudget",
    "SyntheticConfig",
    "generate_confounded",
    "noise_sigma",
    "partition_features",
    "predict_global",
    "predict_local",
    "run_dual_loco",
    "run_pride",
    "standardize",
    "train_test_split",
]
