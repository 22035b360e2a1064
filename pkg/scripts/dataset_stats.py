"""Summary statistics of the synthetic design: column range, d_min, effective rank, J80/J90."""

import argparse

import numpy as np

from pride.analysis import d_min, effective_rank, variance_components
from pride.core import partition_features, party_thetas
from pride.data import SyntheticConfig, generate_confounded, train_test_split


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--seeds", type=int, default=10)
    ap.add_argument("--length-scale", type=float, default=8.0)
    args = ap.parse_args()

    print(f"{'seed':>4} {'theta':>7} {'d_min':>9} {'r_eff':>6} {'J80':>4} {'J90':>4}")
    rows = []
    for s in range(args.seeds):
        data = generate_confounded(SyntheticConfig(seed=s, grf_length_scale=args.length_scale))
        train, _ = train_test_split(data, 0.8, seed=s)
        theta = max(party_thetas(train.X, partition_features(train.p, 2)))
        J = variance_components(train.X, (0.8, 0.9))
        row = (theta, d_min(train.X), effective_rank(train.X), J[0.8], J[0.9])
        rows.append(row)
        print(f"{s:>4} {row[0]:7.2f} {row[1]:9.2e} {row[2]:6.2f} {row[3]:4d} {row[4]:4d}")
    m = np.mean(rows, axis=0)
    print(f"{'mean':>4} {m[0]:7.2f} {m[1]:9.2e} {m[2]:6.2f} {m[3]:4.1f} {m[4]:4.1f}")


if __name__ == "__main__":
    main()
