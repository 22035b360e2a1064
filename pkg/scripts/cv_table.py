"""Lambda selected by global and by local cross-validation across epsilon."""

import argparse

import numpy as np

from pride.core import partition_features
from pride.cv import DEFAULT_LAMBDA_GRID, global_cv, local_cv_all
from pride.data import SyntheticConfig, generate_confounded, train_test_split

EPSILONS = [0.25, 0.5, 0.75, 1, 2, 5, 10, 20]


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--seeds", type=int, default=3)
    ap.add_argument("--tau-subs", type=float, default=0.2)
    ap.add_argument("--K", type=int, default=2)
    args = ap.parse_args()

    grid = np.asarray(DEFAULT_LAMBDA_GRID)
    glob = np.zeros((args.seeds, len(EPSILONS)))
    loc = np.zeros((args.seeds, len(EPSILONS), args.K))
    for s in range(args.seeds):
        train, _ = train_test_split(generate_confounded(SyntheticConfig(seed=s)), 0.8, seed=s)
        part = partition_features(train.p, args.K)
        for j, eps in enumerate(EPSILONS):
            glob[s, j], _ = global_cv(train, part, args.tau_subs, grid, eps, seed=s)
            loc[s, j], _ = local_cv_all(train, part, args.tau_subs, grid, eps, seed=s, master_seed=s)

    # geometric means over seeds, the grid is log-spaced
    print(f"{'epsilon':>10}" + "".join(f"{e:>10g}" for e in EPSILONS))
    print(f"{'GCV':>10}" + "".join(f"{v:10.3g}" for v in np.exp(np.log(glob).mean(0))))
    for k in range(args.K):
        vals = np.exp(np.log(loc[:, :, k]).mean(0))
        print(f"{f'LCV k={k + 1}':>10}" + "".join(f"{v:10.3g}" for v in vals))


if __name__ == "__main__":
    main()
