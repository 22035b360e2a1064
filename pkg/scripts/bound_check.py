"""Empirical error against the estimation error bound on a low-rank design."""

import argparse

from pride.analysis import bound_tracking, low_rank_design
from pride.core import partition_features


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--n", type=int, default=200)
    ap.add_argument("--p", type=int, default=2000)
    ap.add_argument("--rank", type=int, default=5)
    ap.add_argument("--tau-subs", type=int, default=200)
    ap.add_argument("--lam", type=float, default=0.1)
    ap.add_argument("--seeds", type=int, default=10)
    ap.add_argument("--sigma", type=float, nargs="+", default=[0.0, 0.01, 0.1, 1.0, 3.0])
    args = ap.parse_args()

    data = low_rank_design(args.n, args.p, args.rank, seed=0)
    rows = bound_tracking(data, partition_features(args.p, 2), args.tau_subs, args.lam,
                          args.sigma, range(args.seeds))
    print(f"rho = {rows[0]['rho']:.4f}")
    print(f"{'sigma':>8} {'error':>10} {'bound':>10} {'ratio':>8}")
    for r in rows:
        print(f"{r['sigma']:8g} {r['error']:10.4g} {r['bound']:10.4g} {r['ratio']:8.4f}")


if __name__ == "__main__":
    main()
