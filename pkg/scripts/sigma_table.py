"""Largest per-party noise level over an epsilon grid (delta = 0.05) for given column ranges."""

import argparse

from pride.privacy import noise_sigma

EPSILONS = [0.1, 0.25, 0.5, 0.75, 1, 2, 5, 10, 20]


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--theta", type=float, nargs="+", default=[7.41, 8.51, 10.92])
    ap.add_argument("--delta", type=float, default=0.05)
    args = ap.parse_args()
    print("theta  " + "".join(f"{e:>8g}" for e in EPSILONS))
    for t in args.theta:
        print(f"{t:5.2f}  " + "".join(f"{noise_sigma(e, args.delta, t):8.2f}" for e in EPSILONS))


if __name__ == "__main__":
    main()
