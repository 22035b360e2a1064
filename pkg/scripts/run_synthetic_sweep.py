"""Full synthetic sweep and a compact error table per projection dimension."""

import argparse
from pathlib import Path

from pride.experiment import ExperimentConfig, run_experiment

ROOT = Path(__file__).resolve().parents[1]


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--config", default=ROOT / "configs" / "synthetic.yaml")
    ap.add_argument("--out", default=None)
    ap.add_argument("--jobs", type=int, default=1)
    ap.add_argument("--seeds", type=int, default=None, help="override n_seeds")
    args = ap.parse_args()

    cfg = ExperimentConfig.from_file(args.config)
    if args.seeds:
        cfg.n_seeds = args.seeds
    res = run_experiment(cfg, args.out, jobs=args.jobs)
    print(f"{'method':>15} {'eps':>6} {'tau':>6} {'err':>8} {'err_X':>8} {'test':>8}")
    for s in res["summary"]:
        print(f"{s['method']:>15} {s['epsilon']:>6} {s['tau_subs_config'][:5]:>6} "
              f"{s.get('err_true_mean', float('nan')):8.3f} "
              f"{s.get('err_true_X_mean', float('nan')):8.3f} "
              f"{s.get('test_mse_mean', float('nan')):8.3f}")
    print(f"results in {res['out_dir']}")


if __name__ == "__main__":
    main()
