"""Command line entry point: ``pride {generate,run,bound,sigma}``."""

from __future__ import annotations

import argparse
import json
import logging
import sys
from dataclasses import asdict, replace
from pathlib import Path

import numpy as np

from pride.analysis import BoundInputs, error_bound
from pride.data import SyntheticConfig, generate_confounded, save_csv
from pride.experiment import ConfigError, ExperimentConfig, run_experiment
from pride.privacy import noise_sigma


def _cmd_generate(args) -> int:
    opts = {}
    if args.config:
        cfg = ExperimentConfig.from_file(args.config)
        if cfg.dataset.get("kind") != "synthetic":
            raise ConfigError("generate needs a synthetic dataset config")
        opts = {k: v for k, v in cfg.dataset.items() if k != "kind"}
    syn = SyntheticConfig(**{**opts, "seed": args.seed})
    data = generate_confounded(syn)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    save_csv(data, out / "synthetic.csv")
    np.savetxt(out / "true_beta.csv", data.true_beta, delimiter=",", fmt="%.17g")
    (out / "synthetic.json").write_text(
        json.dumps({"config": asdict(syn), "confound_pairs": data.confound_pairs,
                    "block_labels": data.block_labels}, indent=2) + "\n")
    print(f"wrote {data.n}x{data.p} design to {out / 'synthetic.csv'}")
    return 0


def _cmd_run(args) -> int:
    cfg = ExperimentConfig.from_file(args.config)
    if args.seed is not None:
        cfg = replace(cfg, master_seed=args.seed)
    result = run_experiment(cfg, args.out, jobs=args.jobs)
    n_fail = sum(1 for r in result["details"] if r.get("error"))
    print(f"{len(result['details'])} cells ({n_fail} failed) -> {result['out_dir']}")
    return 0


def _cmd_bound(args) -> int:
    b = error_bound(BoundInputs(args.r, args.tau_k, args.sigma, args.d_min,
                                   args.beta_norm, args.K, args.C, args.xi))
    print(json.dumps(b._asdict()))
    return 0


def _cmd_sigma(args) -> int:
    w = max(len(f"{e:g}") for e in args.epsilon)
    print("theta".rjust(8) + "".join(f"{e:g}".rjust(max(w, 8) + 1) for e in args.epsilon))
    for theta in args.theta:
        cells = [noise_sigma(e, args.delta, theta, args.w2) for e in args.epsilon]
        print(f"{theta:8.2f}" + "".join(f"{c:.2f}".rjust(max(w, 8) + 1) for c in cells))
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="pride", description=__doc__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    g = sub.add_parser("generate", help="write a synthetic confounded dataset to CSV")
    g.add_argument("--config", help="experiment config whose dataset section is used")
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--out", default=".")
    g.set_defaults(func=_cmd_generate)

    r = sub.add_parser("run", help="run an experiment sweep")
    r.add_argument("--config", required=True)
    r.add_argument("--seed", type=int, default=None, help="override master_seed")
    r.add_argument("--out", default=None, help="override output_dir")
    r.add_argument("--jobs", type=int, default=1)
    r.set_defaults(func=_cmd_run)

    b = sub.add_parser("bound", help="evaluate the estimation error bound")
    b.add_argument("--r", type=int, required=True, help="rank of the design")
    b.add_argument("--tau-k", type=int, required=True, help="(K-1) * tau_subs")
    b.add_argument("--sigma", type=float, required=True, help="max_k sigma_k")
    b.add_argument("--d-min", type=float, required=True)
    b.add_argument("--beta-norm", type=float, required=True)
    b.add_argument("--K", type=int, required=True)
    b.add_argument("--C", type=float, default=1.0)
    b.add_argument("--xi", type=float, default=0.05)
    b.set_defaults(func=_cmd_bound)

    s = sub.add_parser("sigma", help="noise level table for given column ranges")
    s.add_argument("--theta", type=float, nargs="+", required=True)
    s.add_argument("--epsilon", type=float, nargs="+", required=True)
    s.add_argument("--delta", type=float, default=0.05)
    s.add_argument("--w2", type=float, default=1.0)
    s.set_defaults(func=_cmd_sigma)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (ConfigError, ValueError, OSError) as exc:
        print(f"pride {args.command}: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
