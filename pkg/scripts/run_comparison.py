"""Paired GPS-only vs vision-assisted ensemble; prints the comparison report.

    python scripts/run_comparison.py [--config configs/default.toml] [--seeds 500] [--out report.json]
"""

import argparse
import sys
import time

import numpy as np

from precision_drop.config import ExperimentConfig, load_config
from precision_drop.runner import run_comparison


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--config")
    ap.add_argument("--seeds", type=int, default=500)
    ap.add_argument("--base-seed", type=int, default=0)
    ap.add_argument("--out")
    args = ap.parse_args()

    config = load_config(args.config) if args.config else ExperimentConfig()
    seeds = range(args.base_seed, args.base_seed + args.seeds)
    done = 0

    def progress(_):
        nonlocal done
        done += 1
        if done % 100 == 0:
            print(f"{done}/{2 * len(seeds)} runs", file=sys.stderr)

    t0 = time.perf_counter()
    report, results = run_comparison(config, seeds, progress)
    fixes = np.concatenate([r.gps_fix_errors for r in results if r.mode == "gps_only"])
    print(f"elapsed {time.perf_counter() - t0:.0f} s; raw fix CEP95 {np.percentile(fixes, 95):.3f} m", file=sys.stderr)
    report.to_json(sys.stdout)
    if args.out:
        with open(args.out, "w") as f:
            report.to_json(f)


if __name__ == "__main__":
    main()
