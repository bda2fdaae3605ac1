"""Sweeps used to pick the GPS noise, release radius and alignment gain defaults.

    python scripts/calibrate.py gps      # bias/white noise x release radius, GPS-only
    python scripts/calibrate.py align    # alignment kp, vision-assisted
"""

import sys
from dataclasses import replace

import numpy as np

from precision_drop.config import ExperimentConfig
from precision_drop.control import PidGains
from precision_drop.navigation import Mode
from precision_drop.runner import run_ensemble, summarize


def gps_sweep(base, seeds=range(500)):
    for bias in (1.7, 1.8):
        for white in (0.5, 0.6):
            for radius in (2.0, 2.5, 3.0):
                cfg = replace(base, gps=replace(base.gps, bias_std=bias, white_noise_std=white),
                              plan=replace(base.plan, release_radius=radius))
                runs = run_ensemble(cfg, Mode.GPS_ONLY, seeds)
                s = summarize(runs)
                cep = np.percentile(np.concatenate([r.gps_fix_errors for r in runs]), 95)
                print(f"bias {bias} white {white} radius {radius}: mean {s.mean_error:.3f} "
                      f"p95 {s.p95_error:.3f} fix CEP95 {cep:.3f}", flush=True)


def align_sweep(base, seeds=range(60)):
    for kp in (0.8, 0.6, 0.5, 0.4):
        cfg = replace(base, plan=replace(base.plan, align_gains=PidGains(kp=kp, output_limit=3.0)))
        s = summarize(run_ensemble(cfg, Mode.VISION_ASSISTED, seeds))
        print(f"kp {kp}: mean {s.mean_error:.3f} median {s.median_error:.3f} p95 {s.p95_error:.3f} "
              f"abort {s.abort_rate:.1%}", flush=True)


if __name__ == "__main__":
    which = sys.argv[1] if len(sys.argv) > 1 else "gps"
    {"gps": gps_sweep, "align": align_sweep}[which](ExperimentConfig())
