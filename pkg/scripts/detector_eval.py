"""Score the reference detector on a freshly generated 1500-frame set (900 with the target)."""

import argparse
import sys

import numpy as np

from precision_drop.dataset import generate_frames
from precision_drop.detector import evaluate


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--frames", type=int, default=1500)
    ap.add_argument("--target-fraction", type=float, default=0.6)
    ap.add_argument("--seed", type=int, default=20240501)
    ap.add_argument("--iou", type=float, default=0.5)
    args = ap.parse_args()

    frames = generate_frames(args.frames, args.target_fraction, np.random.default_rng(args.seed))
    report = evaluate(((f, f.true_target_bbox) for f in frames), iou_threshold=args.iou)
    report.to_json(sys.stdout)


if __name__ == "__main__":
    main()
