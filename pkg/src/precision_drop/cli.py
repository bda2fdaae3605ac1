"""Command-line entry point: ``simulate``, ``perf``, ``dataset`` and ``evaluate``."""

from __future__ import annotations

import argparse
import itertools
import json
import logging
import sys
from dataclasses import asdict, replace
from pathlib import Path

import numpy as np

from .config import ExperimentConfig, load_config
from .dataset import dump_frame, generate_frames, load_dataset, write_dataset
from .detector import evaluate
from .navigation import Mode
from .performance import TABLE1_THROTTLES, MotorPropCurve, table1_curve, table_report, write_table_csv
from .runner import AllRunsAborted, MissionRecord, compare, run_mission, summarize, write_runs_csv
from .worldsim import write_trajectory

log = logging.getLogger("precision_drop")

MODES = {"gps-only": [Mode.GPS_ONLY], "vision": [Mode.VISION_ASSISTED], "compare": [Mode.GPS_ONLY, Mode.VISION_ASSISTED]}


def _config(path: str | None) -> ExperimentConfig:
    return load_config(path) if path else ExperimentConfig()


def _floats(text: str) -> list[float]:
    try:
        return [float(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def _frame_dumper(directory: Path):
    n = itertools.count()
    return lambda frame, detection: dump_frame(directory, f"frame_{next(n):05d}", frame)


def cmd_simulate(args) -> int:
    config = _config(args.config)
    if args.seeds is not None or args.base_seed is not None:
        config = replace(
            config,
            seeds=None,
            count=args.seeds if args.seeds is not None else config.count,
            base_seed=args.base_seed if args.base_seed is not None else config.base_seed,
        )
    seeds = config.seed_list()
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)

    by_mode = {}
    with open(out / "events.jsonl", "w") as events:
        for mode in MODES[args.mode]:
            results = []
            for i, seed in enumerate(seeds):
                tag = f"{mode.value}_{seed}"
                sink = _frame_dumper(out / "frames" / tag) if args.dump_frames else None
                record = MissionRecord([], [], sink)
                r = run_mission(config, seed, mode, record)
                results.append(r)
                for e in record.events:
                    events.write(json.dumps({"seed": seed, "mode": mode.value, **asdict(e)}) + "\n")
                if args.trajectories:
                    (out / "trajectories").mkdir(exist_ok=True)
                    with open(out / "trajectories" / f"{tag}.csv", "w") as f:
                        write_trajectory(record.trajectory, f)
                if (i + 1) % 50 == 0:
                    log.info("%s: %d/%d runs", mode.value, i + 1, len(seeds))
            by_mode[mode] = results

    with open(out / "runs.csv", "w") as f:
        write_runs_csv([r for rs in by_mode.values() for r in rs], f)
    try:
        if args.mode == "compare":
            report = compare(by_mode[Mode.GPS_ONLY], by_mode[Mode.VISION_ASSISTED])
            summary = asdict(report)
        else:
            (mode,) = by_mode
            summary = {"mode": mode.value, **asdict(summarize(by_mode[mode]))}
    except AllRunsAborted as e:
        print(f"error: {e}", file=sys.stderr)
        return 1
    (out / "summary.json").write_text(json.dumps(summary, indent=2) + "\n")
    json.dump(summary, sys.stdout, indent=2)
    sys.stdout.write("\n")
    return 0


def cmd_perf(args) -> int:
    curve = MotorPropCurve.from_csv(args.curve) if args.curve else table1_curve()
    airframe = _config(args.config).airframe
    points = table_report(curve, airframe, args.throttles or TABLE1_THROTTLES)
    if args.out:
        with open(args.out, "w") as f:
            write_table_csv(points, f)
    else:
        write_table_csv(points, sys.stdout)
    return 0


def cmd_dataset(args) -> int:
    config = _config(args.config)
    rng = np.random.default_rng(args.seed)
    frames = generate_frames(args.frames, args.target_fraction, rng, config.camera, config.target, config.scene)
    path = write_dataset(frames, args.out)
    print(path)
    return 0


def cmd_evaluate(args) -> int:
    config = _config(args.config)
    report = evaluate(load_dataset(args.manifest), config.detector, args.iou)
    if args.out:
        with open(args.out, "w") as f:
            report.to_json(f)
    report.to_json(sys.stdout)
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="precision-drop", description=__doc__)
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("simulate", help="Monte Carlo missions in one or both guidance modes")
    s.add_argument("--config")
    s.add_argument("--mode", choices=list(MODES), default="compare")
    s.add_argument("--seeds", type=int, help="number of seeds (overrides the config)")
    s.add_argument("--base-seed", type=int)
    s.add_argument("--out", required=True)
    s.add_argument("--dump-frames", action="store_true", help="write every rendered frame as PPM + JSON")
    s.add_argument("--trajectories", action="store_true", help="write per-run trajectory CSVs")
    s.set_defaults(func=cmd_simulate)

    s = sub.add_parser("perf", help="Table-1 style performance report")
    s.add_argument("--curve", help="motor/prop CSV (throttle,current_a,power_w,thrust_gf)")
    s.add_argument("--config")
    s.add_argument("--throttles", type=_floats, help="comma-separated throttle fractions")
    s.add_argument("--out")
    s.set_defaults(func=cmd_perf)

    s = sub.add_parser("dataset", help="synthetic annotated frame set")
    s.add_argument("--config")
    s.add_argument("--frames", type=int, required=True)
    s.add_argument("--target-fraction", type=float, required=True)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_dataset)

    s = sub.add_parser("evaluate", help="score the reference detector on a dataset")
    s.add_argument("--manifest", required=True, help="manifest.json or its directory")
    s.add_argument("--config")
    s.add_argument("--iou", type=float, default=0.5)
    s.add_argument("--out")
    s.set_defaults(func=cmd_evaluate)
    return p


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    try:
        return args.func(args)
    except (ValueError, OSError) as e:  # ConfigError and ThrottleOutOfRange included
        print(f"error: {e}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
