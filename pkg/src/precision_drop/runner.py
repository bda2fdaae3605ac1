"""End-to-end missions and paired Monte Carlo comparison of the two guidance modes."""

from __future__ import annotations

import csv
import json
import math
from dataclasses import asdict, dataclass, replace
from typing import Callable, Iterable, Sequence, TextIO

import numpy as np

from .config import ExperimentConfig
from .detector import Detection, detect
from .geo import EnuPoint
from .navigation import MissionEvent, MissionResult, MissionState, Mode, Phase, mission_step
from .sensors import Frame, NoiseBank, random_scene, render_frame, sample_gps
from .worldsim import UavState, step

VISION_PHASES = (Phase.VISION_SEARCH, Phase.ALIGNING)


@dataclass
class MissionRecord:
    """Optional per-step telemetry collected by :func:`run_mission`."""

    trajectory: list[tuple[UavState, str]]
    events: list[MissionEvent]
    frame_sink: Callable[[Frame, Detection | None], None] | None = None


def _streams(seed: int) -> dict[str, np.random.Generator]:
    names = ("gps", "wind", "scene", "camera")
    children = np.random.SeedSequence(seed).spawn(len(names))
    return {n: np.random.default_rng(c) for n, c in zip(names, children)}


def run_mission(
    config: ExperimentConfig,
    seed: int,
    mode: Mode | str,
    record: MissionRecord | None = None,
    detector: Callable[[Frame], Detection | None] | None = None,
) -> MissionResult:
    """Fly one mission: 50 Hz plant, GPS at ``gps.fix_rate``, camera at ``camera.frame_rate``.

    Frames are only rendered while the mission is in a vision phase; the
    camera is idle otherwise. Every noise source draws from its own stream
    derived from ``seed``, so both modes see identical GPS and wind noise.
    """
    mode = Mode(mode)
    plan = replace(config.plan, mode=mode)
    world, camera = config.world, config.camera
    if detector is None:
        detector = lambda f: detect(f, config.detector)  # noqa: E731
    rng = _streams(seed)

    target = replace(config.target, center=EnuPoint(plan.drop_enu.east, plan.drop_enu.north, 0.0))
    scene = random_scene(rng["scene"], target.center, config.scene)
    dt = world.timestep
    gps_every = max(1, round(1.0 / (config.gps.fix_rate * dt)))
    max_steps = int(math.ceil(config.max_mission_time / dt))

    state = UavState(EnuPoint(0.0, 0.0, 0.0), (0.0, 0.0, 0.0), config.initial_yaw, 0.0)
    gps_model = config.gps
    mstate = MissionState()
    fix = None
    bank = None
    fix_errors: list[float] = []
    last_frame = -1
    landing_error = None
    fallback = False
    abort_reason = "mission_timeout"

    for k in range(max_steps):
        if k % gps_every == 0:
            fix, gps_model = sample_gps(state, gps_model, rng["gps"])
            fix_errors.append(fix.estimated_position.horizontal_distance(state.position))

        frame = det = None
        frame_index = int(k * dt * camera.frame_rate + 1e-9)
        if frame_index > last_frame:
            last_frame = frame_index
            if mstate.phase in VISION_PHASES and state.position.up > 0.1:
                if bank is None and scene.noise_std > 0:
                    bank = NoiseBank((camera.height, camera.width, 3), scene.noise_std, rng["camera"])
                frame = render_frame(camera, state, target, scene, rng["camera"], bank)
                det = detector(frame)
                if record is not None and record.frame_sink is not None:
                    record.frame_sink(frame, det)

        was_released = mstate.released
        mstate, cmd, events = mission_step(mstate, plan, fix, frame, det, camera, state.time)
        if record is not None:
            record.events.extend(events)
            record.trajectory.append((state, mstate.phase.value))
        if mstate.released and not was_released:
            landing_error = state.position.horizontal_distance(target.center)
            fallback = any(e.event == "payload_release" and e.phase == Phase.GPS_FALLBACK_DROP.value
                           for e in events)
            break
        if mstate.phase is Phase.ABORTED:
            abort_reason = mstate.abort_reason
            break
        state = step(state, cmd, world, rng["wind"])

    released = landing_error is not None
    return MissionResult(
        seed=seed,
        mode=mode.value,
        landing_error=landing_error,
        release_time=mstate.release_time,
        frames_processed=mstate.frames_processed,
        detections=mstate.detections,
        aborted=not released,
        abort_reason=None if released else abort_reason,
        fallback_drop=fallback,
        gps_fix_errors=tuple(fix_errors),
    )


# ---------------------------------------------------------------- ensembles


@dataclass(frozen=True)
class ModeStats:
    n_runs: int
    n_aborted: int
    mean_error: float
    median_error: float
    p95_error: float
    abort_rate: float


@dataclass(frozen=True)
class ComparisonReport:
    n_runs: int
    gps_only: ModeStats
    vision_assisted: ModeStats
    improvement_ratio: float

    def to_json(self, out: TextIO) -> None:
        json.dump(asdict(self), out, indent=2)
        out.write("\n")


class AllRunsAborted(RuntimeError):
    pass


def summarize(results: Sequence[MissionResult]) -> ModeStats:
    errors = np.array([r.landing_error for r in results if not r.aborted], dtype=float)
    n_aborted = sum(r.aborted for r in results)
    if errors.size == 0:
        raise AllRunsAborted(f"all {len(results)} runs aborted")
    return ModeStats(
        n_runs=len(results),
        n_aborted=n_aborted,
        mean_error=float(errors.mean()),
        median_error=float(np.median(errors)),
        p95_error=float(np.percentile(errors, 95)),
        abort_rate=n_aborted / len(results),
    )


def run_ensemble(
    config: ExperimentConfig, mode: Mode | str, seeds: Iterable[int] | None = None, progress=None
) -> list[MissionResult]:
    seeds = config.seed_list() if seeds is None else list(seeds)
    out = []
    for s in seeds:
        out.append(run_mission(config, s, mode))
        if progress is not None:
            progress(out[-1])
    return out


def compare(gps_runs: Sequence[MissionResult], vision_runs: Sequence[MissionResult]) -> ComparisonReport:
    if [r.seed for r in gps_runs] != [r.seed for r in vision_runs]:
        raise ValueError("comparison needs the same seeds in both modes")
    g, v = summarize(gps_runs), summarize(vision_runs)
    return ComparisonReport(len(gps_runs), g, v, g.mean_error / v.mean_error)


def run_comparison(
    config: ExperimentConfig, seeds: Iterable[int] | None = None, progress=None
) -> tuple[ComparisonReport, list[MissionResult]]:
    """Every seed in both modes (paired); returns the report and all per-run results."""
    seeds = config.seed_list() if seeds is None else list(seeds)
    g = run_ensemble(config, Mode.GPS_ONLY, seeds, progress)
    v = run_ensemble(config, Mode.VISION_ASSISTED, seeds, progress)
    return compare(g, v), g + v


RUNS_HEADER = ["seed", "mode", "landing_error_m", "release_time_s", "aborted", "frames", "detections"]


def write_runs_csv(results: Iterable[MissionResult], out: TextIO) -> None:
    w = csv.writer(out, lineterminator="\n")
    w.writerow(RUNS_HEADER)
    for r in results:
        w.writerow([
            r.seed,
            r.mode,
            "" if r.landing_error is None else repr(r.landing_error),
            "" if r.release_time is None else f"{r.release_time:.2f}",
            int(r.aborted),
            r.frames_processed,
            r.detections,
        ])


def read_runs_csv(f: TextIO) -> list[dict]:
    rows = []
    for row in csv.DictReader(f):
        rows.append({
            "seed": int(row["seed"]),
            "mode": row["mode"],
            "landing_error_m": float(row["landing_error_m"]) if row["landing_error_m"] else None,
            "aborted": row["aborted"] == "1",
        })
    return rows
