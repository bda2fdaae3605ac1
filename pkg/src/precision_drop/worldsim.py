"""Ground-truth vehicle plant: first-order velocity tracking on a fixed step.

The autopilot's attitude and rate loops are abstracted away; commanded
velocity is tracked with a single time constant, plus optional gusty wind.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from typing import Sequence, TextIO

import numpy as np

from .control import PidGains, PidState, pid_step
from .geo import EnuPoint

Vec3 = tuple[float, float, float]


@dataclass(frozen=True)
class UavState:
    position: EnuPoint
    velocity: Vec3 = (0.0, 0.0, 0.0)
    yaw: float = 0.0  # radians, compass heading (clockwise from north)
    time: float = 0.0

    @property
    def altitude(self) -> float:
        return self.position.up


@dataclass(frozen=True)
class VelocityCommand:
    desired_velocity: Vec3 = (0.0, 0.0, 0.0)

    def __post_init__(self):
        if not all(math.isfinite(v) for v in self.desired_velocity):
            raise ValueError(f"non-finite velocity command {self.desired_velocity}")


HOLD = VelocityCommand()


@dataclass(frozen=True)
class WorldConfig:
    timestep: float = 0.02
    max_horizontal_speed: float = 11.28  # 66.6 % throttle horizontal velocity of the airframe
    max_vertical_speed: float = 2.5
    velocity_time_constant: float = 0.8
    wind_mean: tuple[float, float] = (0.0, 0.0)
    gust_std: float = 0.0
    rng_seed: int = 0

    def __post_init__(self):
        if not 0 < self.timestep <= 0.1:
            raise ValueError("timestep must be in (0, 0.1]")
        if self.velocity_time_constant <= 0:
            raise ValueError("velocity_time_constant must be positive")
        if self.max_horizontal_speed <= 0 or self.max_vertical_speed <= 0:
            raise ValueError("speed limits must be positive")
        if self.gust_std < 0:
            raise ValueError("gust_std must be non-negative")


def clamp_command(cmd: VelocityCommand, config: WorldConfig) -> Vec3:
    ve, vn, vu = cmd.desired_velocity
    speed = math.hypot(ve, vn)
    if speed > config.max_horizontal_speed:
        k = config.max_horizontal_speed / speed
        ve, vn = ve * k, vn * k
    vu = max(-config.max_vertical_speed, min(config.max_vertical_speed, vu))
    return ve, vn, vu


def sample_wind(config: WorldConfig, rng: np.random.Generator) -> tuple[float, float]:
    we, wn = config.wind_mean
    if config.gust_std > 0:
        ge, gn = rng.normal(0.0, config.gust_std, 2)
        g = math.hypot(ge, gn)
        cap = 5.0 * config.gust_std
        if g > cap:
            ge, gn = ge * cap / g, gn * cap / g
        we, wn = we + ge, wn + gn
    return we, wn


def step(
    state: UavState, cmd: VelocityCommand, config: WorldConfig, rng: np.random.Generator
) -> UavState:
    if not all(math.isfinite(v) for v in state.velocity):
        raise ValueError("non-finite state velocity")
    dt = config.timestep
    a = dt / config.velocity_time_constant
    ce, cn, cu = clamp_command(cmd, config)
    we, wn = sample_wind(config, rng)
    ve, vn, vu = state.velocity
    ve += a * (ce + we - ve)
    vn += a * (cn + wn - vn)
    vu += a * (cu - vu)

    p = state.position
    up = p.up + vu * dt
    if up <= 0.0:
        up = 0.0
        vu = 0.0
    return UavState(
        EnuPoint(p.east + ve * dt, p.north + vn * dt, up),
        (ve, vn, vu),
        state.yaw,
        state.time + dt,
    )


def hover_at(
    state: UavState,
    target: EnuPoint,
    gains: PidGains,
    pids: Sequence[PidState] | None = None,
) -> tuple[VelocityCommand, tuple[PidState, ...]]:
    """Per-axis PID on (target - position); returns the command and updated PID states."""
    if pids is None:
        pids = (PidState.fresh(state.time),) * 3
    p = state.position
    errors = (target.east - p.east, target.north - p.north, target.up - p.up)
    out, new = [], []
    for err, pid in zip(errors, pids):
        u, s = pid_step(gains, pid, err, state.time)
        out.append(u)
        new.append(s)
    return VelocityCommand(tuple(out)), tuple(new)


TRAJECTORY_HEADER = ["time", "east", "north", "up", "ve", "vn", "vu", "mode"]


def write_trajectory(rows: Sequence[tuple[UavState, str]], out: TextIO) -> None:
    w = csv.writer(out, lineterminator="\n")
    w.writerow(TRAJECTORY_HEADER)
    for s, mode in rows:
        p, v = s.position, s.velocity
        w.writerow([f"{s.time:.2f}", f"{p.east:.4f}", f"{p.north:.4f}", f"{p.up:.4f}",
                    f"{v[0]:.4f}", f"{v[1]:.4f}", f"{v[2]:.4f}", mode])

