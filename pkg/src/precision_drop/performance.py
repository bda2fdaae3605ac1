"""Multirotor performance estimates from a motor/propeller bench curve.

Per-motor current, power and thrust are linearly interpolated in throttle,
then scaled to the whole airframe. Takeoff velocity is the momentum-theory
induced velocity through the total disk area; horizontal velocity uses
``2 * v_induced * sin(tilt)``.
"""

from __future__ import annotations

import bisect
import csv
import io
import math
from dataclasses import dataclass
from importlib import resources
from pathlib import Path
from typing import Iterable, Sequence, TextIO

GF_TO_N = 9.80665e-3

TABLE1_THROTTLES = (0.166, 0.333, 0.5, 0.666, 0.833, 1.0)


class ThrottleOutOfRange(ValueError):
    pass


@dataclass(frozen=True)
class CurveSample:
    throttle: float
    current_a: float
    power_w: float
    thrust_gf: float


@dataclass(frozen=True)
class MotorPropCurve:
    samples: tuple[CurveSample, ...]

    def __post_init__(self):
        s = self.samples
        if len(s) < 2:
            raise ValueError("curve needs at least 2 samples")
        for a in s:
            if not 0.0 <= a.throttle <= 1.0:
                raise ValueError(f"throttle {a.throttle} outside [0, 1]")
            if min(a.current_a, a.power_w, a.thrust_gf) <= 0:
                raise ValueError(f"non-positive sample at throttle {a.throttle}")
        for a, b in zip(s, s[1:]):
            if b.throttle <= a.throttle:
                raise ValueError("throttle values must be strictly increasing")
            if b.current_a < a.current_a or b.power_w < a.power_w or b.thrust_gf < a.thrust_gf:
                raise ValueError(f"curve decreases between throttle {a.throttle} and {b.throttle}")

    @classmethod
    def from_rows(cls, rows: Iterable[Sequence[float]]) -> MotorPropCurve:
        return cls(tuple(CurveSample(*map(float, r)) for r in rows))

    @classmethod
    def from_csv(cls, path_or_file) -> MotorPropCurve:
        """Read a ``throttle,current_a,power_w,thrust_gf`` CSV."""
        if isinstance(path_or_file, (str, Path)):
            with open(path_or_file, newline="") as f:
                return cls._read(f)
        return cls._read(path_or_file)

    @classmethod
    def _read(cls, f: TextIO) -> MotorPropCurve:
        reader = csv.DictReader(f)
        want = ["throttle", "current_a", "power_w", "thrust_gf"]
        if reader.fieldnames is None or [h.strip() for h in reader.fieldnames] != want:
            raise ValueError(f"curve CSV header must be {','.join(want)}")
        rows = [[float(r[k]) for k in want] for r in reader]
        return cls.from_rows(rows)

    @property
    def domain(self) -> tuple[float, float]:
        return self.samples[0].throttle, self.samples[-1].throttle

    def at(self, throttle: float) -> tuple[float, float, float]:
        """Per-motor (current, power, thrust) at ``throttle``."""
        lo, hi = self.domain
        if not lo <= throttle <= hi:
            raise ThrottleOutOfRange(f"throttle {throttle} outside sampled domain [{lo}, {hi}]")
        ts = [s.throttle for s in self.samples]
        i = bisect.bisect_left(ts, throttle)
        if ts[i] == throttle:
            s = self.samples[i]
            return s.current_a, s.power_w, s.thrust_gf
        a, b = self.samples[i - 1], self.samples[i]
        w = (throttle - a.throttle) / (b.throttle - a.throttle)
        return (
            a.current_a + w * (b.current_a - a.current_a),
            a.power_w + w * (b.power_w - a.power_w),
            a.thrust_gf + w * (b.thrust_gf - a.thrust_gf),
        )


def table1_curve() -> MotorPropCurve:
    """The AT2317 / 9x4.5 bench curve behind the six published throttle columns."""
    text = resources.files("precision_drop").joinpath("data/table1_curve.csv").read_text()
    return MotorPropCurve.from_csv(io.StringIO(text))


@dataclass(frozen=True)
class AirframeConfig:
    total_mass_g: float = 1953.0
    motor_count: int = 4
    prop_diameter_m: float = 0.2286  # 9 in
    battery_capacity_ah: float = 6.2
    avionics_current_a: float = 1.1
    avionics_power_w: float = 5.5
    air_density: float = 1.1626

    def __post_init__(self):
        if self.total_mass_g <= 0:
            raise ValueError("total_mass_g must be positive")
        if self.motor_count < 1:
            raise ValueError("motor_count must be >= 1")
        if self.prop_diameter_m <= 0:
            raise ValueError("prop_diameter_m must be positive")
        if self.battery_capacity_ah <= 0:
            raise ValueError("battery_capacity_ah must be positive")
        if not 0.8 <= self.air_density <= 1.4:
            raise ValueError(f"air_density {self.air_density} outside [0.8, 1.4]")

    @property
    def disk_area_m2(self) -> float:
        return self.motor_count * math.pi * (self.prop_diameter_m / 2) ** 2


@dataclass(frozen=True)
class PerformancePoint:
    throttle: float
    total_current: float
    total_power: float
    total_thrust: float
    motor_efficiency: float
    thrust_to_weight: float
    flight_time: float
    tilt_angle: float | None = None
    takeoff_velocity: float | None = None
    horizontal_velocity: float | None = None
    range_km: float | None = None


def evaluate_at(curve: MotorPropCurve, config: AirframeConfig, throttle: float) -> PerformancePoint:
    current, power, thrust = curve.at(throttle)
    n = config.motor_count
    total_current = n * current + config.avionics_current_a
    total_thrust = n * thrust
    twr = total_thrust / config.total_mass_g
    flight_time = config.battery_capacity_ah / total_current * 60.0
    point = dict(
        throttle=throttle,
        total_current=total_current,
        total_power=n * power + config.avionics_power_w,
        total_thrust=total_thrust,
        motor_efficiency=thrust / power,
        thrust_to_weight=twr,
        flight_time=flight_time,
    )
    if twr > 1.0:
        tilt = math.degrees(math.acos(config.total_mass_g / total_thrust))
        v_takeoff = math.sqrt(total_thrust * GF_TO_N / (2 * config.air_density * config.disk_area_m2))
        v_horizontal = 2 * v_takeoff * math.sin(math.radians(tilt))
        point.update(
            tilt_angle=tilt,
            takeoff_velocity=v_takeoff,
            horizontal_velocity=v_horizontal,
            range_km=v_horizontal * flight_time * 60.0 / 1000.0,
        )
    return PerformancePoint(**point)


def table_report(
    curve: MotorPropCurve, config: AirframeConfig, throttles: Iterable[float]
) -> list[PerformancePoint]:
    return [evaluate_at(curve, config, t) for t in throttles]


# (label, attribute, decimals)
TABLE_ROWS = [
    ("Total Current draw of UAV (A)", "total_current", 2),
    ("Total Power drawn by UAV (W)", "total_power", 2),
    ("Total Thrust (gf)", "total_thrust", 2),
    ("Efficiency of Motor (gf/W)", "motor_efficiency", 2),
    ("Thrust-to-Weight Ratio", "thrust_to_weight", 2),
    ("Tilt Angle (deg)", "tilt_angle", 2),
    ("Takeoff Velocity (m/s)", "takeoff_velocity", 2),
    ("Horizontal Velocity (m/s)", "horizontal_velocity", 2),
    ("Flight Time (minutes)", "flight_time", 3),
    ("Range (kilometers)", "range_km", 2),
]


def write_table_csv(points: Sequence[PerformancePoint], out: TextIO) -> None:
    """One row per quantity, one column per throttle; absent values print as ``-``."""
    w = csv.writer(out, lineterminator="\n")
    w.writerow(["Throttle Percent"] + [f"{p.throttle * 100:.1f}%" for p in points])
    for label, attr, digits in TABLE_ROWS:
        cells = []
        for p in points:
            v = getattr(p, attr)
            cells.append("-" if v is None else f"{v:.{digits}f}")
        w.writerow([label] + cells)
