"""Experiment configuration: nested dataclasses, loadable from TOML."""

from __future__ import annotations

import dataclasses
import sys
import types
import typing
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from .control import PidGains
from .detector import DetectorConfig
from .geo import GeoPoint
from .navigation import MissionPlan, Mode
from .performance import AirframeConfig
from .sensors import CameraModel, GpsModel, SceneParams, TargetSpec
from .worldsim import WorldConfig


class ConfigError(ValueError):
    pass


DEFAULT_ORIGIN = GeoPoint(13.3525, 74.7928, 0.0)


def default_plan() -> MissionPlan:
    return MissionPlan(
        origin=DEFAULT_ORIGIN,
        waypoints=(GeoPoint(13.3531, 74.7932, 0.0),),
        drop_location=GeoPoint(13.3537, 74.7938, 0.0),
    )


@dataclass(frozen=True)
class ExperimentConfig:
    world: WorldConfig = WorldConfig()
    gps: GpsModel = GpsModel()
    camera: CameraModel = CameraModel()
    target: TargetSpec = TargetSpec()
    detector: DetectorConfig = DetectorConfig()
    scene: SceneParams = SceneParams()
    plan: MissionPlan = field(default_factory=default_plan)
    airframe: AirframeConfig = AirframeConfig()
    base_seed: int = 0
    count: int = 500
    seeds: tuple[int, ...] | None = None
    initial_yaw: float = 0.0
    max_mission_time: float = 300.0

    def __post_init__(self):
        if self.seeds is None and self.count < 1:
            raise ConfigError("count must be >= 1")
        if self.seeds is not None and not self.seeds:
            raise ConfigError("explicit seed list is empty")

    def seed_list(self) -> list[int]:
        if self.seeds is not None:
            return list(self.seeds)
        return list(range(self.base_seed, self.base_seed + self.count))


# ---------------------------------------------------------------- loading


def _convert(tp, value, where: str):
    origin = typing.get_origin(tp)
    if tp is Any:
        return value
    if origin is typing.Union or origin is types.UnionType:
        args = [a for a in typing.get_args(tp) if a is not type(None)]
        if value is None:
            return None
        return _convert(args[0], value, where)
    if dataclasses.is_dataclass(tp):
        if tp is GeoPoint and isinstance(value, (list, tuple)):
            return GeoPoint(*value)
        if not isinstance(value, dict):
            raise ConfigError(f"{where}: expected a table")
        return build(tp, value, where)
    if isinstance(tp, type) and issubclass(tp, Mode):
        return Mode(str(value).replace("-", "_"))
    if origin is tuple:
        args = typing.get_args(tp)
        if not isinstance(value, (list, tuple)):
            raise ConfigError(f"{where}: expected a list")
        if len(args) == 2 and args[1] is Ellipsis:
            return tuple(_convert(args[0], v, where) for v in value)
        if len(args) != len(value):
            raise ConfigError(f"{where}: expected {len(args)} items")
        return tuple(_convert(a, v, where) for a, v in zip(args, value))
    if tp is float:
        return float(value)
    if tp is int:
        if isinstance(value, float) and not value.is_integer():
            raise ConfigError(f"{where}: expected an integer")
        return int(value)
    if tp is bool:
        return bool(value)
    return value


def build(cls, data: dict, where: str = ""):
    """Instantiate dataclass ``cls`` from a (possibly partial) mapping."""
    hints = typing.get_type_hints(cls)
    names = {f.name for f in dataclasses.fields(cls) if f.init}
    unknown = set(data) - names
    if unknown:
        raise ConfigError(f"{where or cls.__name__}: unknown keys {sorted(unknown)}")
    try:
        kwargs = {k: _convert(hints[k], v, f"{where}.{k}".lstrip(".")) for k, v in data.items()}
        if cls is MissionPlan:
            base = default_plan()
            kwargs = {**{f.name: getattr(base, f.name) for f in dataclasses.fields(MissionPlan)}, **kwargs}
        return cls(**kwargs)
    except ConfigError:
        raise
    except (TypeError, ValueError) as e:
        raise ConfigError(f"{where or cls.__name__}: {e}") from e


def load_config(path: str | Path) -> ExperimentConfig:
    with open(path, "rb") as f:
        data = tomllib.load(f)
    return build(ExperimentConfig, data)


__all__ = ["ExperimentConfig", "ConfigError", "load_config", "build", "default_plan", "PidGains"]
