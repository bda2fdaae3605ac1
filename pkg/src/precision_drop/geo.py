"""Geodetic <-> local ENU conversion (equirectangular, flat-earth)."""

from __future__ import annotations

import math
from dataclasses import dataclass

EARTH_RADIUS_M = 6_371_000.0
# flat-earth window, degrees of latitude/longitude separation from origin
MAX_SEPARATION_DEG = 1.0


class ProjectionError(ValueError):
    """Point lies outside the window where the flat-earth projection is valid."""


@dataclass(frozen=True)
class GeoPoint:
    latitude: float
    longitude: float
    altitude: float = 0.0  # meters above the ground origin

    def __post_init__(self):
        if not -90.0 <= self.latitude <= 90.0:
            raise ValueError(f"latitude out of range: {self.latitude}")
        if not -180.0 <= self.longitude <= 180.0:
            raise ValueError(f"longitude out of range: {self.longitude}")
        if not math.isfinite(self.altitude):
            raise ValueError("altitude must be finite")


@dataclass(frozen=True)
class EnuPoint:
    east: float
    north: float
    up: float = 0.0

    def __post_init__(self):
        if not (math.isfinite(self.east) and math.isfinite(self.north) and math.isfinite(self.up)):
            raise ValueError(f"non-finite ENU point: {self}")

    def horizontal_distance(self, other: EnuPoint) -> float:
        return math.hypot(self.east - other.east, self.north - other.north)


def to_enu(origin: GeoPoint, p: GeoPoint) -> EnuPoint:
    dlat = p.latitude - origin.latitude
    dlon = p.longitude - origin.longitude
    if abs(dlat) >= MAX_SEPARATION_DEG or abs(dlon) >= MAX_SEPARATION_DEG:
        raise ProjectionError(
            f"separation ({dlat:.4f}, {dlon:.4f}) deg exceeds {MAX_SEPARATION_DEG} deg window"
        )
    north = math.radians(dlat) * EARTH_RADIUS_M
    east = math.radians(dlon) * EARTH_RADIUS_M * math.cos(math.radians(origin.latitude))
    return EnuPoint(east, north, p.altitude - origin.altitude)


def from_enu(origin: GeoPoint, e: EnuPoint) -> GeoPoint:
    lat = origin.latitude + math.degrees(e.north / EARTH_RADIUS_M)
    lon = origin.longitude + math.degrees(
        e.east / (EARTH_RADIUS_M * math.cos(math.radians(origin.latitude)))
    )
    return GeoPoint(lat, lon, origin.altitude + e.up)
