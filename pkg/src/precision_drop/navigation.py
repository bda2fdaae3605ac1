"""Mission logic: GPS waypoint legs, handoff to vision alignment, payload release.

``mission_step`` is a pure transition function over an immutable
:class:`MissionState`; the runner calls it once per simulation tick with the
latest GPS fix and, on camera ticks, the frame and its detection.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field, replace
from enum import Enum
from functools import cached_property

from .control import PidGains, PidState, pid_step
from .detector import Detection
from .geo import EnuPoint, GeoPoint, to_enu
from .sensors import MIN_VIEW_ALTITUDE, CameraModel, DegenerateViewError, Frame, GpsFix
from .worldsim import HOLD, VelocityCommand

__all__ = [
    "PidGains", "PidState", "pid_step", "Phase", "Mode", "MissionPlan", "MissionState",
    "MissionEvent", "MissionResult", "mission_step", "pixel_error_to_meters", "search_pattern",
]


class Phase(str, Enum):
    PREFLIGHT_CHECK = "PreflightCheck"
    TAKEOFF = "Takeoff"
    EN_ROUTE = "EnRoute"
    VISION_SEARCH = "VisionSearch"
    ALIGNING = "Aligning"
    RELEASING = "Releasing"
    GPS_FALLBACK_DROP = "GpsFallbackDrop"
    LANDED = "Landed"
    ABORTED = "Aborted"


class Mode(str, Enum):
    GPS_ONLY = "gps_only"
    VISION_ASSISTED = "vision_assisted"


@dataclass(frozen=True)
class MissionPlan:
    origin: GeoPoint
    drop_location: GeoPoint
    waypoints: tuple[GeoPoint, ...] = ()
    mode: Mode = Mode.VISION_ASSISTED
    cruise_altitude: float = 20.0
    waypoint_radius: float = 2.0
    release_radius: float = 3.0
    handoff_threshold: float = 5.0
    align_tolerance_px: float = 58.0
    align_hold_frames: int = 10
    search_timeout: float = 30.0
    search_hold_time: float = 2.0
    search_leg_step: float = 2.0
    target_lost_timeout: float = 1.0
    takeoff_tolerance: float = 0.5
    preflight_timeout: float = 30.0
    gps_loss_timeout: float = 10.0
    nav_gains: PidGains = PidGains(kp=0.5, ki=0.02, kd=0.0, integrator_limit=5.0, output_limit=11.28)
    altitude_gains: PidGains = PidGains(kp=1.0, ki=0.05, kd=0.0, integrator_limit=2.0, output_limit=2.5)
    align_gains: PidGains = PidGains(kp=0.4, ki=0.0, kd=0.0, integrator_limit=1.0, output_limit=3.0)

    def __post_init__(self):
        object.__setattr__(self, "mode", Mode(self.mode))
        object.__setattr__(self, "waypoints", tuple(self.waypoints))
        for name in ("cruise_altitude", "waypoint_radius", "release_radius", "handoff_threshold",
                     "align_tolerance_px", "search_timeout", "target_lost_timeout"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")
        if self.align_hold_frames < 1:
            raise ValueError("align_hold_frames must be >= 1")

    @cached_property
    def legs_enu(self) -> tuple[EnuPoint, ...]:
        """Waypoints followed by the drop location, in the origin's ENU frame."""
        return tuple(to_enu(self.origin, p) for p in (*self.waypoints, self.drop_location))

    @property
    def drop_enu(self) -> EnuPoint:
        return self.legs_enu[-1]


@dataclass(frozen=True)
class MissionEvent:
    time: float
    phase: str
    event: str
    detail: str = ""

    def to_json(self) -> str:
        return json.dumps(asdict(self))


@dataclass(frozen=True)
class MissionState:
    phase: Phase = Phase.PREFLIGHT_CHECK
    waypoint_index: int = 0
    abort_reason: str | None = None
    phase_start: float = 0.0
    gps_invalid_since: float | None = None
    last_detection_time: float | None = None
    align_count: int = 0
    search_leg: int = 0
    pid_east: PidState = PidState()
    pid_north: PidState = PidState()
    pid_up: PidState = PidState()
    command: VelocityCommand = HOLD
    released: bool = False
    release_time: float | None = None
    frames_processed: int = 0
    detections: int = 0


@dataclass(frozen=True)
class MissionResult:
    seed: int
    mode: str
    landing_error: float | None
    release_time: float | None
    frames_processed: int
    detections: int
    aborted: bool
    abort_reason: str | None = None
    fallback_drop: bool = False
    gps_fix_errors: tuple[float, ...] = field(default=(), repr=False, compare=True)


def pixel_error_to_meters(
    center_px: tuple[float, float], camera: CameraModel, altitude: float, yaw: float = 0.0
) -> tuple[float, float]:
    """Ground offset (east, north) from the vehicle to whatever sits at ``center_px``."""
    if altitude <= MIN_VIEW_ALTITUDE:
        raise DegenerateViewError(f"altitude {altitude:.3f} m too low")
    cx, cy = camera.principal_point
    k = altitude / camera.focal_px
    right = (center_px[0] - cx) * k
    forward = -(center_px[1] - cy) * k
    c, s = math.cos(yaw), math.sin(yaw)
    return right * c + forward * s, -right * s + forward * c


def search_pattern(step: float, max_leg: float) -> list[tuple[float, float]]:
    """Corner offsets of an expanding square: legs N, E, S, W growing by ``step`` every two legs."""
    dirs = ((0.0, 1.0), (1.0, 0.0), (0.0, -1.0), (-1.0, 0.0))
    pts, e, n, i = [], 0.0, 0.0, 0
    while True:
        length = step * (i // 2 + 1)
        if length > max_leg + 1e-9:
            return pts
        de, dn = dirs[i % 4]
        e, n = e + de * length, n + dn * length
        pts.append((e, n))
        i += 1


# ---------------------------------------------------------------- transitions


def _enter(s: MissionState, phase: Phase, time: float, events: list, detail: str = "", **kw) -> MissionState:
    events.append(MissionEvent(time, phase.value, "phase_change", detail))
    fresh = PidState.fresh(time)
    return replace(s, phase=phase, phase_start=time, pid_east=fresh, pid_north=fresh,
                   pid_up=fresh, align_count=0, **kw)


def _abort(s: MissionState, reason: str, time: float, events: list):
    s = _enter(s, Phase.ABORTED, time, events, reason, abort_reason=reason)
    return s, HOLD


def _altitude_hold(s: MissionState, plan: MissionPlan, gps: GpsFix, time: float):
    err = plan.cruise_altitude - gps.estimated_position.up
    vu, pid = pid_step(plan.altitude_gains, s.pid_up, err, time)
    return vu, replace(s, pid_up=pid)


def _goto(s: MissionState, plan: MissionPlan, gps: GpsFix, target: EnuPoint, time: float):
    est = gps.estimated_position
    ve, pe = pid_step(plan.nav_gains, s.pid_east, target.east - est.east, time)
    vn, pn = pid_step(plan.nav_gains, s.pid_north, target.north - est.north, time)
    vu, s = _altitude_hold(replace(s, pid_east=pe, pid_north=pn), plan, gps, time)
    cmd = VelocityCommand((ve, vn, vu))
    return replace(s, command=cmd), cmd


def _release(s: MissionState, time: float, events: list, detail: str):
    events.append(MissionEvent(time, s.phase.value, "payload_release", detail))
    return replace(s, released=True, release_time=time), HOLD


def _preflight(s, plan, gps, frame, det, camera, time, events):
    # reached only with a valid fix
    return _takeoff(_enter(s, Phase.TAKEOFF, time, events), plan, gps, frame, det, camera, time, events)


def _takeoff(s, plan, gps, frame, det, camera, time, events):
    if abs(plan.cruise_altitude - gps.estimated_position.up) < plan.takeoff_tolerance:
        s = _enter(s, Phase.EN_ROUTE, time, events, "leg 0", waypoint_index=0)
        return _en_route(s, plan, gps, frame, det, camera, time, events)
    vu, s = _altitude_hold(s, plan, gps, time)
    cmd = VelocityCommand((0.0, 0.0, vu))
    return replace(s, command=cmd), cmd


def _en_route(s, plan, gps, frame, det, camera, time, events):
    legs = plan.legs_enu
    target = legs[s.waypoint_index]
    dist = gps.estimated_position.horizontal_distance(target)
    if s.waypoint_index < len(legs) - 1:
        if dist < plan.waypoint_radius:
            events.append(MissionEvent(time, s.phase.value, "waypoint_reached", str(s.waypoint_index)))
            s = _enter(s, Phase.EN_ROUTE, time, events, f"leg {s.waypoint_index + 1}",
                       waypoint_index=s.waypoint_index + 1)
            return _en_route(s, plan, gps, frame, det, camera, time, events)
    elif plan.mode is Mode.GPS_ONLY:
        if dist < plan.release_radius:
            s = _enter(s, Phase.RELEASING, time, events, "gps drop point reached")
            return _release(s, time, events, f"estimated distance {dist:.2f} m")
    elif dist < plan.handoff_threshold:
        s = _enter(s, Phase.VISION_SEARCH, time, events, f"handoff at {dist:.2f} m", search_leg=0)
        return _vision_search(s, plan, gps, frame, det, camera, time, events)
    return _goto(s, plan, gps, target, time)


def _vision_search(s, plan, gps, frame, det, camera, time, events):
    if det is not None:
        s = _enter(s, Phase.ALIGNING, time, events, "target detected", last_detection_time=time)
        return _aligning(s, plan, gps, frame, det, camera, time, events)
    if time - s.phase_start > plan.search_timeout:
        s = _enter(s, Phase.GPS_FALLBACK_DROP, time, events, "search timeout")
        return _fallback(s, plan, gps, frame, det, camera, time, events)
    anchor = plan.drop_enu
    if time - s.phase_start < plan.search_hold_time:
        return _goto(s, plan, gps, anchor, time)
    pattern = search_pattern(plan.search_leg_step, 2 * plan.handoff_threshold)
    leg = s.search_leg % len(pattern)
    de, dn = pattern[leg]
    target = EnuPoint(anchor.east + de, anchor.north + dn, anchor.up)
    if gps.estimated_position.horizontal_distance(target) < plan.waypoint_radius / 2:
        s = replace(s, search_leg=s.search_leg + 1)
    return _goto(s, plan, gps, target, time)


def _aligning(s, plan, gps, frame, det, camera, time, events):
    ve, vn = s.command.desired_velocity[:2]
    if frame is not None:
        if det is None:
            ve = vn = 0.0
            s = replace(s, align_count=0)
        else:
            dx = det.center_px[0] - camera.principal_point[0]
            dy = det.center_px[1] - camera.principal_point[1]
            count = s.align_count + 1 if math.hypot(dx, dy) < plan.align_tolerance_px else 0
            s = replace(s, align_count=count, last_detection_time=time)
            if count >= plan.align_hold_frames:
                s = _enter(s, Phase.RELEASING, time, events, f"aligned for {count} frames")
                return _release(s, time, events, f"pixel error ({dx:.1f}, {dy:.1f})")
            alt = max(gps.estimated_position.up, 2 * MIN_VIEW_ALTITUDE)
            ee, en = pixel_error_to_meters(det.center_px, camera, alt, gps.heading)
            ve, pe = pid_step(plan.align_gains, s.pid_east, ee, time)
            vn, pn = pid_step(plan.align_gains, s.pid_north, en, time)
            s = replace(s, pid_east=pe, pid_north=pn)
    if s.last_detection_time is not None and time - s.last_detection_time > plan.target_lost_timeout:
        s = _enter(s, Phase.VISION_SEARCH, time, events, "target lost", search_leg=0)
        return _vision_search(s, plan, gps, frame, None, camera, time, events)
    vu, s = _altitude_hold(s, plan, gps, time)
    cmd = VelocityCommand((ve, vn, vu))
    return replace(s, command=cmd), cmd


def _releasing(s, plan, gps, frame, det, camera, time, events):
    return _enter(s, Phase.LANDED, time, events, "payload delivered"), HOLD


def _fallback(s, plan, gps, frame, det, camera, time, events):
    dist = gps.estimated_position.horizontal_distance(plan.drop_enu)
    if dist < plan.release_radius:
        s, _ = _release(s, time, events, f"fallback, estimated distance {dist:.2f} m")
        return _enter(s, Phase.LANDED, time, events, "payload delivered"), HOLD
    return _goto(s, plan, gps, plan.drop_enu, time)


_HANDLERS = {
    Phase.PREFLIGHT_CHECK: _preflight,
    Phase.TAKEOFF: _takeoff,
    Phase.EN_ROUTE: _en_route,
    Phase.VISION_SEARCH: _vision_search,
    Phase.ALIGNING: _aligning,
    Phase.RELEASING: _releasing,
    Phase.GPS_FALLBACK_DROP: _fallback,
}


def mission_step(
    state: MissionState,
    plan: MissionPlan,
    gps: GpsFix,
    frame: Frame | None,
    detection: Detection | None,
    camera: CameraModel,
    time: float,
) -> tuple[MissionState, VelocityCommand, list[MissionEvent]]:
    events: list[MissionEvent] = []
    s = state
    if s.phase in (Phase.LANDED, Phase.ABORTED):
        return s, HOLD, events
    if frame is not None:
        s = replace(s, frames_processed=s.frames_processed + 1,
                    detections=s.detections + (detection is not None))

    if not gps.valid_for_auto:
        # autonomy gate: nothing but a hold until enough satellites are tracked
        if s.phase is Phase.PREFLIGHT_CHECK:
            if time - s.phase_start > plan.preflight_timeout:
                s, cmd = _abort(s, "no_gps_lock", time, events)
                return s, cmd, events
            return replace(s, command=HOLD), HOLD, events
        since = time if s.gps_invalid_since is None else s.gps_invalid_since
        if s.gps_invalid_since is None:
            events.append(MissionEvent(time, s.phase.value, "gps_invalid", f"{gps.satellite_count} satellites"))
        if time - since > plan.gps_loss_timeout:
            s, cmd = _abort(s, "gps_lost", time, events)
            return s, cmd, events
        return replace(s, gps_invalid_since=since, command=HOLD), HOLD, events
    if s.gps_invalid_since is not None:
        events.append(MissionEvent(time, s.phase.value, "gps_restored"))
        s = replace(s, gps_invalid_since=None)

    s, cmd = _HANDLERS[s.phase](s, plan, gps, frame, detection, camera, time, events)
    return s, cmd, events
