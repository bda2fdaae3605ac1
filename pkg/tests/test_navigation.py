import math
from dataclasses import replace

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from precision_drop.config import default_plan
from precision_drop.detector import Detection
from precision_drop.geo import EnuPoint
from precision_drop.navigation import (
    MissionState,
    Mode,
    Phase,
    mission_step,
    pixel_error_to_meters,
    search_pattern,
)
from precision_drop.sensors import (
    CameraModel,
    DegenerateViewError,
    Frame,
    GpsFix,
    GpsModel,
    TargetSpec,
    project_target,
    sample_gps,
    target_bbox,
)
from precision_drop.worldsim import HOLD, UavState, WorldConfig, step

CAM = CameraModel()
PLAN = default_plan()
DROP = PLAN.drop_enu
FRAME = Frame(np.zeros((1, 1, 3), np.uint8), 0.0)
CENTRED = Detection.from_bbox((930, 510, 61, 61), 0.9)


def fix(e=0.0, n=0.0, u=20.0, sats=12, heading=0.0, t=0.0):
    return GpsFix(EnuPoint(e, n, u), sats, sats >= 8, t, heading)


def at_drop(de=0.0, dn=0.0, **kw):
    return fix(DROP.east + de, DROP.north + dn, **kw)


def state(phase, **kw):
    return replace(MissionState(), phase=phase, **kw)


# ---------------------------------------------------------------- geometry


def test_pixel_error_at_principal_point():
    assert pixel_error_to_meters((960, 540), CAM, 20.0) == (0.0, 0.0)


def test_pixel_error_examples():
    x = 960 + CAM.focal_px * 0.1
    assert pixel_error_to_meters((x, 540), CAM, 20.0) == pytest.approx((2.0, 0.0), abs=1e-9)
    # heading east: image right points south
    assert pixel_error_to_meters((x, 540), CAM, 20.0, math.pi / 2) == pytest.approx((0.0, -2.0), abs=1e-9)


def test_pixel_error_degenerate():
    with pytest.raises(DegenerateViewError):
        pixel_error_to_meters((0, 0), CAM, 0.05)


@given(st.floats(-15, 15), st.floats(-15, 15), st.floats(5, 60), st.floats(0, 2 * math.pi))
def test_projection_roundtrip(de, dn, alt, yaw):
    uav = UavState(EnuPoint(-de, -dn, alt), (0.0, 0.0, 0.0), yaw, 0.0)
    proj = project_target(CAM, uav, TargetSpec())
    if proj is None:
        return
    e, n = pixel_error_to_meters(proj[0], CAM, alt, yaw)
    off = math.hypot(de, dn)
    assert math.hypot(e - de, n - dn) <= 0.01 * off + 0.01


def test_search_pattern():
    pts = search_pattern(2.0, 10.0)
    assert pts[:4] == [(0.0, 2.0), (2.0, 2.0), (2.0, -2.0), (-2.0, -2.0)]
    legs = [math.dist(a, b) for a, b in zip([(0.0, 0.0)] + pts, pts)]
    assert legs == [2, 2, 4, 4, 6, 6, 8, 8, 10, 10]


# ---------------------------------------------------------------- transitions


def test_preflight_waits_for_satellites():
    s, cmd, ev = mission_step(MissionState(), PLAN, fix(u=0, sats=7), None, None, CAM, 1.0)
    assert s.phase is Phase.PREFLIGHT_CHECK and cmd == HOLD and ev == []
    s, cmd, ev = mission_step(s, PLAN, fix(u=0, sats=7), None, None, CAM, PLAN.preflight_timeout + 0.1)
    assert s.phase is Phase.ABORTED and s.abort_reason == "no_gps_lock"


def test_preflight_to_takeoff():
    s, cmd, ev = mission_step(MissionState(), PLAN, fix(u=0.0), None, None, CAM, 0.0)
    assert s.phase is Phase.TAKEOFF
    assert cmd.desired_velocity[2] > 0 and cmd.desired_velocity[:2] == (0.0, 0.0)
    assert [e.phase for e in ev] == ["Takeoff"]


def test_takeoff_to_en_route():
    s, _, _ = mission_step(state(Phase.TAKEOFF), PLAN, fix(u=19.0), None, None, CAM, 1.0)
    assert s.phase is Phase.TAKEOFF
    s, cmd, _ = mission_step(s, PLAN, fix(u=19.6), None, None, CAM, 1.1)
    assert s.phase is Phase.EN_ROUTE and s.waypoint_index == 0
    assert math.hypot(*cmd.desired_velocity[:2]) > 0


def test_waypoint_advance():
    wp = PLAN.legs_enu[0]
    s, _, ev = mission_step(state(Phase.EN_ROUTE), PLAN, fix(wp.east + 1.0, wp.north), None, None, CAM, 5.0)
    assert s.waypoint_index == 1
    assert any(e.event == "waypoint_reached" for e in ev)


def test_gps_only_release_once():
    plan = replace(PLAN, mode=Mode.GPS_ONLY)
    s = state(Phase.EN_ROUTE, waypoint_index=1)
    s, _, ev = mission_step(s, plan, at_drop(plan.release_radius + 0.5), None, None, CAM, 10.0)
    assert not s.released
    s, cmd, ev = mission_step(s, plan, at_drop(plan.release_radius - 0.1), None, None, CAM, 10.02)
    assert s.released and s.release_time == 10.02 and cmd == HOLD
    assert [e.event for e in ev].count("payload_release") == 1
    s, _, ev = mission_step(s, plan, at_drop(), None, None, CAM, 10.04)
    assert s.phase is Phase.LANDED
    assert all(e.event != "payload_release" for e in ev)


def test_vision_handoff():
    s = state(Phase.EN_ROUTE, waypoint_index=1)
    s, _, _ = mission_step(s, PLAN, at_drop(6.0), None, None, CAM, 10.0)
    assert s.phase is Phase.EN_ROUTE
    s, _, _ = mission_step(s, PLAN, at_drop(4.9), None, None, CAM, 10.02)
    assert s.phase is Phase.VISION_SEARCH


def test_search_to_aligning_to_release():
    s = state(Phase.VISION_SEARCH, phase_start=10.0)
    s, _, _ = mission_step(s, PLAN, at_drop(), FRAME, CENTRED, CAM, 10.5)
    assert s.phase is Phase.ALIGNING and s.align_count == 1
    t = 10.5
    for k in range(PLAN.align_hold_frames - 1):
        assert not s.released
        t += 1 / 30
        s, _, ev = mission_step(s, PLAN, at_drop(), FRAME, CENTRED, CAM, t)
    assert s.released and s.phase is Phase.RELEASING
    assert s.frames_processed == PLAN.align_hold_frames
    s, _, _ = mission_step(s, PLAN, at_drop(), None, None, CAM, t + 0.02)
    assert s.phase is Phase.LANDED


def test_alignment_streak_resets_outside_tolerance():
    far = Detection.from_bbox((1100, 510, 61, 61), 0.9)
    s = state(Phase.ALIGNING, align_count=5, last_detection_time=1.0)
    s, cmd, _ = mission_step(s, PLAN, at_drop(), FRAME, far, CAM, 1.03)
    assert s.align_count == 0
    assert cmd.desired_velocity[0] > 0  # target to the right (east) at yaw 0


def test_target_lost_returns_to_search():
    s = state(Phase.ALIGNING, last_detection_time=5.0, phase_start=5.0)
    s, _, _ = mission_step(s, PLAN, at_drop(), FRAME, None, CAM, 5.9)
    assert s.phase is Phase.ALIGNING
    s, _, ev = mission_step(s, PLAN, at_drop(), FRAME, None, CAM, 6.1)
    assert s.phase is Phase.VISION_SEARCH
    assert ev[0].detail == "target lost"


def test_search_timeout_then_fallback_drop():
    s = state(Phase.VISION_SEARCH, phase_start=0.0)
    s, _, _ = mission_step(s, PLAN, at_drop(4.0), FRAME, None, CAM, PLAN.search_timeout + 0.1)
    assert s.phase is Phase.GPS_FALLBACK_DROP and not s.released
    s, _, ev = mission_step(s, PLAN, at_drop(1.0), None, None, CAM, PLAN.search_timeout + 0.2)
    assert s.released and s.phase is Phase.LANDED
    assert [e.event for e in ev].count("payload_release") == 1


def test_gps_loss_holds_then_aborts():
    s = state(Phase.EN_ROUTE)
    s, cmd, ev = mission_step(s, PLAN, fix(sats=5), None, None, CAM, 3.0)
    assert cmd == HOLD and s.phase is Phase.EN_ROUTE and ev[0].event == "gps_invalid"
    s, cmd, _ = mission_step(s, PLAN, fix(sats=5), None, None, CAM, 12.9)
    assert cmd == HOLD and s.phase is Phase.EN_ROUTE
    s2, _, ev = mission_step(s, PLAN, fix(), None, None, CAM, 13.0)
    assert ev[0].event == "gps_restored" and s2.gps_invalid_since is None
    s, _, _ = mission_step(s, PLAN, fix(sats=5), None, None, CAM, 13.1)
    assert s.phase is Phase.ABORTED and s.abort_reason == "gps_lost"


def test_terminal_phases_are_absorbing():
    for phase in (Phase.LANDED, Phase.ABORTED):
        s = state(phase)
        assert mission_step(s, PLAN, fix(), FRAME, CENTRED, CAM, 99.0) == (s, HOLD, [])


def test_plan_validation():
    with pytest.raises(ValueError):
        replace(PLAN, handoff_threshold=0)
    with pytest.raises(ValueError):
        replace(PLAN, align_hold_frames=0)


# ---------------------------------------------------------------- properties


step_inputs = st.lists(
    st.tuples(
        st.integers(0, 14),  # satellites
        st.booleans(),  # camera tick
        st.one_of(st.none(), st.tuples(st.floats(0, 1919), st.floats(0, 1079))),
        st.floats(-8, 8),
        st.floats(-8, 8),
        st.floats(0, 25),
    ),
    max_size=120,
)


@settings(max_examples=150, deadline=None)
@given(
    step_inputs,
    st.sampled_from(list(Mode)),
    st.sampled_from([Phase.PREFLIGHT_CHECK, Phase.EN_ROUTE, Phase.VISION_SEARCH, Phase.ALIGNING]),
)
def test_state_machine_safety(inputs, mode, start):
    plan = replace(PLAN, mode=mode, align_hold_frames=3)
    s, t, releases = state(start, waypoint_index=1, last_detection_time=0.0), 0.0, 0
    for sats, tick, det_px, de, dn, up in inputs:
        t += 0.02
        g = at_drop(de, dn, u=up, sats=sats, t=t)
        det = None
        if tick and det_px is not None:
            det = Detection((int(det_px[0]) - 10, int(det_px[1]) - 10, 21, 21), (det_px[0], det_px[1]), 0.5)
        before = s
        s, cmd, ev = mission_step(s, plan, g, FRAME if tick else None, det, CAM, t)
        releases += sum(e.event == "payload_release" for e in ev)
        if not g.valid_for_auto:
            assert cmd == HOLD
        if any(e.event == "payload_release" for e in ev):
            if mode is Mode.GPS_ONLY:
                assert before.phase is Phase.EN_ROUTE
            else:
                assert before.phase in (Phase.ALIGNING, Phase.VISION_SEARCH, Phase.GPS_FALLBACK_DROP)
                assert before.phase is not Phase.VISION_SEARCH or s.phase is Phase.LANDED or det is not None
    assert releases <= 1
    assert releases == int(s.released)


def _align_run(seed):
    """Time from alignment start to release, with a projection-exact detector."""
    rng = np.random.default_rng(seed)
    cfg = WorldConfig()
    target = TargetSpec(center=DROP)
    r = rng.uniform(0, PLAN.handoff_threshold)
    a = rng.uniform(0, 2 * math.pi)
    uav = UavState(EnuPoint(DROP.east + r * math.cos(a), DROP.north + r * math.sin(a), 20.0), (0.0, 0.0, 0.0), 0.0, 0.0)
    gps = GpsModel()
    s = state(Phase.VISION_SEARCH)
    start = None
    for k in range(int(40 / cfg.timestep)):
        if k % 10 == 0:
            g, gps = sample_gps(uav, gps, rng)
        frame = det = None
        if int(k * cfg.timestep * 30 + 1e-9) > int((k - 1) * cfg.timestep * 30 + 1e-9) or k == 0:
            frame = FRAME
            proj = project_target(CAM, uav, target)
            if proj is not None:
                box = target_bbox(CAM, *proj)
                det = Detection.from_bbox(box, 1.0)
        s, cmd, _ = mission_step(s, PLAN, g, frame, det, CAM, uav.time)
        if s.phase is Phase.ALIGNING and start is None:
            start = uav.time
        if s.released:
            return uav.time - start if start is not None else math.inf
        uav = step(uav, cmd, cfg, rng)
    return math.inf


def test_alignment_convergence():
    times = [_align_run(seed) for seed in range(200)]
    assert sum(t <= 20.0 for t in times) >= 198
