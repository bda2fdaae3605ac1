import io
import json
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from precision_drop.dataset import generate_frames
from precision_drop.detector import (
    Detection,
    DetectorConfig,
    EvalReport,
    bbox_center,
    detect,
    evaluate,
    iou,
    verify_roi,
)
from precision_drop.geo import EnuPoint
from precision_drop.sensors import CameraModel, Frame, SceneConfig, TargetSpec, render_frame
from precision_drop.worldsim import UavState

CAM = CameraModel()
TARGET = TargetSpec()
CFG = DetectorConfig()
RED = (220, 30, 30)
GRASS = (80, 120, 60)


def over(e=0.0, n=0.0, alt=20.0, yaw=0.0):
    return UavState(EnuPoint(e, n, alt), (0.0, 0.0, 0.0), yaw, 0.0)


def solid(h=50, w=60, color=GRASS):
    px = np.empty((h, w, 3), np.uint8)
    px[:] = color
    return Frame(px, 0.0)


def test_on_axis_noiseless():
    f = render_frame(CAM, over(), TARGET, SceneConfig(noise_std=0), np.random.default_rng())
    d = detect(f, CFG)
    assert d is not None
    assert math.dist(d.center_px, (960, 540)) <= 2
    assert 0.2 <= d.confidence <= 1


def test_default_noise_on_axis():
    f = render_frame(CAM, over(), TARGET, SceneConfig(), np.random.default_rng(8))
    d = detect(f, CFG)
    assert d is not None and iou(d.bbox, f.true_target_bbox) > 0.8


@settings(max_examples=15, deadline=None)
@given(st.floats(10, 30))
def test_centre_accuracy_across_altitudes(alt):
    f = render_frame(CAM, over(alt=alt), TARGET, SceneConfig(noise_std=0), np.random.default_rng())
    d = detect(f, CFG)
    assert math.dist(d.center_px, (960, 540)) <= 2


def test_hidden_target():
    f = render_frame(CAM, over(), TARGET, SceneConfig(target_hidden=True), np.random.default_rng(1))
    assert detect(f, CFG) is None


def test_blob_below_minimum_rejected():
    f = solid()
    f.pixels[10:16, 10:16] = RED
    f.pixels[12:14, 12:14] = GRASS  # 32 px square ring
    assert detect(f, CFG) is None
    f.pixels[10:19, 10:19] = RED
    f.pixels[12:17, 12:17] = GRASS  # 56 px
    assert detect(f, CFG) is not None


def test_shape_gates():
    long_bar = solid()
    long_bar.pixels[20:26, 0:60] = RED
    assert detect(long_bar, CFG) is None  # aspect 10
    # a full square passes aspect but fails the fill ceiling
    block = solid()
    block.pixels[10:30, 10:30] = RED
    assert detect(block, CFG) is None
    ring = solid()
    ring.pixels[10:30, 10:30] = RED
    ring.pixels[14:26, 14:26] = GRASS
    d = detect(ring, CFG)
    assert d is not None and d.bbox == (10, 10, 20, 20)
    assert d.center_px == (19.5, 19.5)


def test_four_connectivity():
    # diagonal neighbours are separate components
    f = solid(40, 40)
    for i in range(40):
        f.pixels[i, i] = RED
    assert detect(f, DetectorConfig(min_blob_px=2)) is None


def test_verify_roi_cases():
    f = solid(10, 10)
    f.pixels[:, :] = RED
    assert verify_roi(f, (0, 0, 10, 10), CFG)
    assert not verify_roi(solid(10, 10), (0, 0, 10, 10), CFG)
    g = solid(10, 10)
    g.pixels.reshape(-1, 3)[:19] = RED
    assert not verify_roi(g, (0, 0, 10, 10), CFG)
    g.pixels.reshape(-1, 3)[19] = RED
    assert verify_roi(g, (0, 0, 10, 10), CFG)


def test_verify_roi_rejects_bad_boxes():
    with pytest.raises(ValueError):
        verify_roi(solid(), (0, 0, 0, 5), CFG)
    with pytest.raises(ValueError):
        verify_roi(solid(), (55, 0, 10, 5), CFG)


channel = st.integers(0, 255)
pixel = st.tuples(channel, channel, channel)


@given(
    st.lists(pixel, min_size=1, max_size=64),
    st.tuples(st.integers(0, 60), st.integers(0, 60), st.integers(0, 60)),
    st.tuples(st.integers(0, 60), st.integers(0, 60), st.integers(0, 60)),
    st.floats(0.01, 0.99),
)
def test_verification_monotone_in_window(pixels, grow_lo, grow_hi, threshold):
    f = Frame(np.array([pixels], np.uint8), 0.0)
    narrow = DetectorConfig(verification_fraction=threshold)
    wide = DetectorConfig(
        color_lo=tuple(max(0, a - g) for a, g in zip(narrow.color_lo, grow_lo)),
        color_hi=tuple(min(255, a + g) for a, g in zip(narrow.color_hi, grow_hi)),
        verification_fraction=threshold,
    )
    box = (0, 0, len(pixels), 1)
    if verify_roi(f, box, narrow):
        assert verify_roi(f, box, wide)


@given(st.tuples(st.integers(0, 100), st.integers(0, 100), st.integers(1, 50), st.integers(1, 50)))
def test_center_is_bbox_centre(b):
    d = Detection.from_bbox(b, 1.0)
    assert d.center_px == bbox_center(b)
    assert d.center_px == (b[0] + (b[2] - 1) / 2, b[1] + (b[3] - 1) / 2)


def test_detect_is_pure():
    f = render_frame(CAM, over(e=1.0), TARGET, SceneConfig(), np.random.default_rng(3))
    before = f.pixels.copy()
    assert detect(f, CFG) == detect(f, CFG)
    assert np.array_equal(before, f.pixels)


def test_iou():
    assert iou((0, 0, 10, 10), (0, 0, 10, 10)) == 1.0
    assert iou((0, 0, 10, 10), (10, 0, 10, 10)) == 0.0
    assert iou((0, 0, 10, 10), (5, 0, 10, 10)) == pytest.approx(50 / 150)


def test_config_validation():
    with pytest.raises(ValueError):
        DetectorConfig(color_lo=(200, 0, 0), color_hi=(100, 80, 80))
    with pytest.raises(ValueError):
        DetectorConfig(verification_fraction=1.0)
    with pytest.raises(ValueError):
        DetectorConfig(fill_ratio_bounds=(0.9, 0.1))


@pytest.fixture(scope="module")
def small_set():
    frames = list(generate_frames(40, 0.6, np.random.default_rng(77)))
    return [(f, f.true_target_bbox) for f in frames]


def test_evaluate_perfect_and_silent(small_set):
    oracle = evaluate(small_set, detector=lambda f: f.true_target_bbox and Detection.from_bbox(f.true_target_bbox, 1.0))
    assert oracle.recall == 1.0 and oracle.false_positives == 0 and oracle.precision == 1.0
    silent = evaluate(small_set, detector=lambda f: None)
    assert silent.recall == 0.0 and silent.false_positives == 0
    assert silent.false_negatives == silent.frames_with_target == 24
    assert silent.frames_total == 40


def test_evaluate_counts_false_positives(small_set):
    always = evaluate(small_set, detector=lambda f: Detection.from_bbox((0, 0, 5, 5), 1.0))
    assert always.true_positives == 0
    # negatives plus every mislocalised positive
    assert always.false_positives == 40
    assert always.precision == 0.0


def test_reference_detector_on_small_set(small_set):
    r = evaluate(small_set, CFG)
    assert r.false_positives == 0
    assert r.recall >= 0.9
    assert r.true_positives + r.false_negatives == r.frames_with_target


def test_evaluate_empty():
    with pytest.raises(ValueError):
        evaluate([], CFG)


def test_report_json():
    buf = io.StringIO()
    EvalReport(10, 6, 5, 0, 1, 5 / 6, 1.0).to_json(buf)
    data = json.loads(buf.getvalue())
    assert data["true_positives"] == 5 and data["recall"] == pytest.approx(5 / 6)
