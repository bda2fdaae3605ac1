"""Reference target detector and detection-rate evaluation.

Any callable ``frame -> Detection | None`` can stand in for :func:`detect`
(e.g. a learned model); :func:`evaluate` only relies on that contract.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass
from typing import Callable, Iterable, TextIO

import cv2
import numpy as np

from .sensors import Frame

BBox = tuple[int, int, int, int]  # x, y, width, height in pixel indices


@dataclass(frozen=True)
class Detection:
    bbox: BBox
    center_px: tuple[float, float]
    confidence: float

    @classmethod
    def from_bbox(cls, bbox: BBox, confidence: float) -> Detection:
        return cls(bbox, bbox_center(bbox), confidence)


def bbox_center(bbox: BBox) -> tuple[float, float]:
    # pixel centres sit on integer coordinates, so a span x..x+w-1 is centred at x+(w-1)/2
    x, y, w, h = bbox
    return x + (w - 1) / 2, y + (h - 1) / 2


@dataclass(frozen=True)
class DetectorConfig:
    color_lo: tuple[int, int, int] = (100, 0, 0)
    color_hi: tuple[int, int, int] = (255, 80, 80)
    min_blob_px: int = 40
    fill_ratio_bounds: tuple[float, float] = (0.15, 0.85)
    aspect_ratio_bounds: tuple[float, float] = (0.4, 2.5)
    verification_fraction: float = 0.20

    def __post_init__(self):
        if any(lo > hi for lo, hi in zip(self.color_lo, self.color_hi)):
            raise ValueError("color window bounds out of order")
        for lo, hi in (self.fill_ratio_bounds, self.aspect_ratio_bounds):
            if lo > hi:
                raise ValueError("gate bounds out of order")
        if not 0 < self.verification_fraction < 1:
            raise ValueError("verification_fraction must be in (0, 1)")
        if self.min_blob_px < 1:
            raise ValueError("min_blob_px must be >= 1")


def color_mask(pixels: np.ndarray, config: DetectorConfig) -> np.ndarray:
    return cv2.inRange(pixels, config.color_lo, config.color_hi)


def _in_window_fraction(mask: np.ndarray, bbox: BBox) -> float:
    x, y, w, h = bbox
    return cv2.countNonZero(mask[y : y + h, x : x + w]) / (w * h)


def verify_roi(frame: Frame, bbox: BBox, config: DetectorConfig) -> bool:
    """Second-stage check: enough of the box must carry the target colour."""
    x, y, w, h = bbox
    if w <= 0 or h <= 0:
        raise ValueError(f"degenerate bbox {bbox}")
    if x < 0 or y < 0 or x + w > frame.width or y + h > frame.height:
        raise ValueError(f"bbox {bbox} outside frame")
    roi = frame.pixels[y : y + h, x : x + w]
    return _in_window_fraction(color_mask(roi, config), (0, 0, w, h)) >= config.verification_fraction


def detect(frame: Frame, config: DetectorConfig = DetectorConfig()) -> Detection | None:
    mask = color_mask(frame.pixels, config)
    ox, oy, cw, ch = cv2.boundingRect(mask)
    if cw == 0 or ch == 0:
        return None
    # components never extend past the bounding box of all mask pixels
    crop = mask[oy : oy + ch, ox : ox + cw]
    n, _, stats, _ = cv2.connectedComponentsWithStats(crop, connectivity=4)
    areas = stats[1:, cv2.CC_STAT_AREA]
    if n <= 1 or areas.max() < config.min_blob_px:
        return None
    best = 1 + int(np.argmax(areas))
    x, y, w, h, area = (int(v) for v in stats[best])
    bbox = (ox + x, oy + y, w, h)

    aspect = w / h
    fill = area / (w * h)
    lo, hi = config.aspect_ratio_bounds
    if not lo <= aspect <= hi:
        return None
    lo, hi = config.fill_ratio_bounds
    if not lo <= fill <= hi:
        return None

    fraction = _in_window_fraction(mask, bbox)
    if fraction < config.verification_fraction:
        return None
    return Detection.from_bbox(bbox, fraction)


def iou(a: BBox, b: BBox) -> float:
    ix = max(0, min(a[0] + a[2], b[0] + b[2]) - max(a[0], b[0]))
    iy = max(0, min(a[1] + a[3], b[1] + b[3]) - max(a[1], b[1]))
    inter = ix * iy
    union = a[2] * a[3] + b[2] * b[3] - inter
    return inter / union if union > 0 else 0.0


@dataclass(frozen=True)
class EvalReport:
    frames_total: int
    frames_with_target: int
    true_positives: int
    false_positives: int
    false_negatives: int
    recall: float
    precision: float

    def to_json(self, out: TextIO) -> None:
        json.dump(asdict(self), out, indent=2)
        out.write("\n")


def evaluate(
    dataset: Iterable[tuple[Frame, BBox | None]],
    config: DetectorConfig = DetectorConfig(),
    iou_threshold: float = 0.5,
    detector: Callable[[Frame], Detection | None] | None = None,
) -> EvalReport:
    """Frame-level accounting.

    A detection on an annotated frame is a TP iff IoU >= threshold; a
    mislocalised one counts as both FP and FN. Any detection on a frame
    without a target is an FP. Precision is 1.0 when nothing was detected.
    """
    if detector is None:
        detector = lambda f: detect(f, config)  # noqa: E731
    total = with_target = tp = fp = fn = 0
    for frame, truth in dataset:
        total += 1
        det = detector(frame)
        if truth is None:
            fp += det is not None
            continue
        with_target += 1
        if det is not None and iou(det.bbox, truth) >= iou_threshold:
            tp += 1
        else:
            fn += 1
            fp += det is not None
    if total == 0:
        raise ValueError("empty dataset")
    recall = tp / with_target if with_target else 1.0
    precision = tp / (tp + fp) if tp + fp else 1.0
    return EvalReport(total, with_target, tp, fp, fn, recall, precision)
