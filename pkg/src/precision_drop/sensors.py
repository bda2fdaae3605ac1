"""Simulated sensors: GPS fixes, the downward camera and its rendered frames."""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from functools import lru_cache
from statistics import NormalDist

import cv2
import numpy as np

from .geo import EnuPoint
from .worldsim import UavState

RGB = tuple[int, int, int]

MIN_VIEW_ALTITUDE = 0.1


class DegenerateViewError(ValueError):
    """Camera too close to the ground for a pinhole projection."""


# ---------------------------------------------------------------- GPS


@dataclass(frozen=True)
class GpsModel:
    """GPS error state: Gauss-Markov horizontal bias plus white noise.

    ``bias is None`` means the bias has not been initialised yet; the first
    fix draws it from the stationary distribution so a mission never starts
    with an artificially perfect receiver.
    """

    bias: tuple[float, float] | None = None
    bias_time_constant: float = 60.0
    bias_std: float = 1.8
    white_noise_std: float = 0.6
    altitude_noise_std: float = 0.1
    satellite_count: int = 12
    min_satellites_for_auto: int = 8
    fix_rate: float = 5.0
    last_fix_time: float | None = None

    def __post_init__(self):
        if min(self.bias_std, self.white_noise_std, self.altitude_noise_std) < 0:
            raise ValueError("GPS noise stds must be non-negative")
        if self.bias_time_constant <= 0 or self.fix_rate <= 0:
            raise ValueError("bias_time_constant and fix_rate must be positive")
        if self.satellite_count < 0:
            raise ValueError("satellite_count must be non-negative")
        if self.min_satellites_for_auto < 4:
            raise ValueError("min_satellites_for_auto must be at least 4")


@dataclass(frozen=True)
class GpsFix:
    estimated_position: EnuPoint
    satellite_count: int
    valid_for_auto: bool
    time: float
    heading: float = 0.0  # compass yaw reported alongside the fix, radians


def sample_gps(
    true_state: UavState, model: GpsModel, rng: np.random.Generator
) -> tuple[GpsFix, GpsModel]:
    # always five draws so the stream position depends only on the fix count
    z = rng.standard_normal(5)
    if model.bias is None:
        be, bn = model.bias_std * z[0], model.bias_std * z[1]
    else:
        dt = max(0.0, true_state.time - (model.last_fix_time or 0.0))
        phi = math.exp(-dt / model.bias_time_constant)
        drive = model.bias_std * math.sqrt(1.0 - phi * phi)
        be = phi * model.bias[0] + drive * z[0]
        bn = phi * model.bias[1] + drive * z[1]
    p = true_state.position
    estimate = EnuPoint(
        p.east + be + model.white_noise_std * z[2],
        p.north + bn + model.white_noise_std * z[3],
        p.up + model.altitude_noise_std * z[4],
    )
    fix = GpsFix(
        estimate,
        model.satellite_count,
        model.satellite_count >= model.min_satellites_for_auto,
        true_state.time,
        true_state.yaw,
    )
    return fix, replace(model, bias=(be, bn), last_fix_time=true_state.time)


# ---------------------------------------------------------------- camera


@dataclass(frozen=True)
class CameraModel:
    """Straight-down pinhole camera; image x follows the body's right side,
    image y points backwards, so at yaw 0 the image is north-up."""

    width: int = 1920
    height: int = 1080
    horizontal_fov: float = 62.2
    frame_rate: float = 30.0

    def __post_init__(self):
        if self.width <= 0 or self.height <= 0:
            raise ValueError("camera raster must be non-empty")
        if not 10.0 < self.horizontal_fov < 170.0:
            raise ValueError("horizontal_fov must be in (10, 170) degrees")

    @property
    def focal_px(self) -> float:
        return (self.width / 2) / math.tan(math.radians(self.horizontal_fov / 2))

    @property
    def principal_point(self) -> tuple[float, float]:
        return self.width / 2, self.height / 2

    def contains(self, x: float, y: float) -> bool:
        return -0.5 <= x < self.width - 0.5 and -0.5 <= y < self.height - 0.5


def ground_to_pixel(camera: CameraModel, state: UavState, east, north):
    """Project ground points (up = 0) into the image; accepts scalars or arrays."""
    alt = state.position.up
    if alt <= MIN_VIEW_ALTITUDE:
        raise DegenerateViewError(f"altitude {alt:.3f} m too low for projection")
    de = east - state.position.east
    dn = north - state.position.north
    c, s = math.cos(state.yaw), math.sin(state.yaw)
    right = de * c - dn * s
    forward = de * s + dn * c
    f = camera.focal_px / alt
    cx, cy = camera.principal_point
    return cx + f * right, cy - f * forward


@dataclass(frozen=True)
class TargetSpec:
    center: EnuPoint = EnuPoint(0.0, 0.0, 0.0)
    outer_size: float = 1.0  # outer ring diameter, meters
    # (radius fraction, colour), outermost first
    rings: tuple[tuple[float, RGB], ...] = (
        (1.0, (220, 30, 30)),
        (0.7, (240, 240, 240)),
        (0.4, (220, 30, 30)),
    )
    primary_color: RGB = (220, 30, 30)

    def __post_init__(self):
        fr = [r for r, _ in self.rings]
        if not fr or fr[0] != 1.0 or any(b >= a for a, b in zip(fr, fr[1:])) or fr[-1] <= 0:
            raise ValueError("ring fractions must start at 1.0 and strictly decrease")
        if self.outer_size <= 0:
            raise ValueError("outer_size must be positive")


def project_target(camera: CameraModel, state: UavState, target: TargetSpec):
    """``((x, y), apparent_size_px)`` of the target, or ``None`` if its centre is off-raster."""
    x, y = ground_to_pixel(camera, state, target.center.east, target.center.north)
    if not camera.contains(x, y):
        return None
    return (float(x), float(y)), camera.focal_px * target.outer_size / state.position.up


def disk_pixel_bounds(cx: float, cy: float, radius: float, width: int, height: int):
    """Inclusive pixel index bounds ``(x0, y0, x1, y1)`` of a rasterised disk, clipped."""
    x0 = max(0, math.ceil(cx - radius))
    x1 = min(width - 1, math.floor(cx + radius))
    y0 = max(0, math.ceil(cy - radius))
    y1 = min(height - 1, math.floor(cy + radius))
    if x1 < x0 or y1 < y0:
        return None
    return x0, y0, x1, y1


def target_bbox(camera: CameraModel, center_px, size_px) -> tuple[int, int, int, int] | None:
    b = disk_pixel_bounds(center_px[0], center_px[1], size_px / 2, camera.width, camera.height)
    if b is None:
        return None
    x0, y0, x1, y1 = b
    return x0, y0, x1 - x0 + 1, y1 - y0 + 1


# ---------------------------------------------------------------- scene


BACKGROUND_PALETTE: tuple[RGB, ...] = ((80, 120, 60), (110, 116, 92), (120, 125, 130))
# every clutter colour has G or B above R so no brightness scaling lands it in a red window
CLUTTER_PALETTE: tuple[RGB, ...] = (
    (50, 80, 40),
    (95, 125, 70),
    (120, 125, 130),
    (170, 176, 180),
    (60, 62, 66),
    (60, 90, 160),
    (110, 116, 92),
    (150, 160, 140),
    (190, 200, 185),
)


@dataclass(frozen=True)
class ClutterPolygon:
    vertices: tuple[tuple[float, float], ...]  # ground (east, north), meters
    color: RGB


@dataclass(frozen=True)
class SceneConfig:
    background: RGB = (80, 120, 60)
    clutter: tuple[ClutterPolygon, ...] = ()
    brightness: float = 1.0
    noise_std: float = 4.0
    target_hidden: bool = False

    def __post_init__(self):
        if self.brightness <= 0:
            raise ValueError("brightness must be positive")
        if self.noise_std < 0:
            raise ValueError("noise_std must be non-negative")


@dataclass(frozen=True)
class SceneParams:
    """Ranges from which :func:`random_scene` draws a concrete scene."""

    clutter_count: tuple[int, int] = (6, 18)
    clutter_extent: float = 30.0
    clutter_radius: tuple[float, float] = (0.8, 5.0)
    brightness_range: tuple[float, float] = (0.6, 1.2)
    noise_std: float = 4.0
    backgrounds: tuple[RGB, ...] = BACKGROUND_PALETTE
    palette: tuple[RGB, ...] = CLUTTER_PALETTE


def random_scene(
    rng: np.random.Generator,
    center: EnuPoint,
    params: SceneParams = SceneParams(),
    target_hidden: bool = False,
) -> SceneConfig:
    n = int(rng.integers(params.clutter_count[0], params.clutter_count[1] + 1))
    polys = []
    for _ in range(n):
        ce = center.east + rng.uniform(-params.clutter_extent, params.clutter_extent)
        cn = center.north + rng.uniform(-params.clutter_extent, params.clutter_extent)
        k = int(rng.integers(3, 8))
        ang = np.sort(rng.uniform(0, 2 * math.pi, k))
        rad = rng.uniform(*params.clutter_radius, k)
        verts = tuple((ce + r * math.cos(a), cn + r * math.sin(a)) for a, r in zip(ang, rad))
        color = params.palette[int(rng.integers(len(params.palette)))]
        polys.append(ClutterPolygon(verts, color))
    return SceneConfig(
        background=params.backgrounds[int(rng.integers(len(params.backgrounds)))],
        clutter=tuple(polys),
        brightness=float(rng.uniform(*params.brightness_range)),
        noise_std=params.noise_std,
        target_hidden=target_hidden,
    )


# ---------------------------------------------------------------- rendering


@dataclass
class Frame:
    pixels: np.ndarray  # (height, width, 3) uint8, RGB
    capture_time: float
    true_target_center_px: tuple[float, float] | None = None
    true_target_bbox: tuple[int, int, int, int] | None = field(default=None)

    @property
    def width(self) -> int:
        return self.pixels.shape[1]

    @property
    def height(self) -> int:
        return self.pixels.shape[0]


@lru_cache(maxsize=8)
def _background(height: int, width: int, color: RGB) -> np.ndarray:
    img = np.empty((height, width, 3), np.uint8)
    img[:] = color
    img.flags.writeable = False
    return img


@lru_cache(maxsize=16)
def _noise_luts(std: float) -> tuple[np.ndarray, np.ndarray]:
    # inverse-CDF sampling on 256 equiprobable levels, rounded to integer counts
    nd = NormalDist(0.0, std)
    q = np.array([round(nd.inv_cdf((k + 0.5) / 256)) for k in range(256)], dtype=np.int32)
    return np.clip(q, 0, 255).astype(np.uint8), np.clip(-q, 0, 255).astype(np.uint8)


class NoiseBank:
    """Pre-drawn sensor noise; each frame takes a random window of the bank.

    Each window is i.i.d. per pixel like fresh noise, at the cost of
    correlation between frames. Used where thousands of frames are rendered
    per mission ensemble.
    """

    def __init__(self, shape: tuple[int, int, int], std: float, rng: np.random.Generator, factor: int = 2):
        self.shape = shape
        self.size = int(np.prod(shape))
        u = np.frombuffer(rng.bytes(self.size * factor), np.uint8)
        pos, neg = _noise_luts(std)
        self.pos = pos[u]
        self.neg = neg[u]

    def draw(self, rng: np.random.Generator) -> tuple[np.ndarray, np.ndarray]:
        off = int(rng.integers(0, self.pos.size - self.size + 1))
        sl = slice(off, off + self.size)
        return self.pos[sl].reshape(self.shape), self.neg[sl].reshape(self.shape)


def _fresh_noise(shape, std: float, rng: np.random.Generator):
    u = np.frombuffer(rng.bytes(int(np.prod(shape))), np.uint8).reshape(shape)
    pos, neg = _noise_luts(std)
    return cv2.LUT(u, pos), cv2.LUT(u, neg)


def _scale(color: RGB, b: float) -> tuple[int, int, int]:
    return tuple(int(min(255, round(c * b))) for c in color)


def _paint_rings(canvas: np.ndarray, cx: float, cy: float, radius_px: float, rings, brightness: float):
    h, w = canvas.shape[:2]
    bounds = disk_pixel_bounds(cx, cy, radius_px, w, h)
    if bounds is None:
        return
    x0, y0, x1, y1 = bounds
    yy, xx = np.ogrid[y0 : y1 + 1, x0 : x1 + 1]
    d2 = (xx - cx) ** 2 + (yy - cy) ** 2
    window = canvas[y0 : y1 + 1, x0 : x1 + 1]
    for frac, color in rings:
        r = frac * radius_px
        window[d2 <= r * r] = _scale(color, brightness)


def render_frame(
    camera: CameraModel,
    state: UavState,
    target: TargetSpec,
    scene: SceneConfig,
    rng: np.random.Generator,
    noise_bank: NoiseBank | None = None,
) -> Frame:
    if state.position.up <= MIN_VIEW_ALTITUDE:
        raise DegenerateViewError(f"altitude {state.position.up:.3f} m too low to render")
    h, w = camera.height, camera.width
    b = scene.brightness
    canvas = _background(h, w, _scale(scene.background, b)).copy()

    for poly in scene.clutter:
        e = np.array([v[0] for v in poly.vertices])
        n = np.array([v[1] for v in poly.vertices])
        x, y = ground_to_pixel(camera, state, e, n)
        if x.max() < 0 or y.max() < 0 or x.min() >= w or y.min() >= h:
            continue
        pts = np.round(np.stack([x, y], axis=1) * 16).astype(np.int32)
        cv2.fillPoly(canvas, [pts], _scale(poly.color, b), lineType=cv2.LINE_8, shift=4)

    center = bbox = None
    if not scene.target_hidden:
        x, y = ground_to_pixel(camera, state, target.center.east, target.center.north)
        size = camera.focal_px * target.outer_size / state.position.up
        _paint_rings(canvas, float(x), float(y), size / 2, target.rings, b)
        if camera.contains(x, y):
            center = (float(x), float(y))
            bbox = target_bbox(camera, center, size)

    if scene.noise_std > 0:
        if noise_bank is not None:
            pos, neg = noise_bank.draw(rng)
        else:
            pos, neg = _fresh_noise(canvas.shape, scene.noise_std, rng)
        # one of pos/neg is zero per pixel, so this is a saturating signed add
        cv2.add(canvas, pos, dst=canvas)
        cv2.subtract(canvas, neg, dst=canvas)

    return Frame(canvas, state.time, center, bbox)
