"""Synthetic aerial frame sets: generation, PPM/JSON dumps and the shared manifest format.

Manifest: JSON list of ``{"image": <relative path>, "bbox": [x, y, w, h] | null}``.
Each PPM has a sidecar ``<name>.json`` with capture time and annotation.
"""

from __future__ import annotations

import json
import math
from pathlib import Path
from typing import Iterator

import numpy as np

from .geo import EnuPoint
from .navigation import pixel_error_to_meters
from .sensors import CameraModel, Frame, SceneParams, TargetSpec, random_scene, render_frame
from .worldsim import UavState


def write_ppm(path: str | Path, pixels: np.ndarray) -> None:
    h, w, _ = pixels.shape
    with open(path, "wb") as f:
        f.write(f"P6\n{w} {h}\n255\n".encode("ascii"))
        f.write(np.ascontiguousarray(pixels, dtype=np.uint8).tobytes())


def read_ppm(path: str | Path) -> np.ndarray:
    data = Path(path).read_bytes()
    fields, pos = [], 0
    while len(fields) < 4:
        # header tokens separated by whitespace; '#' comments run to end of line
        while data[pos:pos + 1].isspace():
            pos += 1
        if data[pos:pos + 1] == b"#":
            pos = data.index(b"\n", pos) + 1
            continue
        end = pos
        while not data[end:end + 1].isspace():
            end += 1
        fields.append(data[pos:end])
        pos = end
    if fields[0] != b"P6" or int(fields[3]) != 255:
        raise ValueError(f"{path}: only 8-bit binary PPM (P6) is supported")
    w, h = int(fields[1]), int(fields[2])
    pos += 1
    return np.frombuffer(data, np.uint8, count=w * h * 3, offset=pos).reshape(h, w, 3).copy()


def dump_frame(directory: str | Path, name: str, frame: Frame) -> Path:
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    img = directory / f"{name}.ppm"
    write_ppm(img, frame.pixels)
    sidecar = {
        "capture_time": frame.capture_time,
        "center_px": list(frame.true_target_center_px) if frame.true_target_center_px else None,
        "bbox": list(frame.true_target_bbox) if frame.true_target_bbox else None,
    }
    (directory / f"{name}.json").write_text(json.dumps(sidecar) + "\n")
    return img


def random_pose_over(
    camera: CameraModel, target: TargetSpec, altitude: float, yaw: float, pixel: tuple[float, float]
) -> UavState:
    """Vehicle pose at which the target centre appears at ``pixel``."""
    de, dn = pixel_error_to_meters(pixel, camera, altitude, yaw)
    c = target.center
    return UavState(EnuPoint(c.east - de, c.north - dn, altitude), (0.0, 0.0, 0.0), yaw, 0.0)


def generate_frames(
    n_frames: int,
    target_fraction: float,
    rng: np.random.Generator,
    camera: CameraModel = CameraModel(),
    target: TargetSpec = TargetSpec(),
    scene_params: SceneParams = SceneParams(),
    altitude_range: tuple[float, float] = (20.0, 30.0),
) -> Iterator[Frame]:
    """Yield ``n_frames`` frames, exactly ``round(n_frames * target_fraction)`` with a visible target.

    Target frames place the target centre uniformly over the raster; the
    others hide the target (deliberate negatives) under a random pose.
    """
    if not 0.0 <= target_fraction <= 1.0:
        raise ValueError("target_fraction must be in [0, 1]")
    has_target = np.zeros(n_frames, dtype=bool)
    has_target[: round(n_frames * target_fraction)] = True
    rng.shuffle(has_target)
    for i, positive in enumerate(has_target):
        altitude = rng.uniform(*altitude_range)
        yaw = rng.uniform(0.0, 2 * math.pi)
        if positive:
            pixel = (rng.uniform(0, camera.width - 1), rng.uniform(0, camera.height - 1))
        else:
            pixel = (rng.uniform(-camera.width, 2 * camera.width), rng.uniform(-camera.height, 2 * camera.height))
        state = random_pose_over(camera, target, altitude, yaw, pixel)
        state = UavState(state.position, state.velocity, state.yaw, i / camera.frame_rate)
        scene = random_scene(rng, target.center, scene_params, target_hidden=not positive)
        yield render_frame(camera, state, target, scene, rng)


def write_dataset(frames: Iterator[Frame], out_dir: str | Path) -> Path:
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    manifest = []
    for i, frame in enumerate(frames):
        img = dump_frame(out_dir, f"frame_{i:05d}", frame)
        manifest.append({
            "image": img.name,
            "bbox": list(frame.true_target_bbox) if frame.true_target_bbox else None,
        })
    path = out_dir / "manifest.json"
    path.write_text(json.dumps(manifest, indent=1) + "\n")
    return path


def load_dataset(manifest_path: str | Path) -> Iterator[tuple[Frame, tuple[int, int, int, int] | None]]:
    manifest_path = Path(manifest_path)
    if manifest_path.is_dir():
        manifest_path = manifest_path / "manifest.json"
    for entry in json.loads(manifest_path.read_text()):
        img = manifest_path.parent / entry["image"]
        sidecar = img.with_suffix(".json")
        meta = json.loads(sidecar.read_text()) if sidecar.exists() else {}
        bbox = tuple(entry["bbox"]) if entry["bbox"] is not None else None
        center = tuple(meta["center_px"]) if meta.get("center_px") else None
        frame = Frame(read_ppm(img), meta.get("capture_time", 0.0), center, bbox)
        yield frame, bbox
