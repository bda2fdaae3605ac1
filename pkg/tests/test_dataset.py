import json

import numpy as np
import pytest

from precision_drop.dataset import generate_frames, load_dataset, read_ppm, write_dataset, write_ppm
from precision_drop.sensors import CameraModel, SceneParams

SMALL = CameraModel(width=320, height=180)


def test_ppm_roundtrip(tmp_path):
    img = np.random.default_rng(0).integers(0, 256, (7, 11, 3), dtype=np.uint8)
    write_ppm(tmp_path / "a.ppm", img)
    assert np.array_equal(read_ppm(tmp_path / "a.ppm"), img)


def test_ppm_header_comments(tmp_path):
    body = bytes(range(12))
    (tmp_path / "b.ppm").write_bytes(b"P6\n# made by hand\n2 2\n255\n" + body)
    assert read_ppm(tmp_path / "b.ppm").tobytes() == body


def test_ppm_rejects_other_formats(tmp_path):
    (tmp_path / "c.pgm").write_bytes(b"P5\n2 2\n255\n" + bytes(4))
    with pytest.raises(ValueError):
        read_ppm(tmp_path / "c.pgm")


@pytest.mark.parametrize("n, fraction, positives", [(10, 0.6, 6), (7, 0.0, 0), (5, 1.0, 5), (1500, 0.6, 900)])
def test_exact_split(n, fraction, positives):
    # cheap check on the split alone: tiny raster
    frames = generate_frames(n, fraction, np.random.default_rng(1), CameraModel(width=64, height=36),
                             scene_params=SceneParams(clutter_count=(0, 0)))
    assert sum(f.true_target_bbox is not None for f in frames) == positives


def test_bad_fraction():
    with pytest.raises(ValueError):
        list(generate_frames(3, 1.5, np.random.default_rng()))


def test_write_and_load(tmp_path):
    frames = list(generate_frames(6, 0.5, np.random.default_rng(2), SMALL))
    manifest = write_dataset(iter(frames), tmp_path)
    entries = json.loads(manifest.read_text())
    assert len(entries) == 6
    assert all(set(e) == {"image", "bbox"} for e in entries)
    sidecar = json.loads((tmp_path / "frame_00000.json").read_text())
    assert set(sidecar) == {"capture_time", "center_px", "bbox"}
    loaded = list(load_dataset(tmp_path))
    for original, (frame, bbox) in zip(frames, loaded):
        assert np.array_equal(original.pixels, frame.pixels)
        assert bbox == original.true_target_bbox
        assert frame.true_target_center_px == original.true_target_center_px
