"""Tests for flowcodec.media: video I/O, the synthetic generator and PSNR."""

import json
import math

import numpy as np
import pytest
from PIL import Image

from flowcodec import ConfigError, MediaError, ShapeError
from flowcodec.media import (
    FRAME_PATTERN,
    PSNR_CAP,
    SyntheticSpec,
    VideoVolume,
    from_uint8,
    load_video,
    luma,
    make_synthetic,
    psnr,
    save_video,
    to_uint8,
    warp_wrapped,
)


def _random_frames(t=3, h=5, w=7, seed=0):
    rng = np.random.default_rng(seed)
    return from_uint8(rng.integers(0, 256, size=(t, h, w, 3), dtype=np.uint8))


# ─── video volume ────────────────────────────────────────────────────


class TestVideoVolume:
    """VideoVolume validation and properties."""

    def test_properties(self):
        video = VideoVolume(_random_frames(), fps=24.0)
        assert (video.n_frames, video.height, video.width) == (3, 5, 7)
        assert video.num_pixels == 105
        assert video.fps == 24.0

    def test_rejects_wrong_rank(self):
        with pytest.raises(MediaError, match=r"\(T, H, W, 3\)"):
            VideoVolume(np.zeros((4, 4, 3), dtype=np.float32))

    def test_rejects_out_of_range_samples(self):
        frames = np.full((1, 2, 2, 3), 1.5, dtype=np.float32)
        with pytest.raises(MediaError, match=r"within \[0, 1\]"):
            VideoVolume(frames)

    def test_rejects_empty_video(self):
        with pytest.raises(MediaError, match="no samples"):
            VideoVolume(np.zeros((0, 4, 4, 3), dtype=np.float32))


# ─── quantization to 8 bits ──────────────────────────────────────────


def test_uint8_endpoints_and_half():
    assert from_uint8(np.array([255], dtype=np.uint8))[0] == 1.0
    assert from_uint8(np.array([0], dtype=np.uint8))[0] == 0.0
    assert to_uint8(np.array([0.5]))[0] == 128


def test_uint8_round_trip_is_exact():
    data = np.arange(256, dtype=np.uint8)
    assert np.array_equal(to_uint8(from_uint8(data)), data)


# ─── load / save ─────────────────────────────────────────────────────


def test_png_directory_round_trip(tmp_path):
    frames = _random_frames()
    paths = save_video(frames, tmp_path / "clip")
    assert [p.name for p in paths] == [FRAME_PATTERN.format(k) for k in range(3)]
    loaded = load_video(tmp_path / "clip")
    assert np.array_equal(loaded.frames, frames)


def test_frames_load_in_numeric_order(tmp_path):
    frames = _random_frames(t=3)
    d = tmp_path / "clip"
    d.mkdir()
    for k, name in enumerate(["f2.png", "f10.png", "f1.png"]):
        Image.fromarray(to_uint8(frames[k])).save(d / name)
    loaded = load_video(d)
    assert np.array_equal(loaded.frames[0], frames[2])
    assert np.array_equal(loaded.frames[1], frames[0])
    assert np.array_equal(loaded.frames[2], frames[1])


def test_raw_rgb_round_trip(tmp_path):
    frames = _random_frames()
    rgb, sidecar = save_video(VideoVolume(frames, fps=12.0), tmp_path / "clip.rgb")
    meta = json.loads(sidecar.read_text())
    assert meta == {"width": 7, "height": 5, "frames": 3, "fps": 12.0}
    assert rgb.stat().st_size == 3 * 5 * 7 * 3
    loaded = load_video(rgb)
    assert loaded.fps == 12.0
    assert np.array_equal(loaded.frames, frames)


def test_raw_rgb_needs_sidecar(tmp_path):
    (tmp_path / "clip.rgb").write_bytes(b"\x00" * 12)
    with pytest.raises(MediaError, match="sidecar"):
        load_video(tmp_path / "clip.rgb")


def test_raw_rgb_size_must_match_sidecar(tmp_path):
    rgb, _ = save_video(_random_frames(), tmp_path / "clip.rgb")
    rgb.write_bytes(rgb.read_bytes()[:-3])
    with pytest.raises(MediaError, match="sidecar promises"):
        load_video(rgb)


def test_inconsistent_frame_sizes(tmp_path):
    d = tmp_path / "clip"
    d.mkdir()
    Image.new("RGB", (4, 4)).save(d / "frame_000000.png")
    Image.new("RGB", (5, 4)).save(d / "frame_000001.png")
    with pytest.raises(MediaError, match="inconsistent sizes"):
        load_video(d)


def test_missing_path(tmp_path):
    with pytest.raises(MediaError, match="does not exist"):
        load_video(tmp_path / "nowhere")


def test_empty_directory(tmp_path):
    with pytest.raises(MediaError, match="no PNG"):
        load_video(tmp_path)


# ─── synthetic generator ─────────────────────────────────────────────


def test_synthetic_is_deterministic():
    spec = SyntheticSpec(width=24, height=20, frames=5, sprite_size=6, jitter=0.5,
                         noise_sigma=0.01, seed=4)
    a, _ = make_synthetic(spec)
    b, _ = make_synthetic(spec)
    assert np.array_equal(a.frames, b.frames)


def test_seed_changes_content():
    a, _ = make_synthetic(SyntheticSpec(width=16, height=16, frames=2, sprite=False, seed=0))
    b, _ = make_synthetic(SyntheticSpec(width=16, height=16, frames=2, sprite=False, seed=1))
    assert not np.array_equal(a.frames, b.frames)


def test_integer_background_motion_is_an_exact_roll():
    video, truth = make_synthetic(SyntheticSpec(width=16, height=12, frames=4, sprite=False,
                                                background_velocity=(1.0, 0.0)))
    for k in range(4):
        assert np.array_equal(video.frames[k], np.roll(video.frames[0], k, axis=1))
    assert truth.background_offsets[:, 0].tolist() == [0.0, 1.0, 2.0, 3.0]


def test_sprite_mask_follows_its_velocity():
    _, truth = make_synthetic(SyntheticSpec(width=20, height=20, frames=3, sprite_size=4,
                                            sprite_start=(8.0, 8.0), sprite_velocity=(-1.0, 1.0)))
    for k in range(3):
        rows, cols = np.nonzero(truth.sprite_masks[k])
        assert (rows.min(), cols.min()) == (8 + k, 8 - k)
        assert truth.sprite_masks[k].sum() == 16


def test_sprite_larger_than_frame_rejected():
    with pytest.raises(ConfigError, match="does not fit"):
        make_synthetic(SyntheticSpec(width=8, height=8, sprite_size=9))


def test_warp_wrapped_integer_shift():
    img = np.arange(12.0).reshape(3, 4)
    assert np.array_equal(warp_wrapped(img, (1.0, 2.0)), np.roll(img, (2, 1), axis=(0, 1)))


# ─── metrics ─────────────────────────────────────────────────────────


def test_psnr_identical_is_capped():
    a = _random_frames()
    assert psnr(a, a) == PSNR_CAP
    assert psnr(a, a, cap=None) == math.inf


def test_psnr_unit_error_is_zero_db():
    assert psnr(np.ones((2, 2, 3)), np.zeros((2, 2, 3))) == 0.0


def test_psnr_uniform_tenth_is_twenty_db():
    a = np.full((4, 4, 3), 0.5)
    assert psnr(a, a + 0.1) == pytest.approx(20.0)


def test_psnr_shape_mismatch():
    with pytest.raises(ShapeError):
        psnr(np.zeros((2, 2, 3)), np.zeros((2, 3, 3)))


def test_luma_weights():
    assert luma(np.array([1.0, 1.0, 1.0])) == pytest.approx(1.0)
    assert luma(np.array([1.0, 0.0, 0.0])) == pytest.approx(0.299)
