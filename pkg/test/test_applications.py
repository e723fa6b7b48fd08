"""Tests for flowcodec.apps: rendering products, trajectories and the baselines."""

import csv

import numpy as np
import pytest
from PIL import Image

from flowcodec import ConfigError
from flowcodec.apps import (
    TRAJECTORY_COLUMNS,
    Trajectory,
    bilinear_upsample,
    estimate_shifts,
    extract_trajectory,
    frame_times,
    inpaint,
    layer_frames,
    nearest_frame,
    pixel_grid,
    render,
    render_canonical,
    save_segmentation,
    save_trajectory_csv,
    segment,
    smooth_trajectory,
    stabilize,
    upsample,
)
from flowcodec.config import Runtime
from flowcodec.media import SyntheticSpec, make_synthetic, psnr
from flowcodec.model import is_similarity, make_preset
from flowcodec.trainer import evaluate_psnr


def _trajectory(rows):
    rows = np.asarray(rows, dtype=np.float64)
    return Trajectory(frame_times(rows.shape[0]), rows)


# ─── sampling grids ──────────────────────────────────────────────────


def test_frame_times():
    assert frame_times(3).tolist() == [-1.0, 0.0, 1.0]
    assert frame_times(3, scale=2).tolist() == [-1.0, -0.5, 0.0, 0.5, 1.0]
    assert frame_times(1).tolist() == [0.0]
    with pytest.raises(ConfigError):
        frame_times(3, scale=0)


def test_pixel_grid_is_row_major():
    xs, ys = pixel_grid((3, 2))
    assert xs.tolist() == [-1.0, 0.0, 1.0, -1.0, 0.0, 1.0]
    assert ys.tolist() == [-1.0, -1.0, -1.0, 1.0, 1.0, 1.0]


# ─── rendering ───────────────────────────────────────────────────────


def test_render_defaults_to_training_grid(tiny_model):
    frames = render(tiny_model)
    assert frames.shape == (4, 12, 16, 3)
    assert frames.dtype == np.float32
    assert frames.min() >= 0.0 and frames.max() <= 1.0


def test_render_is_pure(tiny_model):
    assert np.array_equal(render(tiny_model), render(tiny_model))


def test_render_independent_of_thread_count(tiny_model):
    one = render(tiny_model)
    Runtime.threads = 4
    assert np.array_equal(render(tiny_model), one)


def test_render_agrees_with_evaluation(tiny_model, tiny_video):
    assert psnr(render(tiny_model), tiny_video.frames) == evaluate_psnr(tiny_model, tiny_video)


def test_render_arbitrary_times_and_resolution(tiny_model):
    frames = render(tiny_model, times=[0.25], resolution=(5, 7))
    assert frames.shape == (1, 7, 5, 3)


def test_upsample_at_unit_scale_is_render(tiny_model):
    assert np.array_equal(upsample(tiny_model, 1, 1), render(tiny_model))


def test_temporal_upsample_keeps_training_frames(tiny_model):
    up = upsample(tiny_model, scale_t=2)
    assert up.shape == (7, 12, 16, 3)
    assert np.array_equal(up[::2], render(tiny_model))


def test_spatial_upsample_shape(tiny_model):
    assert upsample(tiny_model, scale_xy=2).shape == (4, 24, 32, 3)


def test_upsample_rejects_zero_scale(tiny_model):
    with pytest.raises(ConfigError):
        upsample(tiny_model, scale_xy=0)


# ─── segmentation and per-layer products ─────────────────────────────


def test_segmentation_weights_are_a_partition(tiny_model):
    seg = segment(tiny_model)
    assert seg.n_layers == 2
    assert seg.index.shape == (4, 12, 16)
    assert np.allclose(seg.weights.sum(axis=-1), 1.0, atol=1e-6)
    assert np.array_equal(seg.index, np.argmax(seg.weights, axis=-1))


def test_single_layer_segmentation_is_constant_and_warns(quiet_log):
    model = make_preset("tiny", 1, seed=0, width=8, height=6, frames=2)
    seg = segment(model, run_log=quiet_log)
    assert not seg.index.any()
    assert [r["level"] for r in quiet_log.records] == ["warn"]


def test_single_layer_inpaint_is_render():
    model = make_preset("tiny", 1, seed=0, width=8, height=6, frames=2)
    assert np.array_equal(inpaint(model, 0), render(model))


def test_inpaint_layer_out_of_range(tiny_model):
    with pytest.raises(ConfigError, match="out of range"):
        inpaint(tiny_model, 2)
    with pytest.raises(ConfigError):
        inpaint(tiny_model, -1)


def test_layer_frames_one_per_layer(tiny_model):
    frames = layer_frames(tiny_model, times=[0.0])
    assert len(frames) == 2
    assert np.array_equal(frames[1], inpaint(tiny_model, 1, times=[0.0]))


def test_render_canonical(tiny_model):
    img = render_canonical(tiny_model, 0, resolution=(6, 4))
    assert img.shape == (4, 6, 3)
    assert img.min() >= 0.0 and img.max() <= 1.0
    with pytest.raises(ConfigError):
        render_canonical(tiny_model, 0, extent=0.0)


# ─── trajectories ────────────────────────────────────────────────────


def test_fresh_model_trajectory_is_identity():
    model = make_preset("tiny", 2, seed=0, frames=5)
    traj = extract_trajectory(model, 1)
    assert len(traj) == 5
    assert np.all(traj.params == 0.0)
    assert np.allclose(traj.matrices, [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0]])


def test_trajectory_length_mismatch():
    with pytest.raises(ConfigError):
        Trajectory(np.zeros(3), np.zeros((2, 4)))


def test_window_one_smoothing_is_a_copy():
    traj = _trajectory(np.random.default_rng(0).normal(size=(6, 4)))
    smoothed = smooth_trajectory(traj, 1)
    assert np.array_equal(smoothed.params, traj.params)
    assert smoothed.params is not traj.params


def test_constant_trajectory_is_unchanged():
    traj = _trajectory(np.tile([0.1, 0.2, -0.3, 0.05], (7, 1)))
    for kind in ("box", "gaussian"):
        assert np.allclose(smooth_trajectory(traj, 5, kind=kind).params, traj.params)


def test_alternating_jitter_is_damped():
    d = 0.4
    rows = np.zeros((10, 4))
    rows[:, 2] = d * (-1.0) ** np.arange(10)
    smoothed = smooth_trajectory(_trajectory(rows), 5)
    assert np.all(np.abs(smoothed.params[:, 2]) <= d / 3 + 1e-12)


def test_gaussian_window_center_weighted():
    rows = np.zeros((5, 4))
    rows[2, 3] = 1.0
    box = smooth_trajectory(_trajectory(rows), 5).params[2, 3]
    gauss = smooth_trajectory(_trajectory(rows), 5, kind="gaussian", sigma=0.8).params[2, 3]
    assert box == pytest.approx(0.2)
    assert gauss > box


def test_smoothed_entries_stay_similarities():
    traj = _trajectory(np.random.default_rng(1).normal(0.0, 0.3, size=(9, 4)))
    for m in smooth_trajectory(traj, 3).matrices:
        assert is_similarity(m)


@pytest.mark.parametrize("window", [0, 2, 4])
def test_even_or_zero_window_rejected(window):
    with pytest.raises(ConfigError, match="odd"):
        smooth_trajectory(_trajectory(np.zeros((3, 4))), window)


def test_unknown_smoothing_kind_rejected():
    with pytest.raises(ConfigError, match="smoothing kind"):
        smooth_trajectory(_trajectory(np.zeros((3, 4))), 3, kind="median")


# ─── stabilization ───────────────────────────────────────────────────


def test_window_one_stabilize_is_render(tiny_model):
    assert np.array_equal(stabilize(tiny_model, 1), render(tiny_model))


def test_stabilizing_a_static_flow_changes_nothing():
    model = make_preset("tiny", 2, seed=2, width=10, height=8, frames=4)
    assert np.allclose(stabilize(model, 3), render(model), atol=1e-6)


def test_stabilize_changes_a_moving_flow(tiny_model):
    out = stabilize(tiny_model, 3)
    assert out.shape == (4, 12, 16, 3)
    assert not np.array_equal(out, render(tiny_model))


def test_stabilize_frozen_layers_keep_identity():
    model = make_preset("tiny", 1, seed=2, width=10, height=8, frames=3, flow_frozen=True)
    assert np.allclose(stabilize(model, 3), render(model), atol=1e-6)


# ─── baselines ───────────────────────────────────────────────────────


def test_estimate_shifts_on_rolled_frames():
    video, _ = make_synthetic(SyntheticSpec(width=32, height=32, frames=2, sprite=False, seed=1))
    base = video.frames[0]
    frames = np.stack([base, np.roll(base, (-1, 2), axis=(0, 1))])
    assert np.allclose(estimate_shifts(frames), [[2.0, -1.0]], atol=1e-6)


def test_estimate_shifts_follows_background_motion():
    video, truth = make_synthetic(SyntheticSpec(width=32, height=24, frames=4, sprite=False,
                                                background_velocity=(1.0, 0.0), seed=2))
    shifts = estimate_shifts(video.frames)
    assert np.allclose(shifts, np.diff(truth.background_offsets, axis=0), atol=1e-6)


def test_nearest_frame_ties_go_earlier():
    kept = np.arange(3).reshape(3, 1, 1, 1) * np.ones((3, 2, 2, 3))
    filled = nearest_frame(kept, 2, 5)
    assert filled[:, 0, 0, 0].tolist() == [0, 0, 1, 1, 2]


def test_bilinear_unit_stride_is_identity():
    frames = np.random.default_rng(3).uniform(size=(2, 4, 5, 3)).astype(np.float32)
    assert np.allclose(bilinear_upsample(frames, 1, (4, 5)), frames)


def test_bilinear_midpoints_average_neighbours():
    small = np.zeros((1, 2, 2, 1), dtype=np.float32)
    small[0, :, 1] = 1.0
    full = bilinear_upsample(small, 2, (3, 4))
    assert full[0, 0, :, 0].tolist() == pytest.approx([0.0, 0.5, 1.0, 1.0])


# ─── writers ─────────────────────────────────────────────────────────


def test_save_segmentation(tmp_path, tiny_model):
    seg = segment(tiny_model, times=[-1.0, 1.0])
    paths = save_segmentation(seg, tmp_path / "seg")
    assert [p.name for p in paths] == ["frame_000000.png", "frame_000001.png", "weights.npy"]
    with Image.open(paths[1]) as im:
        assert im.mode == "P"
        assert np.array_equal(np.asarray(im), seg.index[1])
    assert np.array_equal(np.load(paths[2]), seg.weights)


def test_save_trajectory_csv(tmp_path):
    traj = _trajectory([[0.0, 0.1, 0.2, 0.3], [np.log(2.0), 0.0, 0.0, 0.0]])
    path = save_trajectory_csv(traj, tmp_path / "traj" / "layer0.csv")
    with path.open(newline="") as f:
        rows = list(csv.DictReader(f))
    assert tuple(rows[0]) == TRAJECTORY_COLUMNS
    assert float(rows[0]["theta"]) == 0.1
    assert float(rows[1]["s"]) == pytest.approx(2.0)
    assert float(rows[1]["t"]) == 1.0
