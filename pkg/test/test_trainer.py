"""Tests for flowcodec.trainer: sampling, config, the epoch loop and checkpoints."""

from dataclasses import replace

import numpy as np
import pytest

from flowcodec import ConfigError, TrainingDivergedError
from flowcodec.apps import render
from flowcodec.media import VideoVolume, psnr
from flowcodec.track import MetricsTrack
from flowcodec.trainer import (
    Checkpoint,
    TrainConfig,
    build_for_config,
    checkpoint_path,
    evaluate_psnr,
    load_checkpoint,
    sample_batch,
    train,
    trainable_pixels,
    validation_grid,
)
from flowcodec.trainer import _loop


def _video(t=2, h=8, w=8, seed=0):
    rng = np.random.default_rng(seed)
    return VideoVolume(rng.uniform(size=(t, h, w, 3)).astype(np.float32))


def _fast_config(**overrides):
    base = dict(epochs=2, batch_size=256, base_lr=1e-3, preset="tiny", n_layers=2, seed=5)
    base.update(overrides)
    return TrainConfig(**base)


# ─── sampling ────────────────────────────────────────────────────────


def test_sampling_covers_every_pixel():
    video = _video()
    batch = sample_batch(video, np.random.default_rng(0), 100_000)
    flat = (batch.frame * 8 + batch.row) * 8 + batch.col
    assert np.unique(flat).size == 2 * 8 * 8


def test_sampling_draws_with_replacement():
    video = _video(t=1, h=4, w=4)
    batch = sample_batch(video, np.random.default_rng(6), 64)
    flat = batch.row * 4 + batch.col
    assert len(batch) == 64
    assert np.unique(flat).size < 64


def test_sampling_respects_stride():
    video = _video(t=4, h=16, w=16)
    batch = sample_batch(video, np.random.default_rng(1), 2000, stride=4, frame_stride=2)
    assert np.all(batch.row % 4 == 0) and np.all(batch.col % 4 == 0)
    assert np.all(batch.frame % 2 == 0)


def test_batch_ground_truth_and_coordinates():
    video = _video()
    batch = sample_batch(video, np.random.default_rng(2), 50)
    assert np.array_equal(batch.gt, video.frames[batch.frame, batch.row, batch.col])
    assert np.allclose(batch.x, batch.col / 7 * 2 - 1)
    assert np.allclose(batch.t, batch.frame * 2.0 - 1.0)
    assert np.all(batch.weights == 1.0)


def test_batch_weights_come_from_the_weight_map():
    video = _video()
    wm = np.random.default_rng(3).uniform(0.5, 2.0, size=(2, 8, 8)).astype(np.float32)
    video = replace(video, weight_map=wm)
    batch = sample_batch(video, np.random.default_rng(4), 20)
    assert np.array_equal(batch.weights, wm[batch.frame, batch.row, batch.col])


def test_zero_batch_rejected():
    with pytest.raises(ConfigError, match="batch_size"):
        sample_batch(_video(), np.random.default_rng(0), 0)


def test_validation_grid_is_the_whole_strided_video():
    video = _video(t=3, h=10, w=9)
    grid = validation_grid(video, stride=2)
    assert len(grid) == trainable_pixels(video, stride=2) == 3 * 5 * 5
    assert grid.row.max() == 8 and grid.col.max() == 8


# ─── config ──────────────────────────────────────────────────────────


class TestTrainConfig:
    """TrainConfig validation and dict round trips."""

    def test_defaults_are_valid(self):
        cfg = TrainConfig().validate()
        assert cfg.epochs == 53
        assert (cfg.lam, cfg.gamma) == (0.25, 0.1)

    @pytest.mark.parametrize("field, value", [
        ("epochs", 0), ("batch_size", 0), ("base_lr", 0.0), ("preset", "XL"),
        ("n_layers", 0), ("ablation", "none"), ("stride", 0), ("gamma", -1.0),
    ])
    def test_invalid_values(self, field, value):
        with pytest.raises(ConfigError):
            TrainConfig(**{field: value}).validate()

    def test_checkpoint_every_needs_a_directory(self):
        with pytest.raises(ConfigError, match="checkpoint_dir"):
            TrainConfig(checkpoint_every=2).validate()

    def test_from_dotted_dict(self):
        cfg = TrainConfig.from_dict({"epochs": 3, "weights.bias": 0.3, "weights.canny": 0.0})
        assert cfg.epochs == 3
        assert cfg.weights.bias == 0.3 and cfg.weights.canny == 0.0

    def test_unknown_keys_rejected(self):
        with pytest.raises(ConfigError, match="unknown training config"):
            TrainConfig.from_dict({"epoch": 3})
        with pytest.raises(ConfigError, match="weights.sobel"):
            TrainConfig.from_dict({"weights": {"sobel": 1.0}})

    def test_dict_round_trip(self):
        cfg = _fast_config(ablation="no_layers")
        assert TrainConfig.from_dict(cfg.to_dict()) == cfg

    def test_ablations_keep_the_parameter_budget(self):
        full = TrainConfig(preset="tiny", n_layers=2).model_spec()
        single = TrainConfig(preset="tiny", n_layers=2, ablation="no_layers").model_spec()
        frozen = TrainConfig(preset="tiny", n_layers=2, ablation="no_layers_no_flow").model_spec()
        assert single.n_layers == frozen.n_layers == 1
        assert single.param_count() <= full.param_count()
        assert full.param_count() - single.param_count() < 2000
        assert frozen.flow_frozen and not single.flow_frozen


# ─── training loop ───────────────────────────────────────────────────


def test_training_records_one_row_per_epoch(tiny_video, quiet_log):
    metrics = MetricsTrack()
    result = train(tiny_video, _fast_config(), run_log=quiet_log, metrics=metrics)
    assert [row["epoch"] for row in result.history] == [0, 1]
    assert len(metrics) == 2
    assert result.history[0]["lr"] == pytest.approx(1e-3)
    assert result.final_psnr == result.history[-1]["psnr"]
    assert result.weight_map is not None


def test_fixed_seed_is_reproducible(tiny_video, quiet_log):
    cfg = _fast_config(epochs=1)
    a = train(tiny_video, cfg, run_log=quiet_log)
    b = train(tiny_video, cfg, run_log=quiet_log)
    assert a.history == b.history
    for (_, ta, _), (_, tb, _) in zip(a.model.named_tensors(), b.model.named_tensors()):
        assert np.array_equal(ta.data, tb.data)


def test_constant_video_loss_falls(constant_video, quiet_log):
    cfg = _fast_config(epochs=4, batch_size=64, base_lr=5e-3, n_layers=1)
    result = train(constant_video, cfg, run_log=quiet_log)
    assert result.history[-1]["loss"] < 0.7 * result.history[0]["loss"]
    assert result.history[-1]["psnr"] > result.history[0]["psnr"]


def test_constant_video_fits_above_40db(constant_video, quiet_log):
    # 128 steps per epoch on the 2048-pixel clip
    cfg = _fast_config(epochs=5, batch_size=16, base_lr=5e-3, n_layers=1, seed=0)
    result = train(constant_video, cfg, run_log=quiet_log)
    assert result.final_psnr > 40.0
    assert evaluate_psnr(result.model, constant_video) > 40.0


def test_frozen_flow_never_moves(tiny_video, quiet_log):
    cfg = _fast_config(epochs=1, ablation="no_layers_no_flow")
    fresh = build_for_config(cfg, tiny_video)
    result = train(tiny_video, cfg, run_log=quiet_log)
    before = {n: t.data for n, t, kind in fresh.named_tensors() if kind == "flow"}
    after = {n: t.data for n, t, kind in result.model.named_tensors() if kind == "flow"}
    assert before.keys() == after.keys() and before
    for name in before:
        assert np.array_equal(before[name], after[name])


def test_divergence_reports_where(tiny_video, quiet_log, monkeypatch):
    real = _loop.total_loss

    def poisoned(*args, **kwargs):
        return replace(real(*args, **kwargs), total=float("nan"))

    monkeypatch.setattr(_loop, "total_loss", poisoned)
    with pytest.raises(TrainingDivergedError) as info:
        train(tiny_video, _fast_config(), run_log=quiet_log)
    assert (info.value.epoch, info.value.step) == (0, 0)
    assert info.value.lr == pytest.approx(1e-3)
    assert set(info.value.batch_stats) >= {"gt_mean", "pred_min", "pred_max"}


def test_on_epoch_callback(tiny_video, quiet_log):
    seen = []
    train(tiny_video, _fast_config(), run_log=quiet_log, on_epoch=lambda e, m: seen.append(e))
    assert seen == [0, 1]


# ─── evaluation ──────────────────────────────────────────────────────


def test_evaluate_psnr_matches_a_full_render(tiny_model, tiny_video):
    frames = render(tiny_model)
    assert evaluate_psnr(tiny_model, tiny_video) == psnr(frames, tiny_video.frames)


def test_evaluate_psnr_strided(tiny_model, tiny_video):
    frames = render(tiny_model)
    expected = psnr(frames[::2, ::3, ::3], tiny_video.frames[::2, ::3, ::3])
    assert evaluate_psnr(tiny_model, tiny_video, stride=3, frame_stride=2) == expected


# ─── checkpoints ─────────────────────────────────────────────────────


def test_resume_is_bit_identical(tiny_video, quiet_log, tmp_path):
    cfg = _fast_config(epochs=3, checkpoint_every=1, checkpoint_dir=str(tmp_path / "ckpt"))
    straight = train(tiny_video, cfg, run_log=quiet_log)

    metrics = MetricsTrack()
    resumed = train(tiny_video, cfg, run_log=quiet_log, metrics=metrics,
                    resume=checkpoint_path(tmp_path / "ckpt", 0))
    assert resumed.history == straight.history
    assert len(metrics) == 3
    for (_, ta, _), (_, tb, _) in zip(straight.model.named_tensors(), resumed.model.named_tensors()):
        assert np.array_equal(ta.data, tb.data)


def test_latest_checkpoint_is_the_last_epoch(tiny_video, quiet_log, tmp_path):
    cfg = _fast_config(checkpoint_every=1, checkpoint_dir=str(tmp_path))
    train(tiny_video, cfg, run_log=quiet_log)
    ckpt = load_checkpoint(tmp_path)
    assert isinstance(ckpt, Checkpoint)
    assert ckpt.epoch == 1
    assert ckpt.optimizer.step == 2 * 3
    assert ckpt.config["epochs"] == 2


def test_finished_checkpoint_cannot_resume(tiny_video, quiet_log, tmp_path):
    cfg = _fast_config(checkpoint_every=1, checkpoint_dir=str(tmp_path))
    train(tiny_video, cfg, run_log=quiet_log)
    with pytest.raises(ConfigError, match="nothing left"):
        train(tiny_video, cfg, run_log=quiet_log, resume=tmp_path)


def test_mismatched_checkpoint_rejected(tiny_video, quiet_log, tmp_path):
    cfg = _fast_config(epochs=2, checkpoint_every=1, checkpoint_dir=str(tmp_path))
    train(tiny_video, cfg, run_log=quiet_log)
    other = _fast_config(epochs=2, n_layers=3)
    with pytest.raises(ConfigError, match="does not match"):
        train(tiny_video, other, run_log=quiet_log, resume=checkpoint_path(tmp_path, 0))
