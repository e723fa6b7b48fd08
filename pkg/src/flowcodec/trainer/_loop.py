"""The epoch loop.

Each epoch runs ``ceil(trainable_pixels / batch_size)`` AdamW steps at the
epoch's cosine learning rate, then scores the model on the validation grid.
Sampling draws from ``default_rng([seed, 1])``; with ``Runtime.threads == 1``
two runs with one config (and a resumed run) are bit-identical.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Any, Callable, Dict, List, Optional, Union

import numpy as np
from rich.progress import BarColumn, MofNCompleteColumn, Progress, TextColumn, TimeRemainingColumn

from .._errors import ConfigError, TrainingDivergedError
from ..apps import frame_times, render
from ..config import Runtime
from ..log import RunLog
from ..loss import WeightMap, batch_stats, build_weight_map, total_loss
from ..media import PSNR_CAP, VideoVolume, psnr
from ..model import FlowModel, build_model, composite_forward
from ..numerics import AdamW, LrSchedule, backward, lr_at, no_grad
from ..track import MetricsTrack
from ._checkpoint import Checkpoint, load_checkpoint, save_checkpoint
from ._config import TrainConfig
from ._sampling import FULL_VALIDATION_LIMIT, sample_batch, trainable_pixels, validation_grid

EVAL_CHUNK = 65536


@dataclass
class TrainResult:
    model: FlowModel
    history: List[Dict[str, Any]]  # one {"epoch", "lr", "loss", "psnr"} per epoch
    config: TrainConfig
    weight_map: Optional[WeightMap] = field(default=None, repr=False)

    @property
    def final_psnr(self) -> float:
        return self.history[-1]["psnr"] if self.history else float("nan")


def evaluate_psnr(model: FlowModel, video: VideoVolume, stride: int = 1, frame_stride: int = 1,
                  *, cap: Optional[float] = PSNR_CAP) -> float:
    """PSNR (dB, peak 1.0) of the rendered model against ``video`` over every
    strided pixel of every ``frame_stride``-th frame. A perfect fit reports
    ``cap`` (``+inf`` with ``cap=None``)."""
    if stride < 1 or frame_stride < 1:
        raise ConfigError(f"stride and frame_stride must be >= 1, got {stride}, {frame_stride}")
    times = frame_times(video.n_frames)[::frame_stride]
    pred = render(model, times, (video.width, video.height))[:, ::stride, ::stride]
    gt = video.frames[::frame_stride, ::stride, ::stride]
    return psnr(pred, gt, cap=cap)


def _subsample_psnr(model: FlowModel, video: VideoVolume, cfg: TrainConfig) -> float:
    grid = validation_grid(video, cfg.stride, cfg.frame_stride, seed=cfg.seed)
    pred = np.empty_like(grid.gt)
    with no_grad():
        for lo in range(0, len(grid), EVAL_CHUNK):
            hi = min(lo + EVAL_CHUNK, len(grid))
            out = composite_forward(model, grid.x[lo:hi], grid.y[lo:hi], grid.t[lo:hi])
            pred[lo:hi] = out.rgb.data
    return psnr(pred, grid.gt)


def validate(model: FlowModel, video: VideoVolume, cfg: TrainConfig) -> float:
    """PSNR on the fixed validation grid: the full render when the strided
    video is small enough, else a seeded 1% subsample."""
    if trainable_pixels(video, cfg.stride, cfg.frame_stride) <= FULL_VALIDATION_LIMIT:
        return evaluate_psnr(model, video, cfg.stride, cfg.frame_stride)
    return _subsample_psnr(model, video, cfg)


def build_for_config(cfg: TrainConfig, video: VideoVolume) -> FlowModel:
    return build_model(cfg.model_spec(), seed=cfg.seed, width=video.width, height=video.height,
                       frames=video.n_frames, fps=video.fps)


def _restore(model: FlowModel, ckpt: Checkpoint, opt: AdamW, cfg: TrainConfig) -> None:
    if ckpt.model.spec != model.spec:
        raise ConfigError(
            f"checkpoint architecture {ckpt.model.spec.preset}/{ckpt.model.n_layers} layers "
            f"does not match the configured {model.spec.preset}/{model.n_layers}"
        )
    if ckpt.epoch >= cfg.epochs:
        raise ConfigError(f"checkpoint is at epoch {ckpt.epoch}; nothing left of {cfg.epochs} epochs")
    for (_, dst, _), (_, src, _) in zip(model.named_tensors(), ckpt.model.named_tensors()):
        dst.data[...] = src.data
    opt.state = ckpt.optimizer


def _progress(run_log: RunLog) -> Progress:
    return Progress(
        TextColumn("[bold blue]{task.description}"),
        BarColumn(),
        MofNCompleteColumn(),
        TextColumn("loss {task.fields[loss]:.5f}"),
        TimeRemainingColumn(),
        console=run_log.console,
        transient=True,
        disable=not Runtime.show_progress(),
    )


def train(video: VideoVolume, cfg: Optional[TrainConfig] = None, *,
          run_log: Optional[RunLog] = None, metrics: Optional[MetricsTrack] = None,
          resume: Optional[Union[str, Path, Checkpoint]] = None,
          on_epoch: Optional[Callable[[int, FlowModel], None]] = None) -> TrainResult:
    """Fit a model to ``video``.

    Builds the loss weight map when the video has none, trains for
    ``cfg.epochs`` epochs and logs ``epoch, lr, loss, psnr`` per epoch to
    ``metrics``. ``resume`` is a checkpoint (or its file/directory) to continue
    from.

    Raises:
        ConfigError: invalid config, or a checkpoint that does not fit it.
        TrainingDivergedError: the loss became NaN/inf.
    """
    cfg = (cfg or TrainConfig()).validate()
    run_log = run_log or RunLog()
    metrics = metrics if metrics is not None else MetricsTrack()

    weight_map: Optional[WeightMap] = None
    if video.weight_map is None:
        weight_map = build_weight_map(video, cfg.weights)
        video = replace(video, weight_map=weight_map.weights)

    model = build_for_config(cfg, video)
    opt = AdamW(model.parameters(), betas=(cfg.beta1, cfg.beta2), eps=cfg.eps,
                weight_decay=cfg.weight_decay, lr=cfg.base_lr)
    schedule = LrSchedule(cfg.base_lr, cfg.epochs, cfg.min_lr)
    rng = np.random.default_rng([cfg.seed, 1])
    history: List[Dict[str, Any]] = []
    start = 0

    if resume is not None:
        ckpt = resume if isinstance(resume, Checkpoint) else load_checkpoint(resume)
        _restore(model, ckpt, opt, cfg)
        rng = ckpt.rng()
        history = [dict(h) for h in ckpt.history]
        for row in history:
            metrics.append(**row)
        start = ckpt.epoch + 1
        run_log.log(metadata={"epoch": ckpt.epoch}).info("resumed from checkpoint")

    steps = math.ceil(trainable_pixels(video, cfg.stride, cfg.frame_stride) / cfg.batch_size)
    run_log.log(metadata={
        "preset": cfg.preset, "layers": model.n_layers, "ablation": cfg.ablation,
        "params": model.num_params(), "epochs": cfg.epochs, "steps_per_epoch": steps,
    }).info("training started")

    with _progress(run_log) as progress:
        for epoch in range(start, cfg.epochs):
            lr = lr_at(schedule, epoch)
            task = progress.add_task(f"epoch {epoch + 1}/{cfg.epochs}", total=steps, loss=0.0)
            loss_sum = 0.0
            for step in range(steps):
                batch = sample_batch(video, rng, cfg.batch_size, cfg.stride, cfg.frame_stride)
                out = composite_forward(model, batch.x, batch.y, batch.t)
                report = total_loss(out, batch.gt, batch.weights, lam=cfg.lam, gamma=cfg.gamma)
                if not math.isfinite(report.total):
                    raise TrainingDivergedError(
                        "training loss is not finite", lr=lr, epoch=epoch, step=step,
                        batch_stats=batch_stats(out.rgb, batch.gt, batch.weights),
                    )
                opt.zero_grad()
                backward(report.loss)
                opt.step(lr)
                loss_sum += report.total
                progress.update(task, advance=1, loss=report.total)
            progress.remove_task(task)

            row = {"epoch": epoch, "lr": lr, "loss": loss_sum / steps,
                   "psnr": validate(model, video, cfg)}
            history.append(row)
            metrics.append(**row)
            metrics.flush()
            run_log.log(metadata=row).info(f"epoch {epoch + 1}/{cfg.epochs}")

            if cfg.checkpoint_every and (epoch + 1) % cfg.checkpoint_every == 0:
                path = save_checkpoint(Checkpoint(
                    model=model, optimizer=opt.state, epoch=epoch,
                    rng_state=rng.bit_generator.state, history=history, config=cfg.to_dict(),
                ), cfg.checkpoint_dir)
                run_log.log(metadata={"path": str(path)}).debug("checkpoint written")
            if on_epoch is not None:
                on_epoch(epoch, model)

    return TrainResult(model=model, history=history, config=cfg, weight_map=weight_map)
