"""Coordinate sampling, the training loop, evaluation and checkpoints."""

from ._checkpoint import Checkpoint, checkpoint_path, load_checkpoint, save_checkpoint
from ._config import ABLATIONS, TrainConfig
from ._loop import TrainResult, build_for_config, evaluate_psnr, train, validate
from ._sampling import (
    FULL_VALIDATION_LIMIT,
    Batch,
    sample_batch,
    trainable_pixels,
    validation_grid,
)

__all__ = [
    "TrainConfig", "ABLATIONS", "TrainResult", "train", "evaluate_psnr", "validate",
    "build_for_config",
    "Batch", "sample_batch", "validation_grid", "trainable_pixels", "FULL_VALIDATION_LIMIT",
    "Checkpoint", "save_checkpoint", "load_checkpoint", "checkpoint_path",
]
