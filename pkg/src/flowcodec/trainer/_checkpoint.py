"""Resumable training checkpoints.

A checkpoint is one msgpack map::

    {"format": "flowcodec-checkpoint", "version": 1, "epoch": k,
     "model": <.cfm bytes>, "optimizer": {...}, "rng": "<json>",
     "history": [...], "config": {...}}

``epoch`` is the last completed epoch. The sampling generator's state is kept
as a JSON string because PCG64 state words exceed msgpack's 64-bit integers.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Union

import msgpack
import numpy as np

from .._errors import CodecError, TruncatedStreamError, VersionError
from ..model import FlowModel, model_from_bytes, model_to_bytes
from ..numerics import OptimizerState

CHECKPOINT_FORMAT = "flowcodec-checkpoint"
CHECKPOINT_VERSION = 1
LATEST = "latest.ckpt"


@dataclass
class Checkpoint:
    model: FlowModel
    optimizer: OptimizerState
    epoch: int
    rng_state: Dict[str, Any]
    history: List[Dict[str, Any]] = field(default_factory=list)
    config: Dict[str, Any] = field(default_factory=dict)

    def rng(self) -> np.random.Generator:
        """A generator positioned exactly where the run left off."""
        bitgen = getattr(np.random, self.rng_state["bit_generator"])()
        bitgen.state = self.rng_state
        return np.random.Generator(bitgen)

    def to_bytes(self) -> bytes:
        return msgpack.packb({
            "format": CHECKPOINT_FORMAT,
            "version": CHECKPOINT_VERSION,
            "epoch": self.epoch,
            "model": model_to_bytes(self.model),
            "optimizer": self.optimizer.to_dict(),
            "rng": json.dumps(self.rng_state),
            "history": self.history,
            "config": self.config,
        }, use_bin_type=True)

    @classmethod
    def from_bytes(cls, buf: bytes) -> "Checkpoint":
        try:
            d = msgpack.unpackb(buf, raw=False)
        except (msgpack.ExtraData, msgpack.FormatError, msgpack.StackError, ValueError) as e:
            raise TruncatedStreamError(f"checkpoint is corrupt: {e}") from e
        if not isinstance(d, dict) or d.get("format") != CHECKPOINT_FORMAT:
            raise VersionError("not a flowcodec checkpoint")
        if d.get("version") != CHECKPOINT_VERSION:
            raise VersionError(f"checkpoint version {d.get('version')} is not supported")
        return cls(
            model=model_from_bytes(d["model"]),
            optimizer=OptimizerState.from_dict(d["optimizer"]),
            epoch=int(d["epoch"]),
            rng_state=json.loads(d["rng"]),
            history=list(d["history"]),
            config=dict(d["config"]),
        )


def checkpoint_path(directory: Union[str, Path], epoch: int) -> Path:
    return Path(directory) / f"epoch_{epoch:04d}.ckpt"


def save_checkpoint(ckpt: Checkpoint, directory: Union[str, Path]) -> Path:
    """Write ``epoch_NNNN.ckpt`` and refresh ``latest.ckpt`` in ``directory``."""
    d = Path(directory)
    d.mkdir(parents=True, exist_ok=True)
    buf = ckpt.to_bytes()
    path = checkpoint_path(d, ckpt.epoch)
    path.write_bytes(buf)
    (d / LATEST).write_bytes(buf)
    return path


def load_checkpoint(path: Union[str, Path]) -> Checkpoint:
    """Load a checkpoint file, or ``latest.ckpt`` when given a directory.

    Raises:
        CodecError: missing, corrupt or foreign file.
    """
    p = Path(path)
    if p.is_dir():
        p = p / LATEST
    try:
        buf = p.read_bytes()
    except OSError as e:
        raise CodecError(f"cannot read checkpoint '{p}': {e}") from e
    return Checkpoint.from_bytes(buf)
