"""The flowcodec exception family.

One module so every subpackage (numerics, model, codec, media, ...) can raise
from the same hierarchy without importing each other. The CLI catches
``FlowCodecError`` per command and turns it into ``error: <message>`` plus a
non-zero exit code.
"""

from __future__ import annotations

from typing import Any, Dict, Optional


class FlowCodecError(RuntimeError):
    """An operation that failed for a reason the caller can act on."""


class ShapeError(FlowCodecError, ValueError):
    """Operand shapes that an op cannot combine. The message names the op
    and every operand shape."""

    def __init__(self, op: str, *shapes: Any, detail: str = ""):
        self.op = op
        self.shapes = tuple(tuple(s) for s in shapes)
        listed = ", ".join(str(s) for s in self.shapes)
        msg = f"{op}: incompatible shapes {listed}"
        if detail:
            msg += f" ({detail})"
        super().__init__(msg)


class TapeError(FlowCodecError):
    """backward() called on something that is not a scalar on the tape."""


class OptimizerError(FlowCodecError):
    """An optimizer step that cannot run, e.g. a registered param without grad."""


class ConfigError(FlowCodecError, ValueError):
    """A preset, config value, schedule epoch or layer index out of range."""


class NumericError(FlowCodecError):
    """Non-finite values where the model guarantees finite ones."""


class TrainingDivergedError(NumericError):
    """The training loss went NaN/inf. Carries the state at the failing step
    so the caller can tell a bad lr from bad data."""

    def __init__(self, message: str, *, lr: float, epoch: int, step: int,
                 batch_stats: Optional[Dict[str, float]] = None):
        self.lr = lr
        self.epoch = epoch
        self.step = step
        self.batch_stats = dict(batch_stats or {})
        stats = ", ".join(f"{k}={v:.6g}" for k, v in self.batch_stats.items())
        super().__init__(
            f"{message} (epoch={epoch}, step={step}, lr={lr:.6g}"
            + (f", {stats}" if stats else "") + ")"
        )


class MediaError(FlowCodecError):
    """Frames that cannot be read or written, or that disagree with each other."""


class CodecError(FlowCodecError):
    """A bitstream or entropy stream that cannot be decoded."""


class ChecksumError(CodecError):
    """CRC32 mismatch between the stored and recomputed checksum."""


class VersionError(CodecError):
    """Wrong magic or an unsupported format version."""


class TruncatedStreamError(CodecError):
    """The stream ends before the data its header promises."""
