"""
flowcodec - layered flow-network video codec.

A video is fit by a small stack of layers, each a flow network (per-frame
similarity warp) feeding a color network (canonical appearance). The fitted
weights, quantized and range coded, are the compressed video.

Usage:

    from flowcodec import TrainConfig, load_video, train, pack, write_bitstream

    video = load_video("frames/")
    result = train(video, TrainConfig(preset="tiny", n_layers=2))
    write_bitstream(pack(result.model), "clip.cfv")

    from flowcodec import read_bitstream, unpack, render

    frames = render(unpack(read_bitstream("clip.cfv")))
"""

from importlib import import_module
from importlib.metadata import PackageNotFoundError
from importlib.metadata import version as _dist_version

from ._errors import (
    ChecksumError,
    CodecError,
    ConfigError,
    FlowCodecError,
    MediaError,
    NumericError,
    OptimizerError,
    ShapeError,
    TapeError,
    TrainingDivergedError,
    TruncatedStreamError,
    VersionError,
)
from .log import LogLevel, RunLog
from .track import MetricsTrack

try:
    __version__ = _dist_version("flowcodec")
except PackageNotFoundError:
    # Source tree without an installed distribution (e.g. PYTHONPATH=src).
    __version__ = "0.0.0+unknown"

# numpy-heavy subpackages load on first attribute access so that the CLI can
# set the BLAS thread variables before numpy is imported.
_LAZY = {
    "Tensor": "numerics",
    "AdamW": "numerics",
    "no_grad": "numerics",
    "FlowModel": "model",
    "ModelSpec": "model",
    "build_model": "model",
    "make_preset": "model",
    "save_model": "model",
    "load_model": "model",
    "WeightCoefficients": "loss",
    "build_weight_map": "loss",
    "VideoVolume": "media",
    "load_video": "media",
    "save_video": "media",
    "make_synthetic": "media",
    "psnr": "media",
    "TrainConfig": "trainer",
    "TrainResult": "trainer",
    "train": "trainer",
    "evaluate_psnr": "trainer",
    "load_checkpoint": "trainer",
    "pack": "codec",
    "unpack": "codec",
    "write_bitstream": "codec",
    "read_bitstream": "codec",
    "bpp": "codec",
    "render": "apps",
    "upsample": "apps",
    "segment": "apps",
    "inpaint": "apps",
    "stabilize": "apps",
}

__all__ = [
    "__version__",
    # Errors
    "FlowCodecError",
    "ShapeError",
    "TapeError",
    "OptimizerError",
    "ConfigError",
    "NumericError",
    "TrainingDivergedError",
    "MediaError",
    "CodecError",
    "ChecksumError",
    "VersionError",
    "TruncatedStreamError",
    # Logging / metrics
    "LogLevel",
    "RunLog",
    "MetricsTrack",
    *_LAZY,
]


def __getattr__(name):
    module = _LAZY.get(name)
    if module is None:
        raise AttributeError(f"module {__name__!r} has no attribute {name!r}")
    value = getattr(import_module(f".{module}", __name__), name)
    globals()[name] = value
    return value
