"""
flowcodec encode: train a model on a video and write the compressed bitstream.

Usage:
    flowcodec encode <frames> -o clip.cfv [--config train.json] [training flags]

Config-file values become the flag defaults, so anything given on the command
line wins.
"""

from __future__ import annotations

import argparse
from pathlib import Path
from typing import Any, Dict, List

from ..._errors import FlowCodecError
from ...codec import bpp, pack, unpack, write_bitstream
from ...config import load_config_file
from ...log import RunLog
from ...loss import WeightCoefficients, export_weight_map
from ...media import load_video
from ...model import save_model
from ...track import MetricsTrack
from ...trainer import ABLATIONS, TrainConfig, evaluate_psnr, train
from .._common import emit, error, make_parser

# flag dest == TrainConfig key (weights.* included)
_TRAIN_FLAGS = [
    ("--epochs", "epochs", int, "training epochs"),
    ("--lr", "base_lr", float, "peak learning rate (cosine annealed)"),
    ("--min-lr", "min_lr", float, "learning rate at the last epoch"),
    ("--batch-size", "batch_size", int, "coordinates per step"),
    ("--seed", "seed", int, "seed for init and sampling"),
    ("--layers", "n_layers", int, "number of flow layers"),
    ("--stride", "stride", int, "train on every STRIDE-th pixel in x and y"),
    ("--frame-stride", "frame_stride", int, "train on every FRAME_STRIDE-th frame"),
    ("--lam", "lam", float, "weight of the squared error term"),
    ("--gamma", "gamma", float, "weight of the per-layer losses"),
    ("--weight-decay", "weight_decay", float, "AdamW decoupled weight decay"),
    ("--beta1", "beta1", float, "AdamW first-moment decay"),
    ("--beta2", "beta2", float, "AdamW second-moment decay"),
    ("--eps", "eps", float, "AdamW epsilon"),
    ("--checkpoint-every", "checkpoint_every", int, "checkpoint period in epochs (0 = off)"),
]
_WEIGHT_FLAGS = [
    ("--w-laplacian", "laplacian", float, "Laplacian magnitude coefficient"),
    ("--w-canny", "canny", float, "Canny edge coefficient"),
    ("--w-temporal", "temporal", float, "temporal variance coefficient"),
    ("--w-bias", "bias", float, "constant weight added everywhere"),
    ("--canny-sigma", "canny_sigma", float, "Gaussian sigma before Canny"),
    ("--canny-low", "canny_low_pct", float, "Canny low threshold percentile"),
    ("--canny-high", "canny_high_pct", float, "Canny high threshold percentile"),
    ("--temporal-radius", "temporal_radius", int, "frames on each side for temporal variance"),
]


def build_parser() -> argparse.ArgumentParser:
    p = make_parser("encode", "Train a model on a video and write a .cfv bitstream.")
    p.add_argument("input", help="frame directory or raw .rgb file")
    p.add_argument("-o", "--output", required=True, help="bitstream path (.cfv)")
    p.add_argument("--config", default=None, help="JSON or key=value training config")
    p.add_argument("--metrics", default=None, help="metrics CSV (default: <output>.metrics.csv)")
    p.add_argument("--log", default=None, help="JSONL run log")
    p.add_argument("--model-out", default=None, help="also write the unquantized model (.cfm)")
    p.add_argument("--weight-map-dir", default=None, help="export the loss weight map as PNGs")
    p.add_argument("--checkpoint-dir", default=None, help="directory for training checkpoints")
    p.add_argument("--resume", default=None, help="checkpoint file or directory to resume from")
    p.add_argument("--fps", type=float, default=None, help="fps of the input (default: 30 or sidecar)")

    defaults = TrainConfig()
    p.add_argument("--preset", dest="preset", choices=["tiny", "S", "M", "L"],
                   default=defaults.preset, help="architecture preset")
    p.add_argument("--ablation", dest="ablation", choices=list(ABLATIONS),
                   default=defaults.ablation, help="full model or a matched-budget ablation")
    for flag, dest, typ, text in _TRAIN_FLAGS:
        p.add_argument(flag, dest=dest, type=typ, default=getattr(defaults, dest), help=text)
    w = WeightCoefficients()
    for flag, name, typ, text in _WEIGHT_FLAGS:
        p.add_argument(flag, dest=f"weights.{name}", type=typ, default=getattr(w, name), help=text)
    return p


def _config_keys() -> List[str]:
    return (["preset", "ablation"] + [d for _, d, _, _ in _TRAIN_FLAGS]
            + [f"weights.{n}" for _, n, _, _ in _WEIGHT_FLAGS])


def parse(args: List[str]) -> argparse.Namespace:
    """Parse with config-file values as defaults (flags win)."""
    parser = build_parser()
    pre, _ = parser.parse_known_args(args)
    if pre.config:
        parser.set_defaults(**load_config_file(pre.config))
    return parser.parse_args(args)


def config_from_args(ns: argparse.Namespace) -> TrainConfig:
    flat: Dict[str, Any] = {k: getattr(ns, k) for k in _config_keys()}
    flat["checkpoint_dir"] = ns.checkpoint_dir
    return TrainConfig.from_dict(flat)


def main(args: List[str]) -> int:
    try:
        ns = parse(args)
    except FlowCodecError as e:
        return error(str(e))
    try:
        cfg = config_from_args(ns)
        video = load_video(ns.input, fps=ns.fps)
        out = Path(ns.output)
        metrics_path = Path(ns.metrics) if ns.metrics else out.with_suffix(".metrics.csv")
        run_log = RunLog(ns.log)

        result = train(video, cfg, run_log=run_log, metrics=MetricsTrack(metrics_path),
                       resume=ns.resume)
        if ns.weight_map_dir and result.weight_map is not None:
            export_weight_map(result.weight_map, ns.weight_map_dir)
        if ns.model_out:
            save_model(result.model, ns.model_out)

        stream = pack(result.model)
        nbytes = write_bitstream(stream, out)
        raw_psnr = evaluate_psnr(result.model, video)
        quant_psnr = evaluate_psnr(unpack(stream), video)
    except (FlowCodecError, OSError) as e:
        return error(str(e))

    emit({
        "output": str(out),
        "bytes": nbytes,
        "bpp": bpp(nbytes, video.width, video.height, video.n_frames),
        "psnr": raw_psnr,
        "quantized_psnr": quant_psnr,
        "params": result.model.num_params(),
        "layers": result.model.n_layers,
        "metrics": str(metrics_path),
    }, ns.json)
    return 0
