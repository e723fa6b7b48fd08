"""
flowcodec eval: PSNR of a model against a reference video.

Usage:
    flowcodec eval clip.cfv --video frames/ [--stride 4] [--frame-stride 2]
"""

from __future__ import annotations

import argparse
from pathlib import Path
from typing import List

from ..._errors import ConfigError, FlowCodecError
from ...codec import bpp
from ...media import load_video
from ...trainer import evaluate_psnr
from .._common import emit, error, load_any_model, make_parser


def build_parser() -> argparse.ArgumentParser:
    p = make_parser("eval", "PSNR of a bitstream or model against a reference video.")
    p.add_argument("model", help="bitstream (.cfv) or model file (.cfm)")
    p.add_argument("--video", required=True, help="reference frame directory or .rgb file")
    p.add_argument("--stride", type=int, default=1, help="score every STRIDE-th pixel only")
    p.add_argument("--frame-stride", type=int, default=1, help="score every FRAME_STRIDE-th frame only")
    return p


def main(args: List[str]) -> int:
    ns = build_parser().parse_args(args)
    try:
        model, kind = load_any_model(ns.model)
        video = load_video(ns.video)
        if (video.width, video.height, video.n_frames) != (model.width, model.height, model.frames):
            raise ConfigError(
                f"reference is {video.width}x{video.height}x{video.n_frames}, model was fit to "
                f"{model.width}x{model.height}x{model.frames}"
            )
        score = evaluate_psnr(model, video, ns.stride, ns.frame_stride)
    except (FlowCodecError, OSError) as e:
        return error(str(e))

    result = {"input": kind, "psnr": score, "stride": ns.stride, "frame_stride": ns.frame_stride}
    if kind == "bitstream":
        result["bpp"] = bpp(Path(ns.model).stat().st_size, model.width, model.height, model.frames)
    emit(result, ns.json)
    return 0
