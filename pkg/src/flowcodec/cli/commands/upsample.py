"""
flowcodec upsample: render on a denser pixel grid and/or interpolate frames.

Usage:
    flowcodec upsample clip.cfv -o big/ --scale 4
    flowcodec upsample clip.cfv -o smooth/ --time-scale 2
"""

from __future__ import annotations

import argparse
from typing import List

from ..._errors import FlowCodecError
from ...apps import upsample
from ...media import save_video
from .._common import emit, error, load_any_model, make_parser


def build_parser() -> argparse.ArgumentParser:
    p = make_parser("upsample", "Spatial and/or temporal upsampling of a trained model.")
    p.add_argument("model", help="bitstream (.cfv) or model file (.cfm)")
    p.add_argument("-o", "--output", required=True, help="frame directory, or a .rgb file")
    p.add_argument("--scale", type=int, default=2, help="spatial factor")
    p.add_argument("--time-scale", type=int, default=1, help="temporal factor: (T-1)*k+1 frames")
    return p


def main(args: List[str]) -> int:
    ns = build_parser().parse_args(args)
    try:
        model, _ = load_any_model(ns.model)
        frames = upsample(model, ns.scale, ns.time_scale)
        save_video(frames, ns.output, fps=model.fps * ns.time_scale)
    except (FlowCodecError, OSError) as e:
        return error(str(e))

    emit({"output": ns.output, "frames": int(frames.shape[0]),
          "resolution": f"{frames.shape[2]}x{frames.shape[1]}"}, ns.json)
    return 0
