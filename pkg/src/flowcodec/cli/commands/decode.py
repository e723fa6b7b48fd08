"""
flowcodec decode: render frames from a bitstream or model file.

Usage:
    flowcodec decode clip.cfv -o frames/ [--scale 2] [--time-scale 2]
    flowcodec decode clip.cfv -o canon/ --canonical-layer 0 --extent 1.5
"""

from __future__ import annotations

import argparse
from typing import List

import numpy as np

from ..._errors import ConfigError, FlowCodecError
from ...apps import frame_times, render, render_canonical
from ...media import save_video
from .._common import (
    add_render_args,
    emit,
    error,
    load_any_model,
    make_parser,
    parse_resolution,
    parse_times,
    written,
)


def build_parser() -> argparse.ArgumentParser:
    p = make_parser("decode", "Render frames from a .cfv bitstream or .cfm model.")
    p.add_argument("model", help="bitstream (.cfv) or model file (.cfm)")
    p.add_argument("-o", "--output", required=True, help="frame directory, or a .rgb file")
    add_render_args(p)
    p.add_argument("--scale", type=int, default=1, help="spatial upsampling factor")
    p.add_argument("--time-scale", type=int, default=1,
                   help="temporal factor: (T-1)*k+1 frames (ignored with --times)")
    p.add_argument("--canonical-layer", type=int, default=None,
                   help="debug: render this layer's color net with the flow bypassed")
    p.add_argument("--extent", type=float, default=1.5, help="coordinate extent of --canonical-layer")
    return p


def main(args: List[str]) -> int:
    ns = build_parser().parse_args(args)
    try:
        model, kind = load_any_model(ns.model)
        if ns.scale < 1:
            raise ConfigError(f"--scale must be >= 1, got {ns.scale}")
        resolution = parse_resolution(ns.resolution) or (model.width * ns.scale, model.height * ns.scale)
        times = parse_times(ns.times)
        if times is None:
            times = frame_times(model.frames, ns.time_scale)
        if ns.canonical_layer is not None:
            frames = np.stack([render_canonical(model, ns.canonical_layer, float(t), resolution, ns.extent)
                               for t in times])
        else:
            frames = render(model, times, resolution)
        paths = save_video(frames, ns.output, fps=ns.fps or model.fps * ns.time_scale)
    except (FlowCodecError, OSError) as e:
        return error(str(e))

    emit({"input": kind, "output": ns.output, "frames": int(frames.shape[0]),
          "resolution": f"{frames.shape[2]}x{frames.shape[1]}", "files": len(written(paths))}, ns.json)
    return 0
