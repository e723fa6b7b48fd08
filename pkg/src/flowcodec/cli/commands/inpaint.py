"""
flowcodec inpaint: render one layer alone (e.g. the background with the
foreground removed).

Usage:
    flowcodec inpaint clip.cfv --layer 0 -o background/
"""

from __future__ import annotations

import argparse
from typing import List

from ..._errors import FlowCodecError
from ...apps import inpaint
from ...media import save_video
from .._common import add_render_args, emit, error, load_any_model, make_parser, parse_resolution, parse_times


def build_parser() -> argparse.ArgumentParser:
    p = make_parser("inpaint", "Render a single layer without compositing.")
    p.add_argument("model", help="bitstream (.cfv) or model file (.cfm)")
    p.add_argument("-o", "--output", required=True, help="frame directory, or a .rgb file")
    p.add_argument("--layer", type=int, default=0, help="layer index to render")
    add_render_args(p)
    return p


def main(args: List[str]) -> int:
    ns = build_parser().parse_args(args)
    try:
        model, _ = load_any_model(ns.model)
        frames = inpaint(model, ns.layer, parse_times(ns.times), parse_resolution(ns.resolution))
        save_video(frames, ns.output, fps=ns.fps or model.fps)
    except (FlowCodecError, OSError) as e:
        return error(str(e))

    emit({"output": ns.output, "layer": ns.layer, "frames": int(frames.shape[0])}, ns.json)
    return 0
