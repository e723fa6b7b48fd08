"""
flowcodec segment: per-pixel layer assignment from the softmax layer weights.

Usage:
    flowcodec segment clip.cfv -o seg/

Writes one indexed PNG per frame (palette index = layer) and ``weights.npy``.
"""

from __future__ import annotations

import argparse
from typing import List

import numpy as np

from ..._errors import FlowCodecError
from ...apps import save_segmentation, segment
from ...log import RunLog
from .._common import add_render_args, emit, error, load_any_model, make_parser, parse_resolution, parse_times


def build_parser() -> argparse.ArgumentParser:
    p = make_parser("segment", "Segmentation maps from a trained model.")
    p.add_argument("model", help="bitstream (.cfv) or model file (.cfm)")
    p.add_argument("-o", "--output", required=True, help="output directory")
    add_render_args(p)
    return p


def main(args: List[str]) -> int:
    ns = build_parser().parse_args(args)
    try:
        model, _ = load_any_model(ns.model)
        seg = segment(model, parse_times(ns.times), parse_resolution(ns.resolution), run_log=RunLog())
        save_segmentation(seg, ns.output)
    except (FlowCodecError, OSError) as e:
        return error(str(e))

    share = np.bincount(seg.index.reshape(-1), minlength=seg.n_layers) / seg.index.size
    emit({"output": ns.output, "frames": int(seg.index.shape[0]), "layers": seg.n_layers,
          "layer_share": {str(i): float(s) for i, s in enumerate(share)}}, ns.json)
    return 0
