"""
flowcodec stabilize: re-render with every layer's motion smoothed.

Usage:
    flowcodec stabilize clip.cfv -o steady/ --window 9 [--kind gaussian]
                        [--trajectory-csv traj.csv --layer 0]

Reports the variance of the frame-to-frame translation (phase correlation)
before and after smoothing.
"""

from __future__ import annotations

import argparse
from typing import List

import numpy as np

from ..._errors import FlowCodecError
from ...apps import (
    SMOOTHING_KINDS,
    estimate_shifts,
    extract_trajectory,
    frame_times,
    render,
    save_trajectory_csv,
    smooth_trajectory,
    stabilize,
)
from ...media import save_video
from .._common import add_render_args, emit, error, load_any_model, make_parser, parse_resolution, parse_times


def build_parser() -> argparse.ArgumentParser:
    p = make_parser("stabilize", "Smooth the per-frame similarity trajectories and re-render.")
    p.add_argument("model", help="bitstream (.cfv) or model file (.cfm)")
    p.add_argument("-o", "--output", required=True, help="frame directory, or a .rgb file")
    p.add_argument("--window", type=int, default=5, help="odd smoothing window in frames")
    p.add_argument("--kind", choices=list(SMOOTHING_KINDS), default="box", help="smoothing filter")
    p.add_argument("--sigma", type=float, default=None, help="gaussian sigma (default: window/4)")
    p.add_argument("--trajectory-csv", default=None, help="write the smoothed trajectory of --layer here")
    p.add_argument("--layer", type=int, default=0, help="layer whose trajectory is written")
    add_render_args(p)
    return p


def _jitter(frames: np.ndarray) -> float:
    if frames.shape[0] < 2:
        return 0.0
    return float(np.var(estimate_shifts(frames), axis=0).sum())


def main(args: List[str]) -> int:
    ns = build_parser().parse_args(args)
    try:
        model, _ = load_any_model(ns.model)
        times = parse_times(ns.times)
        if times is None:
            times = frame_times(model.frames)
        resolution = parse_resolution(ns.resolution)
        frames = stabilize(model, ns.window, times, resolution, kind=ns.kind, sigma=ns.sigma)
        # a failed csv write must leave no frames on disk
        if ns.trajectory_csv:
            traj = smooth_trajectory(extract_trajectory(model, ns.layer, times), ns.window,
                                     kind=ns.kind, sigma=ns.sigma)
            save_trajectory_csv(traj, ns.trajectory_csv)
        save_video(frames, ns.output, fps=ns.fps or model.fps)
        before = _jitter(render(model, times, resolution))
        after = _jitter(frames)
    except (FlowCodecError, OSError) as e:
        return error(str(e))

    emit({"output": ns.output, "frames": int(frames.shape[0]), "window": ns.window,
          "jitter_before": before, "jitter_after": after}, ns.json)
    return 0
