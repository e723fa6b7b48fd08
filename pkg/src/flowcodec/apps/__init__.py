"""Products of a trained model: rendering, upsampling, segmentation,
inpainting and stabilization, plus classical baselines."""

from ._baselines import bilinear_upsample, estimate_shifts, nearest_frame
from ._render import (
    CHUNK,
    SegmentationMap,
    frame_times,
    inpaint,
    layer_frames,
    pixel_grid,
    render,
    render_canonical,
    segment,
    upsample,
)
from ._trajectory import SMOOTHING_KINDS, Trajectory, extract_trajectory, smooth_trajectory, stabilize
from ._writers import TRAJECTORY_COLUMNS, save_segmentation, save_trajectory_csv

__all__ = [
    "render", "upsample", "segment", "inpaint", "render_canonical", "layer_frames",
    "frame_times", "pixel_grid", "SegmentationMap", "CHUNK",
    "Trajectory", "extract_trajectory", "smooth_trajectory", "stabilize", "SMOOTHING_KINDS",
    "bilinear_upsample", "nearest_frame", "estimate_shifts",
    "save_segmentation", "save_trajectory_csv", "TRAJECTORY_COLUMNS",
]
