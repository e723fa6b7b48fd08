"""Perceptual loss weighting and the training objective."""

from ._objective import GAMMA, LAMBDA, LossReport, batch_stats, combined_loss, layer_loss, total_loss
from ._weights import (
    WeightCoefficients,
    WeightMap,
    build_weight_map,
    canny_edges,
    export_weight_map,
    laplacian_magnitude,
    temporal_variance,
)

__all__ = [
    "WeightCoefficients", "WeightMap", "build_weight_map", "export_weight_map",
    "laplacian_magnitude", "canny_edges", "temporal_variance",
    "LossReport", "combined_loss", "layer_loss", "total_loss", "batch_stats",
    "LAMBDA", "GAMMA",
]
