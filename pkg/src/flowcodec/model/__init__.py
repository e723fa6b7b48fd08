"""Flow-compensated layered coordinate networks."""

from ._io import (
    MODEL_MAGIC,
    load_model,
    model_from_bytes,
    model_from_metadata,
    model_metadata,
    model_to_bytes,
    save_model,
)
from ._layer import (
    CompositeOutput,
    FlowLayer,
    FlowModel,
    LayerOutput,
    SimilarityTransform,
    coefficients_from_params,
    composite_forward,
    flow_transform,
    is_similarity,
    layer_forward,
    normalize_coords,
)
from ._nets import MLP, ColorNet, FlowNet, Linear, mlp_param_count
from ._pe import PeConfig, encode, positional_encode
from ._presets import PRESETS, ModelSpec, build_model, make_preset, preset_spec

__all__ = [
    "PeConfig", "encode", "positional_encode",
    "Linear", "MLP", "FlowNet", "ColorNet", "mlp_param_count",
    "FlowLayer", "FlowModel", "LayerOutput", "CompositeOutput", "SimilarityTransform",
    "normalize_coords", "coefficients_from_params", "is_similarity",
    "layer_forward", "composite_forward", "flow_transform",
    "ModelSpec", "PRESETS", "preset_spec", "build_model", "make_preset",
    "MODEL_MAGIC", "model_metadata", "model_from_metadata",
    "model_to_bytes", "model_from_bytes", "save_model", "load_model",
]
