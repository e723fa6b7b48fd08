"""
flowcodec info: header, parameter accounting and section sizes.

Usage:
    flowcodec info clip.cfv
    flowcodec info --preset S --layers 2
"""

from __future__ import annotations

import argparse
from typing import Any, Dict, List

from ..._errors import ConfigError, FlowCodecError
from ...codec import bpp, read_bitstream, size_report
from ...model import FlowModel, ModelSpec, preset_spec
from .._common import emit, error, load_any_model, make_parser


def build_parser() -> argparse.ArgumentParser:
    p = make_parser("info", "Describe a bitstream, a model file, or a preset.")
    p.add_argument("model", nargs="?", default=None, help="bitstream (.cfv) or model file (.cfm)")
    p.add_argument("--preset", default=None, choices=["tiny", "S", "M", "L"],
                   help="describe a fresh preset instead of a file")
    p.add_argument("--layers", type=int, default=2, help="layer count for --preset")
    return p


def describe(model: FlowModel) -> Dict[str, Any]:
    spec = model.spec
    return {
        "preset": spec.preset,
        "layers": model.n_layers,
        "flow_frozen": spec.flow_frozen,
        "dims": f"{model.width}x{model.height}x{model.frames}",
        "fps": model.fps,
        "color_hidden": "x".join(str(w) for w in spec.color_hidden),
        "flow_hidden": "x".join(str(w) for w in spec.flow_hidden),
        "params": model.num_params(),
        "flow_params": model.flow_param_count(),
        "color_params": model.color_param_count(),
        "color_share": model.color_share(),
    }


def describe_spec(spec: ModelSpec) -> Dict[str, Any]:
    """Parameter accounting of an architecture, no weights built."""
    flow, color = spec.layer_param_counts()
    total = spec.param_count()
    return {
        "preset": spec.preset,
        "layers": spec.n_layers,
        "color_hidden": "x".join(str(w) for w in spec.color_hidden),
        "flow_hidden": "x".join(str(w) for w in spec.flow_hidden),
        "params": total,
        "flow_params": spec.n_layers * flow,
        "color_params": spec.n_layers * color,
        "color_share": spec.n_layers * color / total,
    }


def main(args: List[str]) -> int:
    ns = build_parser().parse_args(args)
    try:
        if (ns.model is None) == (ns.preset is None):
            raise ConfigError("give either a model file or --preset")
        if ns.preset is not None:
            result = describe_spec(preset_spec(ns.preset, ns.layers))
        else:
            model, kind = load_any_model(ns.model)
            result = {"input": kind, **describe(model)}
            if kind == "bitstream":
                sizes = size_report(read_bitstream(ns.model))
                result["sizes"] = sizes
                result["bpp"] = bpp(sizes["total"], model.width, model.height, model.frames)
    except (FlowCodecError, OSError) as e:
        return error(str(e))

    emit(result, ns.json)
    return 0
