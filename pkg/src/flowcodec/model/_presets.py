"""Architecture presets.

| preset | color hidden | flow hidden | PE spatial/temporal/flow | 2-layer params |
|--------|--------------|-------------|--------------------------|----------------|
| tiny   | 96 × 4       | 32 × 2      | 6 / 4 / 3                | ≈ 66K          |
| S      | 500 × 7      | 112 × 3     | 10 / 6 / 4               | ≈ 3.12M        |
| M      | 700 × 7      | 160 × 3     | 10 / 6 / 4               | ≈ 6.08M        |
| L      | 1020 × 7     | 160 × 3     | 10 / 6 / 4               | ≈ 12.73M       |

The flow net stays under 2% of every preset. ``param_budget`` widens the color
net until the whole model reaches the budget, which is how single-layer
ablations are matched against multi-layer models.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Any, Dict, Optional, Tuple

import numpy as np

from .._errors import ConfigError
from ._layer import FlowLayer, FlowModel
from ._nets import ColorNet, FlowNet, mlp_param_count
from ._pe import PeConfig


@dataclass(frozen=True)
class ModelSpec:
    """Serializable architecture of a model."""

    preset: str
    n_layers: int
    color_hidden: Tuple[int, ...]
    flow_hidden: Tuple[int, ...]
    spatial_pe: PeConfig
    temporal_pe: PeConfig
    flow_pe: PeConfig
    flow_frozen: bool = False

    def __post_init__(self):
        if self.n_layers < 1:
            raise ConfigError(f"n_layers must be >= 1, got {self.n_layers}")

    def layer_param_counts(self) -> Tuple[int, int]:
        """``(flow, color)`` parameter count of one layer."""
        color_in = 2 * self.spatial_pe.out_dim + self.temporal_pe.out_dim
        return (mlp_param_count(self.flow_pe.out_dim, self.flow_hidden, 4),
                mlp_param_count(color_in, self.color_hidden, 4))

    def param_count(self) -> int:
        return self.n_layers * sum(self.layer_param_counts())

    def to_dict(self) -> Dict[str, Any]:
        return {
            "preset": self.preset,
            "n_layers": self.n_layers,
            "color_hidden": list(self.color_hidden),
            "flow_hidden": list(self.flow_hidden),
            "spatial_pe": self.spatial_pe.to_dict(),
            "temporal_pe": self.temporal_pe.to_dict(),
            "flow_pe": self.flow_pe.to_dict(),
            "flow_frozen": self.flow_frozen,
        }

    @classmethod
    def from_dict(cls, d: Dict[str, Any]) -> "ModelSpec":
        return cls(
            preset=str(d["preset"]),
            n_layers=int(d["n_layers"]),
            color_hidden=tuple(int(w) for w in d["color_hidden"]),
            flow_hidden=tuple(int(w) for w in d["flow_hidden"]),
            spatial_pe=PeConfig.from_dict(d["spatial_pe"]),
            temporal_pe=PeConfig.from_dict(d["temporal_pe"]),
            flow_pe=PeConfig.from_dict(d["flow_pe"]),
            flow_frozen=bool(d.get("flow_frozen", False)),
        )


@dataclass(frozen=True)
class _Preset:
    color_width: int
    color_depth: int
    flow_hidden: Tuple[int, ...]
    spatial_bands: int
    temporal_bands: int
    flow_bands: int


PRESETS: Dict[str, _Preset] = {
    "tiny": _Preset(96, 4, (32, 32), 6, 4, 3),
    "S": _Preset(500, 7, (112, 112, 112), 10, 6, 4),
    "M": _Preset(700, 7, (160, 160, 160), 10, 6, 4),
    "L": _Preset(1020, 7, (160, 160, 160), 10, 6, 4),
}


def preset_spec(name: str, n_layers: int = 2, *, param_budget: Optional[int] = None,
                flow_frozen: bool = False) -> ModelSpec:
    """The :class:`ModelSpec` for a named preset, optionally widened to a budget."""
    try:
        p = PRESETS[name]
    except KeyError:
        raise ConfigError(
            f"unknown preset '{name}'; choose one of {', '.join(PRESETS)}"
        ) from None
    spec = ModelSpec(
        preset=name,
        n_layers=n_layers,
        color_hidden=(p.color_width,) * p.color_depth,
        flow_hidden=p.flow_hidden,
        spatial_pe=PeConfig(p.spatial_bands),
        temporal_pe=PeConfig(p.temporal_bands),
        flow_pe=PeConfig(p.flow_bands),
        flow_frozen=flow_frozen,
    )
    if param_budget is None or spec.param_count() >= param_budget:
        return spec
    # widest color net that still fits the budget
    width = p.color_width
    while True:
        wider = replace(spec, color_hidden=(width + 1,) * p.color_depth)
        if wider.param_count() > param_budget:
            break
        spec, width = wider, width + 1
    return spec


def build_model(spec: ModelSpec, *, seed: int = 0, width: int = 1, height: int = 1,
                frames: int = 1, fps: float = 30.0) -> FlowModel:
    """Fresh weights for ``spec``. Layers draw from ``default_rng([seed, 0])`` in order."""
    rng = np.random.default_rng([seed, 0])
    layers = []
    for _ in range(spec.n_layers):
        flow = FlowNet(spec.flow_pe, spec.flow_hidden, rng)
        color = ColorNet(spec.spatial_pe, spec.temporal_pe, spec.color_hidden, rng)
        layers.append(FlowLayer(flow, color, flow_frozen=spec.flow_frozen))
    return FlowModel(layers, spec, width=width, height=height, frames=frames, fps=fps)


def make_preset(name: str, n_layers: int = 2, *, seed: int = 0,
                param_budget: Optional[int] = None, flow_frozen: bool = False,
                width: int = 1, height: int = 1, frames: int = 1,
                fps: float = 30.0) -> FlowModel:
    """Build a fresh model from a named preset.

    Raises:
        ConfigError: unknown preset name or ``n_layers < 1``.
    """
    spec = preset_spec(name, n_layers, param_budget=param_budget, flow_frozen=flow_frozen)
    return build_model(spec, seed=seed, width=width, height=height, frames=frames, fps=fps)
