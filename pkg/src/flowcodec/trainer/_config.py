"""Training configuration."""

from __future__ import annotations

from dataclasses import asdict, dataclass, field, fields
from typing import Any, Dict, Optional

from .._errors import ConfigError
from ..config import flatten_dict, unflatten_dict
from ..loss import GAMMA, LAMBDA, WeightCoefficients
from ..model import PRESETS, ModelSpec, preset_spec

ABLATIONS = ("full", "no_layers", "no_layers_no_flow")


@dataclass
class TrainConfig:
    epochs: int = 53
    base_lr: float = 5e-4
    min_lr: float = 0.0
    batch_size: int = 65536
    seed: int = 0
    preset: str = "tiny"
    n_layers: int = 2
    ablation: str = "full"
    stride: int = 1         # train on every stride-th pixel in x and y
    frame_stride: int = 1   # train on every frame_stride-th frame
    lam: float = LAMBDA
    gamma: float = GAMMA
    weight_decay: float = 0.01
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    weights: WeightCoefficients = field(default_factory=WeightCoefficients)
    checkpoint_every: int = 0
    checkpoint_dir: Optional[str] = None

    def validate(self) -> "TrainConfig":
        if self.epochs < 1:
            raise ConfigError(f"epochs must be >= 1, got {self.epochs}")
        if self.batch_size < 1:
            raise ConfigError(f"batch_size must be >= 1, got {self.batch_size}")
        if self.base_lr <= 0 or not (0 <= self.min_lr <= self.base_lr):
            raise ConfigError(f"need 0 <= min_lr <= base_lr and base_lr > 0, got "
                              f"min_lr={self.min_lr}, base_lr={self.base_lr}")
        if self.preset not in PRESETS:
            raise ConfigError(f"unknown preset '{self.preset}'; choose one of {', '.join(PRESETS)}")
        if self.n_layers < 1:
            raise ConfigError(f"n_layers must be >= 1, got {self.n_layers}")
        if self.ablation not in ABLATIONS:
            raise ConfigError(f"unknown ablation '{self.ablation}'; choose one of {', '.join(ABLATIONS)}")
        if self.stride < 1 or self.frame_stride < 1:
            raise ConfigError(f"stride and frame_stride must be >= 1, got {self.stride}, {self.frame_stride}")
        if self.lam < 0 or self.gamma < 0:
            raise ConfigError(f"lam and gamma must be >= 0, got {self.lam}, {self.gamma}")
        if self.checkpoint_every < 0:
            raise ConfigError(f"checkpoint_every must be >= 0, got {self.checkpoint_every}")
        if self.checkpoint_every and not self.checkpoint_dir:
            raise ConfigError("checkpoint_every needs a checkpoint_dir")
        return self

    def model_spec(self) -> ModelSpec:
        """Architecture for this run. Single-layer ablations get the parameter
        budget of the full ``n_layers`` model."""
        if self.ablation == "full":
            return preset_spec(self.preset, self.n_layers)
        budget = preset_spec(self.preset, self.n_layers).param_count()
        return preset_spec(self.preset, 1, param_budget=budget,
                           flow_frozen=self.ablation == "no_layers_no_flow")

    def to_dict(self) -> Dict[str, Any]:
        d = asdict(self)
        d["weights"] = self.weights.to_dict()
        return d

    @classmethod
    def from_dict(cls, d: Dict[str, Any]) -> "TrainConfig":
        """From a nested or dot-notation dict (``weights.bias`` …). Unknown keys
        raise ``ConfigError``."""
        nested = unflatten_dict(flatten_dict(dict(d)))
        known = {f.name for f in fields(cls)}
        unknown = sorted(set(nested) - known)
        if unknown:
            raise ConfigError(f"unknown training config key(s): {', '.join(unknown)}")
        weights = nested.pop("weights", None) or {}
        w_known = {f.name for f in fields(WeightCoefficients)}
        w_unknown = sorted(set(weights) - w_known)
        if w_unknown:
            raise ConfigError(f"unknown weight key(s): {', '.join('weights.' + k for k in w_unknown)}")
        return cls(weights=WeightCoefficients(**weights), **nested).validate()
