"""Positional encoding.

Band k contributes ``[sin(f_k·π·v), cos(f_k·π·v)]`` with ``f_k = base·2^k``,
evaluated as one matmul plus a phase: ``sin(v·F + φ)`` where ``F`` repeats
each ``f_k·π`` twice and ``φ`` alternates ``[0, π/2]``. The scalar API and the
differentiable tensor API share this implementation.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass
from typing import Any, Dict

import numpy as np

from .._errors import ConfigError
from ..numerics import Tensor, no_grad, ops


@dataclass(frozen=True)
class PeConfig:
    num_bands: int
    include_input: bool = True
    base_frequency: float = 1.0

    def __post_init__(self):
        if self.num_bands < 0:
            raise ConfigError(f"num_bands must be >= 0, got {self.num_bands}")

    @property
    def out_dim(self) -> int:
        """Encoded width per input scalar: ``2L (+1 with include_input)``."""
        return 2 * self.num_bands + int(self.include_input)

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)

    @classmethod
    def from_dict(cls, d: Dict[str, Any]) -> "PeConfig":
        return cls(num_bands=int(d["num_bands"]), include_input=bool(d["include_input"]),
                   base_frequency=float(d["base_frequency"]))


def _bands(cfg: PeConfig, dtype) -> tuple[np.ndarray, np.ndarray]:
    k = np.arange(cfg.num_bands, dtype=np.float64)
    freq = np.repeat(cfg.base_frequency * (2.0 ** k) * math.pi, 2)
    phase = np.tile([0.0, math.pi / 2], cfg.num_bands)
    return freq.reshape(1, -1).astype(dtype), phase.astype(dtype)


def encode(v: Tensor, cfg: PeConfig) -> Tensor:
    """Encode a column ``(N, 1)`` into ``(N, cfg.out_dim)``; differentiable in ``v``."""
    if v.ndim != 2 or v.shape[1] != 1:
        raise ConfigError(f"encode expects an (N, 1) column, got {v.shape}")
    parts = [v] if cfg.include_input else []
    if cfg.num_bands:
        freq, phase = _bands(cfg, v.dtype)
        parts.append(ops.sin(ops.add(ops.matmul(v, Tensor(freq, dtype=v.dtype)),
                                     Tensor(phase, dtype=v.dtype))))
    if not parts:
        return Tensor(np.zeros((v.shape[0], 0)), dtype=v.dtype)
    return parts[0] if len(parts) == 1 else ops.concat(parts, axis=-1)


def positional_encode(v: Any, cfg: PeConfig) -> np.ndarray:
    """Encode a scalar (or array of scalars) into ``(..., cfg.out_dim)``."""
    arr = np.asarray(v, dtype=np.float64)
    with no_grad():
        out = encode(Tensor(arr.reshape(-1, 1)), cfg).data
    return out.reshape(arr.shape + (cfg.out_dim,))
