"""Linear layers, ReLU MLPs, and the two per-layer networks.

``FlowNet`` maps encoded time to ``(s_raw, θ, Δx, Δy)``; its last linear is
zero-initialized so a fresh network emits the identity transform.
``ColorNet`` maps encoded ``(x′, y′, t)`` to sigmoid RGB plus a raw α logit.
"""

from __future__ import annotations

from typing import List, Optional, Sequence, Tuple

import numpy as np

from .._errors import ConfigError
from ..numerics import Tensor, default_dtype, no_grad, ops
from ._pe import PeConfig, encode


class Linear:
    """``y = x @ W + b`` with ``W`` of shape ``(in, out)``.

    Init is uniform in ``±1/sqrt(in)`` for both weight and bias; ``zero=True``
    starts both at exactly 0.
    """

    def __init__(self, in_dim: int, out_dim: int, rng: np.random.Generator, *, zero: bool = False):
        if in_dim < 1 or out_dim < 1:
            raise ConfigError(f"linear layer needs positive dims, got {in_dim}x{out_dim}")
        dtype = default_dtype()
        if zero:
            w = np.zeros((in_dim, out_dim))
            b = np.zeros(out_dim)
        else:
            bound = 1.0 / np.sqrt(in_dim)
            w = rng.uniform(-bound, bound, size=(in_dim, out_dim))
            b = rng.uniform(-bound, bound, size=out_dim)
        self.weight = Tensor(w, requires_grad=True, dtype=dtype)
        self.bias = Tensor(b, requires_grad=True, dtype=dtype)

    def __call__(self, x: Tensor) -> Tensor:
        return ops.add(ops.matmul(x, self.weight), self.bias)

    def parameters(self) -> List[Tensor]:
        return [self.weight, self.bias]


class MLP:
    """Linear layers with ReLU between them (none after the last)."""

    def __init__(self, in_dim: int, hidden: Sequence[int], out_dim: int,
                 rng: np.random.Generator, *, zero_last: bool = False):
        dims = [in_dim, *hidden, out_dim]
        self.layers = [
            Linear(dims[i], dims[i + 1], rng, zero=zero_last and i == len(dims) - 2)
            for i in range(len(dims) - 1)
        ]

    def __call__(self, x: Tensor) -> Tensor:
        for layer in self.layers[:-1]:
            x = ops.relu(layer(x))
        return self.layers[-1](x)

    def parameters(self) -> List[Tensor]:
        return [p for layer in self.layers for p in layer.parameters()]


def mlp_param_count(in_dim: int, hidden: Sequence[int], out_dim: int) -> int:
    dims = [in_dim, *hidden, out_dim]
    return sum(dims[i] * dims[i + 1] + dims[i + 1] for i in range(len(dims) - 1))


class FlowNet:
    def __init__(self, pe: PeConfig, hidden: Sequence[int], rng: np.random.Generator):
        if pe.out_dim < 1:
            raise ConfigError("flow PE must produce at least one feature")
        self.pe = pe
        self.hidden = tuple(hidden)
        self.mlp = MLP(pe.out_dim, hidden, 4, rng, zero_last=True)

    def __call__(self, t: Tensor) -> Tensor:
        """``(U, 1)`` normalized times → ``(U, 4)`` rows of ``(s_raw, θ, Δx, Δy)``."""
        return self.mlp(encode(t, self.pe))

    def parameters(self) -> List[Tensor]:
        return self.mlp.parameters()


class ColorNet:
    def __init__(self, spatial_pe: PeConfig, temporal_pe: PeConfig, hidden: Sequence[int],
                 rng: np.random.Generator):
        in_dim = 2 * spatial_pe.out_dim + temporal_pe.out_dim
        if in_dim < 1:
            raise ConfigError("color PE must produce at least one feature")
        self.spatial_pe = spatial_pe
        self.temporal_pe = temporal_pe
        self.hidden = tuple(hidden)
        self.mlp = MLP(in_dim, hidden, 4, rng)

    @property
    def in_dim(self) -> int:
        return 2 * self.spatial_pe.out_dim + self.temporal_pe.out_dim

    def __call__(self, xp: Tensor, yp: Tensor, t_features: Tensor) -> Tuple[Tensor, Tensor]:
        """Warped coords ``(N, 1)`` twice plus pre-encoded time ``(N, dt)`` →
        ``(rgb (N, 3), alpha_logit (N, 1))``."""
        feats = ops.concat([encode(xp, self.spatial_pe), encode(yp, self.spatial_pe), t_features])
        out = self.mlp(feats)
        return ops.sigmoid(ops.columns(out, 0, 3)), ops.columns(out, 3, 4)

    def parameters(self) -> List[Tensor]:
        return self.mlp.parameters()


def encode_times(t: np.ndarray, pe: PeConfig, dtype: Optional[type] = None) -> np.ndarray:
    """Constant time features for the color net (times never need grad)."""
    with no_grad():
        return encode(Tensor(np.asarray(t).reshape(-1, 1), dtype=dtype), pe).data
