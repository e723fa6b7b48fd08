"""Flow layers, the n-layer model, and the forward passes.

A layer warps input coordinates with its per-frame similarity transform and
evaluates its color net at the warped position:

    x′ = s·cosθ·x − s·sinθ·y + Δx
    y′ = s·sinθ·x + s·cosθ·y + Δy

The model blends per-layer RGB with softmax-normalized α logits.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterator, List, Optional, Sequence, Tuple

import numpy as np

from .._errors import ConfigError, NumericError, ShapeError
from ..numerics import Tensor, as_tensor, no_grad, ops
from ._nets import ColorNet, FlowNet, encode_times


def normalize_coords(p: np.ndarray, dim: int) -> np.ndarray:
    """Pixel (or frame) index → ``[-1, 1]``; a size-1 axis maps to 0."""
    p = np.asarray(p, dtype=np.float64)
    if dim <= 1:
        return np.zeros_like(p)
    return 2.0 * p / (dim - 1) - 1.0


@dataclass(frozen=True)
class SimilarityTransform:
    """Scale + rotation + translation, ``s = exp(s_raw)``."""

    s_raw: float
    theta: float
    dx: float
    dy: float

    @classmethod
    def identity(cls) -> "SimilarityTransform":
        return cls(0.0, 0.0, 0.0, 0.0)

    @classmethod
    def from_scale(cls, s: float, theta: float, dx: float, dy: float) -> "SimilarityTransform":
        if s <= 0:
            raise ConfigError(f"similarity scale must be > 0, got {s}")
        return cls(math.log(s), theta, dx, dy)

    @property
    def s(self) -> float:
        return math.exp(self.s_raw)

    @property
    def matrix(self) -> np.ndarray:
        """``[[s·cosθ, −s·sinθ, Δx], [s·sinθ, s·cosθ, Δy]]``."""
        s, c, n = self.s, math.cos(self.theta), math.sin(self.theta)
        return np.array([[s * c, -s * n, self.dx], [s * n, s * c, self.dy]])

    def apply(self, x, y) -> Tuple[np.ndarray, np.ndarray]:
        m = self.matrix
        x = np.asarray(x, dtype=np.float64)
        y = np.asarray(y, dtype=np.float64)
        return m[0, 0] * x + m[0, 1] * y + m[0, 2], m[1, 0] * x + m[1, 1] * y + m[1, 2]


def is_similarity(matrix: np.ndarray, atol: float = 1e-9) -> bool:
    """Equal diagonals, opposite off-diagonals, positive determinant."""
    m = np.asarray(matrix, dtype=np.float64)
    return (m.shape == (2, 3)
            and abs(m[0, 0] - m[1, 1]) <= atol
            and abs(m[0, 1] + m[1, 0]) <= atol
            and m[0, 0] * m[1, 1] - m[0, 1] * m[1, 0] > 0)


def coefficients_from_params(params: np.ndarray) -> np.ndarray:
    """``(U, 4)`` rows of ``(s_raw, θ, Δx, Δy)`` → ``(s·cosθ, s·sinθ, Δx, Δy)``.

    Mirrors :meth:`FlowLayer.warp_coefficients` op for op, so identical
    parameters give bit-identical coefficients."""
    p = np.asarray(params)
    s = np.exp(p[:, 0:1])
    a = s * np.cos(p[:, 1:2])
    b = s * np.sin(p[:, 1:2])
    return np.concatenate([a, b, p[:, 2:4]], axis=-1)


class FlowLayer:
    """FlowNet + ColorNet. With ``flow_frozen`` the warp is the identity and
    the flow parameters never join the tape."""

    def __init__(self, flow: FlowNet, color: ColorNet, *, flow_frozen: bool = False):
        self.flow = flow
        self.color = color
        self.flow_frozen = flow_frozen
        if flow_frozen:
            for p in flow.parameters():
                p.requires_grad = False

    def parameters(self) -> List[Tensor]:
        """Trainable parameters."""
        flow = [] if self.flow_frozen else self.flow.parameters()
        return flow + self.color.parameters()

    def flow_params(self, t_unique: np.ndarray) -> Tensor:
        """``(U, 4)`` raw flow outputs ``(s_raw, θ, Δx, Δy)`` per time."""
        t = Tensor(np.asarray(t_unique).reshape(-1, 1))
        if self.flow_frozen:
            return Tensor(np.zeros((t.shape[0], 4)))
        return self.flow(t)

    def warp_coefficients(self, t_unique: np.ndarray) -> Tensor:
        out = self.flow_params(t_unique)
        s = ops.exp(ops.columns(out, 0, 1))
        theta = ops.columns(out, 1, 2)
        a = ops.mul(s, ops.cos(theta))
        b = ops.mul(s, ops.sin(theta))
        return ops.concat([a, b, ops.columns(out, 2, 4)])


@dataclass
class LayerOutput:
    rgb: Tensor    # (N, 3) in [0, 1]
    alpha: Tensor  # (N, 1) raw logit


@dataclass
class CompositeOutput:
    rgb: Tensor              # (N, 3)
    layer_rgb: List[Tensor]  # n × (N, 3)
    weights: Tensor          # (N, n) softmax of logits
    logits: Tensor           # (N, n)


def _columns(x, y, t) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    x = np.asarray(x, dtype=np.float64).reshape(-1)
    y = np.asarray(y, dtype=np.float64).reshape(-1)
    t = np.asarray(t, dtype=np.float64).reshape(-1)
    if not (x.shape == y.shape == t.shape):
        raise ConfigError(f"coordinate arrays differ in length: x{x.shape} y{y.shape} t{t.shape}")
    return x, y, t


def layer_forward(layer: FlowLayer, x, y, t, *,
                  coefficients: Optional[np.ndarray] = None) -> LayerOutput:
    """Evaluate one layer at normalized coordinates.

    ``coefficients`` replaces the flow output: ``(U, 4)`` rows of
    ``(s·cosθ, s·sinθ, Δx, Δy)`` aligned with ``np.unique(t)``. Stabilization
    uses it to feed a smoothed trajectory.
    """
    x, y, t = _columns(x, y, t)
    t_unique, inverse = np.unique(t, return_inverse=True)
    X = Tensor(x.reshape(-1, 1))
    Y = Tensor(y.reshape(-1, 1))
    if coefficients is None and layer.flow_frozen:
        xp, yp = X, Y
    else:
        if coefficients is None:
            coef = layer.warp_coefficients(t_unique)
        else:
            coef = as_tensor(coefficients)
            if coef.shape != (t_unique.size, 4):
                raise ConfigError(
                    f"coefficients must be ({t_unique.size}, 4) for the unique times, got {coef.shape}"
                )
        per = ops.take_rows(coef, inverse)
        a, b = ops.columns(per, 0, 1), ops.columns(per, 1, 2)
        dx, dy = ops.columns(per, 2, 3), ops.columns(per, 3, 4)
        xp = ops.add(ops.sub(ops.mul(a, X), ops.mul(b, Y)), dx)
        yp = ops.add(ops.add(ops.mul(b, X), ops.mul(a, Y)), dy)
    t_feat = Tensor(encode_times(t_unique, layer.color.temporal_pe)[inverse])
    rgb, alpha = layer.color(xp, yp, t_feat)
    return LayerOutput(rgb=rgb, alpha=alpha)


def flow_transform(layer: FlowLayer, t: float) -> SimilarityTransform:
    """The layer's similarity transform at normalized time ``t``.

    Raises:
        NumericError: the flow net produced a non-finite value.
    """
    with no_grad():
        out = layer.flow_params(np.array([float(t)])).data[0]
    if not np.all(np.isfinite(out)):
        raise NumericError(f"flow net produced non-finite output {out.tolist()} at t={t}")
    return SimilarityTransform(float(out[0]), float(out[1]), float(out[2]), float(out[3]))


class FlowModel:
    """n parallel flow layers fit to a ``width × height × frames`` video."""

    def __init__(self, layers: Sequence[FlowLayer], spec, *, width: int = 1, height: int = 1,
                 frames: int = 1, fps: float = 30.0):
        if not layers:
            raise ConfigError("a model needs at least one layer")
        self.layers = list(layers)
        self.spec = spec
        self.width = int(width)
        self.height = int(height)
        self.frames = int(frames)
        self.fps = float(fps)

    @property
    def n_layers(self) -> int:
        return len(self.layers)

    def parameters(self) -> List[Tensor]:
        return [p for layer in self.layers for p in layer.parameters()]

    def named_tensors(self) -> Iterator[Tuple[str, Tensor, str]]:
        """Every weight in file order: per layer, flow linears then color
        linears, weight before bias. Yields ``(name, tensor, component)``."""
        for i, layer in enumerate(self.layers):
            for component, mlp in (("flow", layer.flow.mlp), ("color", layer.color.mlp)):
                for j, lin in enumerate(mlp.layers):
                    yield f"layers.{i}.{component}.{j}.weight", lin.weight, component
                    yield f"layers.{i}.{component}.{j}.bias", lin.bias, component

    def num_params(self) -> int:
        return sum(t.size for _, t, _ in self.named_tensors())

    def flow_param_count(self) -> int:
        return sum(t.size for _, t, c in self.named_tensors() if c == "flow")

    def color_param_count(self) -> int:
        return sum(t.size for _, t, c in self.named_tensors() if c == "color")

    def color_share(self) -> float:
        return self.color_param_count() / self.num_params()

    def time_of_frame(self, k) -> np.ndarray:
        return normalize_coords(k, self.frames)

    def __repr__(self) -> str:
        return (f"FlowModel(preset={self.spec.preset!r}, layers={self.n_layers}, "
                f"params={self.num_params():,}, dims={self.width}x{self.height}x{self.frames})")


def composite_forward(model: FlowModel, x, y, t, *,
                      coefficients: Optional[Sequence[Optional[np.ndarray]]] = None
                      ) -> CompositeOutput:
    """Blend every layer: ``Σ_i softmax(α)_i · RGB_i``. Also returns the per-layer
    RGB and softmax weights for the loss and segmentation.

    Raises:
        ShapeError: ``coefficients`` does not have one entry per layer.
    """
    x, y, t = _columns(x, y, t)
    coefficients = list(coefficients) if coefficients is not None else [None] * model.n_layers
    if len(coefficients) != model.n_layers:
        raise ShapeError(
            f"composite_forward: got {len(coefficients)} coefficient entries for {model.n_layers} layers"
        )
    outs = [layer_forward(layer, x, y, t, coefficients=c)
            for layer, c in zip(model.layers, coefficients)]
    logits = ops.concat([o.alpha for o in outs], axis=-1)
    weights = ops.softmax(logits)
    rgb = ops.mul(ops.columns(weights, 0, 1), outs[0].rgb)
    for i in range(1, len(outs)):
        rgb = ops.add(rgb, ops.mul(ops.columns(weights, i, i + 1), outs[i].rgb))
    return CompositeOutput(rgb=rgb, layer_rgb=[o.rgb for o in outs], weights=weights, logits=logits)
