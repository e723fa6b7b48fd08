"""Differentiable ops.

Binary elementwise ops accept equal shapes or one-sided broadcasting, where
one operand (a scalar, a bias row ``(k,)`` or a column ``(N, 1)``) stretches
into the other's shape. The result always has the larger operand's shape;
anything else is a :class:`ShapeError` naming the op and both shapes.
"""

from __future__ import annotations

from typing import Any, Optional, Sequence, Tuple

import numpy as np
from scipy.special import expit

from .._errors import ShapeError
from ._tensor import Tensor, as_tensor, make_result


def _unbroadcast(g: np.ndarray, shape: Tuple[int, ...]) -> np.ndarray:
    """Sum ``g`` back down to ``shape`` (inverse of numpy broadcasting)."""
    if g.shape == shape:
        return g
    lead = g.ndim - len(shape)
    if lead:
        g = g.sum(axis=tuple(range(lead)))
    axes = tuple(i for i, d in enumerate(shape) if d == 1 and g.shape[i] != 1)
    if axes:
        g = g.sum(axis=axes, keepdims=True)
    return g.reshape(shape)


def _binary_shape(op: str, a: Tensor, b: Tensor) -> Tuple[int, ...]:
    if a.shape == b.shape:
        return a.shape
    try:
        out = np.broadcast_shapes(a.shape, b.shape)
    except ValueError:
        raise ShapeError(op, a.shape, b.shape) from None
    if out != a.shape and out != b.shape:
        raise ShapeError(op, a.shape, b.shape, detail="only one operand may broadcast")
    return out


# ─── binary ──────────────────────────────────────────────────────────


def add(a: Any, b: Any) -> Tensor:
    a, b = as_tensor(a), as_tensor(b)
    _binary_shape("add", a, b)

    def bw(g):
        return _unbroadcast(g, a.shape), _unbroadcast(g, b.shape)

    return make_result(a.data + b.data, (a, b), bw, "add")


def sub(a: Any, b: Any) -> Tensor:
    a, b = as_tensor(a), as_tensor(b)
    _binary_shape("sub", a, b)

    def bw(g):
        return _unbroadcast(g, a.shape), _unbroadcast(-g, b.shape)

    return make_result(a.data - b.data, (a, b), bw, "sub")


def mul(a: Any, b: Any) -> Tensor:
    a, b = as_tensor(a), as_tensor(b)
    _binary_shape("mul", a, b)

    def bw(g):
        return _unbroadcast(g * b.data, a.shape), _unbroadcast(g * a.data, b.shape)

    return make_result(a.data * b.data, (a, b), bw, "mul")


def neg(x: Any) -> Tensor:
    x = as_tensor(x)
    return make_result(-x.data, (x,), lambda g: (-g,), "neg")


def matmul(a: Any, b: Any) -> Tensor:
    """2-D matrix product ``(n, k) @ (k, m) -> (n, m)``."""
    a, b = as_tensor(a), as_tensor(b)
    if a.ndim != 2 or b.ndim != 2 or a.shape[1] != b.shape[0]:
        raise ShapeError("matmul", a.shape, b.shape, detail="expects (n, k) @ (k, m)")

    def bw(g):
        return g @ b.data.T, a.data.T @ g

    return make_result(a.data @ b.data, (a, b), bw, "matmul")


# ─── elementwise ─────────────────────────────────────────────────────


def sin(x: Any) -> Tensor:
    x = as_tensor(x)
    return make_result(np.sin(x.data), (x,), lambda g: (g * np.cos(x.data),), "sin")


def cos(x: Any) -> Tensor:
    x = as_tensor(x)
    return make_result(np.cos(x.data), (x,), lambda g: (-g * np.sin(x.data),), "cos")


def exp(x: Any) -> Tensor:
    x = as_tensor(x)
    y = np.exp(x.data)
    return make_result(y, (x,), lambda g: (g * y,), "exp")


def relu(x: Any) -> Tensor:
    x = as_tensor(x)
    mask = x.data > 0
    return make_result(np.where(mask, x.data, 0).astype(x.dtype), (x,),
                       lambda g: (g * mask,), "relu")


def sigmoid(x: Any) -> Tensor:
    x = as_tensor(x)
    y = expit(x.data).astype(x.dtype)
    return make_result(y, (x,), lambda g: (g * y * (1 - y),), "sigmoid")


def abs(x: Any) -> Tensor:  # noqa: A001
    x = as_tensor(x)
    return make_result(np.abs(x.data), (x,), lambda g: (g * np.sign(x.data),), "abs")


def square(x: Any) -> Tensor:
    x = as_tensor(x)
    return make_result(x.data * x.data, (x,), lambda g: (2 * g * x.data,), "square")


def softmax(x: Any) -> Tensor:
    """Softmax over the last axis, max-subtracted."""
    x = as_tensor(x)
    z = x.data - x.data.max(axis=-1, keepdims=True)
    e = np.exp(z)
    y = e / e.sum(axis=-1, keepdims=True)

    def bw(g):
        return (y * (g - (g * y).sum(axis=-1, keepdims=True)),)

    return make_result(y, (x,), bw, "softmax")


# ─── reductions ──────────────────────────────────────────────────────


def _axes(ndim: int, axis: Optional[int | Tuple[int, ...]]) -> Tuple[int, ...]:
    if axis is None:
        return tuple(range(ndim))
    if isinstance(axis, int):
        axis = (axis,)
    return tuple(a % ndim for a in axis)


def sum(x: Any, axis: Optional[int | Tuple[int, ...]] = None,  # noqa: A001
        keepdims: bool = False) -> Tensor:
    """Sum with float64 accumulation; the result keeps ``x``'s dtype."""
    x = as_tensor(x)
    axes = _axes(x.ndim, axis)
    out = x.data.sum(axis=axes, dtype=np.float64, keepdims=keepdims).astype(x.dtype)

    def bw(g):
        if not keepdims:
            g = np.expand_dims(g, axes)
        return (np.broadcast_to(g, x.shape),)

    return make_result(np.asarray(out), (x,), bw, "sum")


def mean(x: Any, axis: Optional[int | Tuple[int, ...]] = None,
         keepdims: bool = False) -> Tensor:
    """Mean with float64 accumulation."""
    x = as_tensor(x)
    axes = _axes(x.ndim, axis)
    n = int(np.prod([x.shape[a] for a in axes])) if axes else 1
    out = x.data.mean(axis=axes, dtype=np.float64, keepdims=keepdims).astype(x.dtype)

    def bw(g):
        if not keepdims:
            g = np.expand_dims(g, axes)
        return (np.broadcast_to(g / n, x.shape),)

    return make_result(np.asarray(out), (x,), bw, "mean")


# ─── structural ──────────────────────────────────────────────────────


def concat(tensors: Sequence[Any], axis: int = -1) -> Tensor:
    ts = [as_tensor(t) for t in tensors]
    if not ts:
        raise ShapeError("concat", detail="no operands")
    ax = axis % ts[0].ndim
    ref = ts[0].shape
    for t in ts[1:]:
        if t.ndim != len(ref) or any(t.shape[i] != ref[i] for i in range(len(ref)) if i != ax):
            raise ShapeError("concat", *(u.shape for u in ts), detail=f"axis={axis}")
    sizes = np.cumsum([t.shape[ax] for t in ts])[:-1]

    def bw(g):
        return tuple(np.split(g, sizes, axis=ax))

    return make_result(np.concatenate([t.data for t in ts], axis=ax), ts, bw, "concat")


def columns(x: Any, start: int, stop: int) -> Tensor:
    """``x[..., start:stop]``."""
    x = as_tensor(x)
    if not (0 <= start < stop <= x.shape[-1]):
        raise ShapeError("columns", x.shape, detail=f"slice {start}:{stop}")

    def bw(g):
        full = np.zeros_like(x.data)
        full[..., start:stop] = g
        return (full,)

    return make_result(x.data[..., start:stop], (x,), bw, "columns")


def take_rows(x: Any, index: np.ndarray) -> Tensor:
    """``x[index]`` along axis 0; backward scatter-adds repeated rows."""
    x = as_tensor(x)
    index = np.asarray(index, dtype=np.intp)
    if index.size and (index.min() < 0 or index.max() >= x.shape[0]):
        raise ShapeError("take_rows", x.shape, index.shape, detail="index out of range")

    def bw(g):
        full = np.zeros_like(x.data)
        np.add.at(full, index, g)
        return (full,)

    return make_result(x.data[index], (x,), bw, "take_rows")
