"""``Tensor`` and the gradient tape.

Define-by-run: every op on a tensor that requires grad records its parents and
a backward closure; ``backward(loss)`` walks that graph once in reverse
topological order. The graph is rebuilt per batch and never cached.

Data is float32 by default. ``precision(np.float64)`` switches the dtype of
newly created tensors, which the finite-difference checks use so that the
comparison measures the engine rather than float32 rounding.
"""

from __future__ import annotations

from contextlib import contextmanager
from typing import Any, Callable, Iterator, Optional, Sequence, Tuple

import numpy as np

from .._errors import TapeError

_DEFAULT_DTYPE: type = np.float32
_GRAD_ENABLED = True

BackwardFn = Callable[[np.ndarray], Sequence[Optional[np.ndarray]]]


def default_dtype() -> type:
    return _DEFAULT_DTYPE


@contextmanager
def precision(dtype: Any) -> Iterator[None]:
    """Create tensors in ``dtype`` inside the block."""
    global _DEFAULT_DTYPE
    prev, _DEFAULT_DTYPE = _DEFAULT_DTYPE, np.dtype(dtype).type
    try:
        yield
    finally:
        _DEFAULT_DTYPE = prev


@contextmanager
def no_grad() -> Iterator[None]:
    """Ops inside the block record nothing on the tape."""
    global _GRAD_ENABLED
    prev, _GRAD_ENABLED = _GRAD_ENABLED, False
    try:
        yield
    finally:
        _GRAD_ENABLED = prev


def grad_enabled() -> bool:
    return _GRAD_ENABLED


class Tensor:
    """n-d array with optional tape participation.

    ``grad`` is populated by :func:`backward` on leaves (tensors created with
    ``requires_grad=True``) and always has the shape of ``data``.
    """

    __slots__ = ("data", "requires_grad", "grad", "_parents", "_backward", "op")
    __array_priority__ = 100  # ndarray <op> Tensor defers to Tensor

    def __init__(self, data: Any, requires_grad: bool = False, *, dtype: Any = None):
        if isinstance(data, Tensor):
            data = data.data
        want = np.dtype(dtype).type if dtype is not None else _DEFAULT_DTYPE
        # always a private copy; optimizer steps update it in place
        self.data: np.ndarray = np.array(data, dtype=want, order="C")
        self.requires_grad = bool(requires_grad)
        self.grad: Optional[np.ndarray] = None
        self._parents: Tuple["Tensor", ...] = ()
        self._backward: Optional[BackwardFn] = None
        self.op = "leaf"

    # ---- array-ish surface ----------------------------------------------

    @property
    def shape(self) -> Tuple[int, ...]:
        return self.data.shape

    @property
    def ndim(self) -> int:
        return self.data.ndim

    @property
    def size(self) -> int:
        return self.data.size

    @property
    def dtype(self) -> np.dtype:
        return self.data.dtype

    @property
    def is_leaf(self) -> bool:
        return self._backward is None

    def numpy(self) -> np.ndarray:
        return self.data

    def item(self) -> float:
        return float(self.data.reshape(-1)[0]) if self.data.size == 1 else float("nan")

    def detach(self) -> "Tensor":
        return Tensor(self.data)

    def zero_grad(self) -> None:
        self.grad = None

    def __repr__(self) -> str:
        flag = ", requires_grad=True" if self.requires_grad else ""
        return f"Tensor(shape={self.shape}, dtype={self.dtype.name}, op={self.op!r}{flag})"

    # ---- operators --------------------------------------------------------

    def __add__(self, other):
        return _ops.add(self, other)

    def __radd__(self, other):
        return _ops.add(other, self)

    def __sub__(self, other):
        return _ops.sub(self, other)

    def __rsub__(self, other):
        return _ops.sub(other, self)

    def __mul__(self, other):
        return _ops.mul(self, other)

    def __rmul__(self, other):
        return _ops.mul(other, self)

    def __neg__(self):
        return _ops.neg(self)

    def __matmul__(self, other):
        return _ops.matmul(self, other)

    def __rmatmul__(self, other):
        return _ops.matmul(other, self)


def as_tensor(x: Any) -> Tensor:
    """Tensors pass through; anything else becomes a constant tensor."""
    return x if isinstance(x, Tensor) else Tensor(x)


def make_result(data: np.ndarray, parents: Sequence[Tensor], backward_fn: BackwardFn,
                op: str) -> Tensor:
    """Wrap an op result, recording it on the tape when any parent needs grad."""
    out = Tensor.__new__(Tensor)
    out.data = data
    out.grad = None
    out.op = op
    needs = _GRAD_ENABLED and any(p.requires_grad for p in parents)
    out.requires_grad = needs
    if needs:
        out._parents = tuple(parents)
        out._backward = backward_fn
    else:
        out._parents = ()
        out._backward = None
    return out


def backward(loss: Tensor) -> None:
    """Populate ``.grad`` on every grad-requiring leaf reachable from ``loss``.

    Leaves accumulate (``grad += ...``); callers zero grads between steps.

    Raises:
        TapeError: ``loss`` is not a scalar, or is not on the tape.
    """
    if not isinstance(loss, Tensor):
        raise TapeError(f"backward() needs a Tensor, got {type(loss).__name__}")
    if loss.data.size != 1 or loss.data.ndim > 1:
        raise TapeError(f"backward() needs a scalar loss, got shape {loss.shape}")
    if not loss.requires_grad:
        raise TapeError("backward(): loss is not on the tape (no input requires grad)")

    # iterative post-order DFS; reversed it is a valid reverse-topological order
    order: list[Tensor] = []
    visited: set[int] = set()
    stack: list[tuple[Tensor, bool]] = [(loss, False)]
    while stack:
        node, expanded = stack.pop()
        if expanded:
            order.append(node)
            continue
        if id(node) in visited:
            continue
        visited.add(id(node))
        stack.append((node, True))
        for p in node._parents:
            if p.requires_grad and id(p) not in visited:
                stack.append((p, False))

    grads: dict[int, np.ndarray] = {id(loss): np.ones_like(loss.data)}
    for node in reversed(order):
        g = grads.pop(id(node), None)
        if g is None:
            continue
        if node._backward is None:
            g = np.asarray(g, dtype=node.data.dtype).reshape(node.data.shape)
            node.grad = g.copy() if node.grad is None else node.grad + g
            continue
        for parent, pg in zip(node._parents, node._backward(g)):
            if pg is None or not parent.requires_grad:
                continue
            key = id(parent)
            grads[key] = grads[key] + pg if key in grads else pg


from . import ops as _ops  # noqa: E402  (ops needs Tensor defined)
