"""AdamW with decoupled weight decay, and the cosine learning-rate schedule."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any, Dict, List, Sequence

import numpy as np

from .._errors import ConfigError, OptimizerError
from ._tensor import Tensor


@dataclass
class OptimizerState:
    """Per-parameter moments plus hyperparameters. ``lr`` is the rate used by
    the most recent step (the schedule owns it between steps)."""

    lr: float = 5e-4
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    weight_decay: float = 0.01
    step: int = 0
    m: List[np.ndarray] = field(default_factory=list)
    v: List[np.ndarray] = field(default_factory=list)

    def __post_init__(self):
        if not (0.0 <= self.beta1 < 1.0 and 0.0 <= self.beta2 < 1.0):
            raise ConfigError(f"betas must lie in [0, 1), got ({self.beta1}, {self.beta2})")
        if self.eps <= 0:
            raise ConfigError(f"eps must be > 0, got {self.eps}")
        if self.weight_decay < 0:
            raise ConfigError(f"weight_decay must be >= 0, got {self.weight_decay}")
        if self.step < 0:
            raise ConfigError(f"step must be >= 0, got {self.step}")

    def to_dict(self) -> Dict[str, Any]:
        return {
            "lr": self.lr, "beta1": self.beta1, "beta2": self.beta2, "eps": self.eps,
            "weight_decay": self.weight_decay, "step": self.step,
            "m": [_pack_array(a) for a in self.m],
            "v": [_pack_array(a) for a in self.v],
        }

    @classmethod
    def from_dict(cls, d: Dict[str, Any]) -> "OptimizerState":
        return cls(
            lr=d["lr"], beta1=d["beta1"], beta2=d["beta2"], eps=d["eps"],
            weight_decay=d["weight_decay"], step=d["step"],
            m=[_unpack_array(a) for a in d["m"]],
            v=[_unpack_array(a) for a in d["v"]],
        )


def _pack_array(a: np.ndarray) -> Dict[str, Any]:
    return {"dtype": a.dtype.str, "shape": list(a.shape), "data": a.tobytes()}


def _unpack_array(d: Dict[str, Any]) -> np.ndarray:
    return np.frombuffer(d["data"], dtype=np.dtype(d["dtype"])).reshape(d["shape"]).copy()


def adamw_step(params: Sequence[Tensor], state: OptimizerState, lr: float) -> None:
    """One AdamW update in place. Grads are read, never cleared.

    Raises:
        OptimizerError: a registered param has no grad, or the param list no
            longer matches the moments in ``state``.
    """
    params = list(params)
    missing = [i for i, p in enumerate(params) if p.grad is None]
    if missing:
        raise OptimizerError(
            f"adamw_step: {len(missing)} param(s) have no grad (first index {missing[0]}); "
            f"run backward() first, or leave frozen params out of the optimizer"
        )
    if not state.m:
        state.m = [np.zeros_like(p.data) for p in params]
        state.v = [np.zeros_like(p.data) for p in params]
    if len(state.m) != len(params) or any(m.shape != p.shape for m, p in zip(state.m, params)):
        raise OptimizerError("adamw_step: optimizer state does not match the param list")

    state.step += 1
    state.lr = float(lr)
    b1, b2 = state.beta1, state.beta2
    bc1 = 1.0 - b1 ** state.step
    bc2 = 1.0 - b2 ** state.step
    decay = 1.0 - lr * state.weight_decay
    for p, m, v in zip(params, state.m, state.v):
        g = p.grad.astype(p.data.dtype, copy=False)
        if decay != 1.0:
            p.data *= decay
        m *= b1
        m += (1.0 - b1) * g
        v *= b2
        v += (1.0 - b2) * (g * g)
        denom = np.sqrt(v / bc2) + state.eps
        p.data -= (lr / bc1) * m / denom


class AdamW:
    """Params + ``OptimizerState`` bundle with ``step(lr)`` / ``zero_grad()``."""

    def __init__(self, params: Sequence[Tensor], *, betas=(0.9, 0.999), eps: float = 1e-8,
                 weight_decay: float = 0.01, lr: float = 5e-4):
        self.params = [p for p in params if p.requires_grad]
        self.state = OptimizerState(lr=lr, beta1=betas[0], beta2=betas[1], eps=eps,
                                    weight_decay=weight_decay)

    def step(self, lr: float) -> None:
        adamw_step(self.params, self.state, lr)

    def zero_grad(self) -> None:
        for p in self.params:
            p.grad = None


@dataclass(frozen=True)
class LrSchedule:
    """Cosine annealing from ``base_lr`` at epoch 0 to ``min_lr`` at ``total_epochs``."""

    base_lr: float
    total_epochs: int
    min_lr: float = 0.0

    def __post_init__(self):
        if not (0.0 <= self.min_lr <= self.base_lr):
            raise ConfigError(
                f"schedule needs 0 <= min_lr <= base_lr, got min_lr={self.min_lr}, "
                f"base_lr={self.base_lr}"
            )
        if self.total_epochs < 1:
            raise ConfigError(f"total_epochs must be >= 1, got {self.total_epochs}")


def lr_at(schedule: LrSchedule, epoch: int) -> float:
    """``min_lr + 0.5·(base_lr − min_lr)·(1 + cos(π·epoch/total_epochs))``."""
    if not (0 <= epoch <= schedule.total_epochs):
        raise ConfigError(f"epoch {epoch} outside schedule range [0, {schedule.total_epochs}]")
    cos = math.cos(math.pi * epoch / schedule.total_epochs)
    return schedule.min_lr + 0.5 * (schedule.base_lr - schedule.min_lr) * (1.0 + cos)
