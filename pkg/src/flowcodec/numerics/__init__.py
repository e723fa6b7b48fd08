"""Reverse-mode tensor engine: ``Tensor``, differentiable ``ops``, ``backward``,
AdamW and the cosine schedule."""

from ._tensor import Tensor, as_tensor, backward, default_dtype, grad_enabled, no_grad, precision
from . import ops
from ._gradcheck import check_gradients, numerical_gradient, relative_error
from ._optim import AdamW, LrSchedule, OptimizerState, adamw_step, lr_at

__all__ = [
    "Tensor", "as_tensor", "backward", "no_grad", "precision", "default_dtype", "grad_enabled",
    "ops",
    "AdamW", "OptimizerState", "adamw_step", "LrSchedule", "lr_at",
    "numerical_gradient", "relative_error", "check_gradients",
]
