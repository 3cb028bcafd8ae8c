"""Bias-corrected Adam over named parameters."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping, Optional

import numpy as np

from src.autodiff.tape import Tensor
from src.exceptions import ContractError


@dataclass
class AdamState:
    lr: float = 1e-3
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    step: int = 0
    first_moment: dict[str, np.ndarray] = field(default_factory=dict)
    second_moment: dict[str, np.ndarray] = field(default_factory=dict)


def adam_step(
    params: Mapping[str, Tensor],
    grads: Mapping[str, Optional[np.ndarray]],
    state: AdamState,
) -> Mapping[str, Tensor]:
    """Update every parameter in place and advance `state.step` by one.

    A missing or None gradient counts as zero.

    Raises:
        ContractError: If a gradient's shape differs from its parameter's.
    """
    state.step += 1
    t = state.step
    for name, param in params.items():
        grad = grads.get(name)
        if grad is None:
            grad = np.zeros(param.shape)
        if grad.shape != param.shape:
            raise ContractError(
                f"adam_step: gradient for '{name}' has shape {grad.shape}, expected {param.shape}.",
                details={"parameter": name},
            )
        m = state.first_moment.setdefault(name, np.zeros(param.shape))
        v = state.second_moment.setdefault(name, np.zeros(param.shape))
        m *= state.beta1
        m += (1.0 - state.beta1) * grad
        v *= state.beta2
        v += (1.0 - state.beta2) * grad * grad
        m_hat = m / (1.0 - state.beta1 ** t)
        v_hat = v / (1.0 - state.beta2 ** t)
        param.value -= state.lr * m_hat / (np.sqrt(v_hat) + state.eps)
    return params
