"""Central finite-difference gradient checking."""

from __future__ import annotations

from typing import Callable, Sequence, Union

import numpy as np

from src.autodiff.tape import Tape, Tensor

DEFAULT_EPS = 1e-5


def _evaluate(f: Callable[..., Tensor], params: Sequence[Tensor]) -> float:
    return f(*params).item()


def grad_check(
    f: Callable[..., Tensor],
    point: Union[np.ndarray, Sequence[np.ndarray]],
    eps: float = DEFAULT_EPS,
) -> float:
    """Max over coordinates of |analytic − numeric| / max(1, |numeric|).

    `f` receives one Tensor per array in `point` and must return a 1x1
    Tensor. Numeric derivatives use central differences with step `eps`.
    """
    arrays = [point] if isinstance(point, np.ndarray) else list(point)
    params = [Tensor(np.array(a, dtype=np.float64), requires_grad=True) for a in arrays]
    with Tape() as tape:
        out = f(*params)
    if out.node_id is not None:
        tape.backward(out)

    worst = 0.0
    for param in params:
        analytic = param.grad if param.grad is not None else np.zeros(param.shape)
        for index in np.ndindex(*param.shape):
            original = param.value[index]
            param.value[index] = original + eps
            plus = _evaluate(f, params)
            param.value[index] = original - eps
            minus = _evaluate(f, params)
            param.value[index] = original
            numeric = (plus - minus) / (2.0 * eps)
            error = abs(analytic[index] - numeric) / max(1.0, abs(numeric))
            worst = max(worst, error)
    return worst
