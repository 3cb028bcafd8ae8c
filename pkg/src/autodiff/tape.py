"""
Reverse-mode differentiation over dense float64 matrices.

Operations executed while a `Tape` is active record a node holding the
output tensor, its inputs and a backward closure. `Tape.backward` walks the
recorded nodes in reverse insertion order, so every node is visited exactly
once and gradient accumulation order is fixed.
"""

from __future__ import annotations

import logging
import os
from contextvars import ContextVar
from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import numpy as np

from src.exceptions import ContractError, NonFiniteError

logger = logging.getLogger(__name__)

_ACTIVE_TAPE: ContextVar[Optional["Tape"]] = ContextVar("hgmn_active_tape", default=None)


def debug_numerics_enabled() -> bool:
    return os.getenv("HGMN_DEBUG_NUMERICS", "").lower() in {"1", "true", "yes"}


def _check_finite(values: np.ndarray, where: str) -> None:
    if not np.all(np.isfinite(values)):
        raise NonFiniteError(f"Non-finite values produced by {where}.", details={"op": where})


class Tensor:
    """A named float64 array that may take part in differentiation."""

    __slots__ = ("value", "grad", "requires_grad", "name", "node_id")

    def __init__(self, value, requires_grad: bool = False, name: Optional[str] = None):
        array = np.array(value, dtype=np.float64)
        if array.ndim == 0:
            array = array.reshape(1, 1)
        elif array.ndim == 1:
            array = array.reshape(1, -1)
        elif array.ndim > 2:
            raise ContractError(f"Tensors are matrices; got {array.ndim} dimensions.")
        _check_finite(array, name or "tensor creation")
        self.value = array
        self.grad: Optional[np.ndarray] = None
        self.requires_grad = requires_grad
        self.name = name
        self.node_id: Optional[int] = None

    @property
    def shape(self) -> tuple[int, int]:
        return self.value.shape

    def item(self) -> float:
        if self.value.size != 1:
            raise ContractError(f"item() needs a 1x1 tensor, got {self.shape}.")
        return float(self.value.reshape(-1)[0])

    def numpy(self) -> np.ndarray:
        return self.value

    def detach(self) -> "Tensor":
        return Tensor(self.value, requires_grad=False)

    def zero_grad(self) -> None:
        self.grad = None

    def __repr__(self) -> str:
        label = f" '{self.name}'" if self.name else ""
        return f"Tensor{label}(shape={self.shape}, requires_grad={self.requires_grad})"


def as_tensor(value) -> Tensor:
    return value if isinstance(value, Tensor) else Tensor(value)


@dataclass
class _Node:
    op: str
    output: Tensor
    inputs: tuple[Tensor, ...]
    backward: Callable[[np.ndarray], Sequence[Optional[np.ndarray]]]


class Tape:
    """Records differentiable operations; single-threaded.

    Usage:
        with Tape() as tape:
            loss = ops.sum(ops.relu(w))
        grads = tape.backward(loss)
    """

    def __init__(self, debug: Optional[bool] = None):
        self.nodes: list[_Node] = []
        self.debug = debug_numerics_enabled() if debug is None else debug
        self._token = None

    def __enter__(self) -> "Tape":
        self._token = _ACTIVE_TAPE.set(self)
        return self

    def __exit__(self, exc_type, exc, tb) -> None:
        _ACTIVE_TAPE.reset(self._token)
        self._token = None

    def record(self, op: str, output: Tensor, inputs, backward) -> Tensor:
        if self.debug:
            _check_finite(output.value, op)
        output.node_id = len(self.nodes)
        self.nodes.append(_Node(op, output, tuple(inputs), backward))
        return output

    def backward(self, loss: Tensor) -> dict[int, np.ndarray]:
        """Accumulate d loss / d leaf into `.grad` of every requires_grad leaf.

        Returns a map from id(leaf) to its gradient.

        Raises:
            ContractError: If `loss` is not 1x1 or was not recorded on this tape.
        """
        if loss.shape != (1, 1):
            raise ContractError(f"backward needs a scalar loss, got shape {loss.shape}.")
        if loss.node_id is None or loss.node_id >= len(self.nodes) or (
            self.nodes[loss.node_id].output is not loss
        ):
            raise ContractError("The loss was not recorded on this tape.")

        grads: dict[int, np.ndarray] = {id(loss): np.ones((1, 1))}
        leaves: dict[int, Tensor] = {}
        for node in reversed(self.nodes[: loss.node_id + 1]):
            upstream = grads.pop(id(node.output), None)
            if upstream is None:
                continue
            for tensor, grad in zip(node.inputs, node.backward(upstream)):
                if grad is None or not tensor.requires_grad:
                    continue
                key = id(tensor)
                grads[key] = grads[key] + grad if key in grads else grad
                if tensor.node_id is None:
                    leaves[key] = tensor

        result: dict[int, np.ndarray] = {}
        for key, leaf in leaves.items():
            grad = grads.get(key)
            if grad is None:
                continue
            if self.debug:
                _check_finite(grad, f"gradient of {leaf!r}")
            leaf.grad = grad if leaf.grad is None else leaf.grad + grad
            result[key] = grad
        return result


def active_tape() -> Optional[Tape]:
    return _ACTIVE_TAPE.get()


def record(op: str, value: np.ndarray, inputs: Sequence[Tensor], backward) -> Tensor:
    """Wrap `value` as an op output and record it when any input needs gradients."""
    needs = any(t.requires_grad for t in inputs)
    out = Tensor.__new__(Tensor)
    out.value = value
    out.grad = None
    out.requires_grad = needs
    out.name = None
    out.node_id = None
    tape = _ACTIVE_TAPE.get()
    if tape is not None and needs:
        tape.record(op, out, inputs, backward)
    elif tape is not None and tape.debug:
        _check_finite(value, op)
    return out
