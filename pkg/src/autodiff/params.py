"""Named trainable parameters with Glorot initialization and checkpoint state."""

from __future__ import annotations

import hashlib
from typing import Iterator, Optional

import numpy as np

from src.autodiff.tape import Tensor
from src.exceptions import ContractError

CHECKPOINT_VERSION = 1


def glorot_uniform(rows: int, cols: int, rng: np.random.Generator) -> np.ndarray:
    limit = np.sqrt(6.0 / max(rows + cols, 1))
    return rng.uniform(-limit, limit, size=(rows, cols))


class ParameterStore:
    """Insertion-ordered mapping from parameter name to trainable Tensor."""

    def __init__(self, seed: Optional[int] = None, prefix: str = ""):
        self._params: dict[str, Tensor] = {}
        self._rng = np.random.default_rng(seed)
        self.prefix = prefix

    def _key(self, name: str) -> str:
        return f"{self.prefix}{name}"

    def glorot(self, name: str, rows: int, cols: int) -> Tensor:
        return self._register(name, glorot_uniform(rows, cols, self._rng))

    def constant(self, name: str, rows: int, cols: int, value: float) -> Tensor:
        return self._register(name, np.full((rows, cols), float(value)))

    def _register(self, name: str, value: np.ndarray) -> Tensor:
        key = self._key(name)
        if key in self._params:
            raise ContractError(f"Parameter '{key}' is already registered.")
        tensor = Tensor(value, requires_grad=True, name=key)
        self._params[key] = tensor
        return tensor

    def __getitem__(self, name: str) -> Tensor:
        return self._params[self._key(name)]

    def __contains__(self, name: str) -> bool:
        return self._key(name) in self._params

    def __iter__(self) -> Iterator[str]:
        return iter(self._params)

    def __len__(self) -> int:
        return len(self._params)

    def items(self):
        return self._params.items()

    def rebind(self, tensors) -> "ParameterStore":
        """A store with the same names whose entries are `tensors`, in registration order."""
        tensors = list(tensors)
        if len(tensors) != len(self._params):
            raise ContractError(
                f"rebind needs {len(self._params)} tensors, got {len(tensors)}."
            )
        bound = ParameterStore(prefix=self.prefix)
        for (key, current), tensor in zip(self._params.items(), tensors):
            if tensor.shape != current.shape:
                raise ContractError(f"rebind shape mismatch for '{key}'.")
            bound._params[key] = tensor
        return bound

    def zero_grad(self) -> None:
        for tensor in self._params.values():
            tensor.zero_grad()

    def grads(self) -> dict[str, Optional[np.ndarray]]:
        return {key: tensor.grad for key, tensor in self._params.items()}

    def checksum(self) -> str:
        digest = hashlib.sha256()
        for key, tensor in self._params.items():
            digest.update(key.encode("utf-8"))
            digest.update(np.ascontiguousarray(tensor.value).tobytes())
        return digest.hexdigest()

    def state_dict(self) -> dict:
        return {
            "version": CHECKPOINT_VERSION,
            "parameters": {key: tensor.value.tolist() for key, tensor in self._params.items()},
        }

    def load_state_dict(self, state: dict) -> None:
        """Overwrite values of already registered parameters.

        Raises:
            ContractError: On a version, name or shape mismatch.
        """
        if state.get("version") != CHECKPOINT_VERSION:
            raise ContractError(f"Unsupported checkpoint version {state.get('version')!r}.")
        values = state.get("parameters", {})
        if set(values) != set(self._params):
            raise ContractError(
                "Checkpoint parameters do not match the model.",
                details={
                    "missing": sorted(set(self._params) - set(values)),
                    "unexpected": sorted(set(values) - set(self._params)),
                },
            )
        for key, tensor in self._params.items():
            array = np.asarray(values[key], dtype=np.float64)
            if array.size != tensor.value.size or (array.size and array.shape != tensor.shape):
                raise ContractError(f"Checkpoint shape mismatch for '{key}'.")
            tensor.value[...] = array.reshape(tensor.shape)
