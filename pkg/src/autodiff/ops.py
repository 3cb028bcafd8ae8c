"""Differentiable matrix operations.

Every function accepts Tensors (plain arrays are promoted to constants) and
returns a Tensor. Sparse operands are always constants.
"""

from __future__ import annotations

from typing import Optional, Sequence

import numpy as np

from src.autodiff.tape import Tensor, as_tensor, record
from src.exceptions import ContractError
from src.graphs.sparse import SparseMatrix

LOG_FLOOR = 1e-12
BATCH_NORM_EPS = 1e-5


def _shape_error(op: str, *tensors: Tensor) -> ContractError:
    shapes = [list(t.shape) for t in tensors]
    return ContractError(f"{op}: incompatible shapes {shapes}.", details={"op": op, "shapes": shapes})


def _unbroadcast(grad: np.ndarray, shape: tuple[int, int]) -> np.ndarray:
    for axis in (0, 1):
        if shape[axis] == 1 and grad.shape[axis] != 1:
            grad = grad.sum(axis=axis, keepdims=True)
    return grad


def _broadcast_check(op: str, a: Tensor, b: Tensor) -> None:
    try:
        np.broadcast_shapes(a.shape, b.shape)
    except ValueError:
        raise _shape_error(op, a, b) from None


# --- Linear algebra ---


def matmul(a, b) -> Tensor:
    a, b = as_tensor(a), as_tensor(b)
    if a.shape[1] != b.shape[0]:
        raise _shape_error("matmul", a, b)

    def backward(g):
        return g @ b.value.T, a.value.T @ g

    return record("matmul", a.value @ b.value, (a, b), backward)


def spmm(s: SparseMatrix, x) -> Tensor:
    """S @ X with S sparse and constant."""
    x = as_tensor(x)
    if s.cols != x.shape[0]:
        raise ContractError(
            f"spmm: incompatible shapes {[list(s.shape), list(x.shape)]}.",
            details={"op": "spmm"},
        )
    csr = s.csr

    def backward(g):
        return (np.asarray(csr.T @ g),)

    return record("spmm", np.asarray(csr @ x.value), (x,), backward)


def transpose(a) -> Tensor:
    a = as_tensor(a)
    return record("transpose", a.value.T.copy(), (a,), lambda g: (g.T,))


# --- Elementwise ---


def add(a, b) -> Tensor:
    a, b = as_tensor(a), as_tensor(b)
    _broadcast_check("add", a, b)

    def backward(g):
        return _unbroadcast(g, a.shape), _unbroadcast(g, b.shape)

    return record("add", a.value + b.value, (a, b), backward)


def sub(a, b) -> Tensor:
    a, b = as_tensor(a), as_tensor(b)
    _broadcast_check("sub", a, b)

    def backward(g):
        return _unbroadcast(g, a.shape), _unbroadcast(-g, b.shape)

    return record("sub", a.value - b.value, (a, b), backward)


def elementwise_mul(a, b) -> Tensor:
    a, b = as_tensor(a), as_tensor(b)
    _broadcast_check("elementwise_mul", a, b)

    def backward(g):
        return _unbroadcast(g * b.value, a.shape), _unbroadcast(g * a.value, b.shape)

    return record("elementwise_mul", a.value * b.value, (a, b), backward)


def div(a, b) -> Tensor:
    """a / b; callers keep b away from zero."""
    a, b = as_tensor(a), as_tensor(b)
    _broadcast_check("div", a, b)
    out = a.value / b.value

    def backward(g):
        return _unbroadcast(g / b.value, a.shape), _unbroadcast(-g * out / b.value, b.shape)

    return record("div", out, (a, b), backward)


def scalar_mul(a, c: float) -> Tensor:
    a = as_tensor(a)
    c = float(c)
    return record("scalar_mul", a.value * c, (a,), lambda g: (g * c,))


def relu(a) -> Tensor:
    a = as_tensor(a)
    mask = a.value > 0
    return record("relu", np.where(mask, a.value, 0.0), (a,), lambda g: (g * mask,))


def exp(a) -> Tensor:
    a = as_tensor(a)
    out = np.exp(a.value)
    return record("exp", out, (a,), lambda g: (g * out,))


def log(a) -> Tensor:
    """Natural log with the input clamped below at 1e-12."""
    a = as_tensor(a)
    clamped = np.maximum(a.value, LOG_FLOOR)
    active = a.value > LOG_FLOOR

    def backward(g):
        return (np.where(active, g / clamped, 0.0),)

    return record("log", np.log(clamped), (a,), backward)


# --- Reductions ---


def sum(a, axis: Optional[int] = None) -> Tensor:  # noqa: A001
    a = as_tensor(a)
    if axis is None:
        value = np.array([[a.value.sum()]])
    else:
        value = a.value.sum(axis=axis, keepdims=True)

    def backward(g):
        return (np.broadcast_to(g, a.shape).copy(),)

    return record("sum", value, (a,), backward)


def mean(a, axis: Optional[int] = None) -> Tensor:
    a = as_tensor(a)
    count = a.value.size if axis is None else a.shape[axis]
    return scalar_mul(sum(a, axis=axis), 1.0 / max(count, 1))


def row_softmax(a) -> Tensor:
    a = as_tensor(a)
    shifted = a.value - a.value.max(axis=1, keepdims=True)
    e = np.exp(shifted)
    out = e / e.sum(axis=1, keepdims=True)

    def backward(g):
        return (out * (g - (g * out).sum(axis=1, keepdims=True)),)

    return record("row_softmax", out, (a,), backward)


def batch_feature_normalize(a, eps: float = BATCH_NORM_EPS) -> Tensor:
    """Standardize each column with full-batch mean and population variance."""
    a = as_tensor(a)
    n = a.shape[0]
    if n == 0:
        return record("batch_feature_normalize", a.value.copy(), (a,), lambda g: (g,))
    mu = a.value.mean(axis=0, keepdims=True)
    centered = a.value - mu
    inv_std = 1.0 / np.sqrt((centered ** 2).mean(axis=0, keepdims=True) + eps)
    out = centered * inv_std

    def backward(g):
        return (
            inv_std
            / n
            * (n * g - g.sum(axis=0, keepdims=True) - out * (g * out).sum(axis=0, keepdims=True)),
        )

    return record("batch_feature_normalize", out, (a,), backward)


# --- Structural ---


def concat_cols(tensors: Sequence) -> Tensor:
    tensors = [as_tensor(t) for t in tensors]
    if not tensors:
        raise ContractError("concat_cols needs at least one tensor.")
    if len({t.shape[0] for t in tensors}) != 1:
        raise _shape_error("concat_cols", *tensors)
    bounds = np.cumsum([0] + [t.shape[1] for t in tensors])

    def backward(g):
        return tuple(g[:, bounds[i]:bounds[i + 1]] for i in range(len(tensors)))

    return record("concat_cols", np.hstack([t.value for t in tensors]), tensors, backward)


def concat_rows(tensors: Sequence) -> Tensor:
    tensors = [as_tensor(t) for t in tensors]
    if not tensors:
        raise ContractError("concat_rows needs at least one tensor.")
    if len({t.shape[1] for t in tensors}) != 1:
        raise _shape_error("concat_rows", *tensors)
    bounds = np.cumsum([0] + [t.shape[0] for t in tensors])

    def backward(g):
        return tuple(g[bounds[i]:bounds[i + 1], :] for i in range(len(tensors)))

    return record("concat_rows", np.vstack([t.value for t in tensors]), tensors, backward)


def pad_rows(a, count: int, value: float) -> Tensor:
    """Append `count` constant rows filled with `value`."""
    a = as_tensor(a)
    if count <= 0:
        return a
    return concat_rows([a, Tensor(np.full((count, a.shape[1]), float(value)))])


def take_rows(a, rows) -> Tensor:
    a = as_tensor(a)
    rows = np.asarray(rows, dtype=np.int64).reshape(-1)
    if rows.size and (rows.min() < 0 or rows.max() >= a.shape[0]):
        raise ContractError("take_rows: row index out of range.", details={"op": "take_rows"})

    def backward(g):
        grad = np.zeros(a.shape)
        np.add.at(grad, rows, g)
        return (grad,)

    return record("take_rows", a.value[rows], (a,), backward)


def gather(a, rows, cols) -> Tensor:
    """Column vector of a[rows[i], cols[i]]."""
    a = as_tensor(a)
    rows = np.asarray(rows, dtype=np.int64).reshape(-1)
    cols = np.asarray(cols, dtype=np.int64).reshape(-1)
    if rows.shape != cols.shape:
        raise ContractError("gather: rows and cols must have the same length.")

    def backward(g):
        grad = np.zeros(a.shape)
        np.add.at(grad, (rows, cols), g.reshape(-1))
        return (grad,)

    return record("gather", a.value[rows, cols].reshape(-1, 1), (a,), backward)
