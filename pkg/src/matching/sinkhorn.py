"""
Differentiable rectangular Sinkhorn normalization.

Scores are mapped through exp(s / τ), real rows are normalized, the matrix is
padded with uniform dummy rows up to |V_t| × |V_t|, and column and row
normalization then alternate. `iters` is the minimum number of rounds; the
loop keeps going until the real rows' column sums are within
CONVERGENCE_TOLERANCE of feasibility, the excess stalls, or `max_iters`
rounds have run. Every round ends with the row step, so real rows sum to one.
If the loop stops short, columns that still exceed one are scaled down after
the dummy rows are dropped, and the output is checked on every call.
"""

from __future__ import annotations

import logging
from typing import Optional

import numpy as np

from src.autodiff import ops
from src.autodiff.tape import Tensor, as_tensor
from src.exceptions import ContractError, MarginalViolation, NonFiniteError
from src.matching.correspondence import SINKHORNED, Correspondence

logger = logging.getLogger(__name__)

DEFAULT_ITERS = 10
DEFAULT_TAU = 1.0
DEFAULT_MAX_ITERS = 10_000
MARGINAL_TOLERANCE = 1e-6
CONVERGENCE_TOLERANCE = 1e-7
STALL_TOLERANCE = 1e-12


def _column_excess(values: np.ndarray) -> float:
    return float(np.max(values.sum(axis=0) - 1.0)) if values.size else 0.0


def _safe(sums: Tensor) -> Tensor:
    # Empty rows or columns stay zero instead of dividing by zero.
    return ops.add(sums, Tensor((sums.value == 0.0).astype(np.float64)))


def _normalize_rows(k: Tensor) -> Tensor:
    return ops.div(k, _safe(ops.sum(k, axis=1)))


def _normalize_cols(k: Tensor) -> Tensor:
    return ops.div(k, _safe(ops.sum(k, axis=0)))


def _cap_cols(k: Tensor) -> Tensor:
    sums = ops.sum(k, axis=0)
    over = (sums.value > 1.0).astype(np.float64)
    divisor = ops.add(ops.elementwise_mul(sums, Tensor(over)), Tensor(1.0 - over))
    return ops.div(k, divisor)


def sinkhorn(
    scores,
    iters: int = DEFAULT_ITERS,
    tau: float = DEFAULT_TAU,
    support: Optional[np.ndarray] = None,
    max_iters: int = DEFAULT_MAX_ITERS,
) -> Tensor:
    """Differentiable core returning the normalized |V_s| × |V_t| Tensor.

    Entries outside `support` are zero in the output. Runs at least `iters`
    and at most max(iters, max_iters) rounds.

    Raises:
        ContractError: If τ ≤ 0, iters < 1 or |V_s| > |V_t|.
        NonFiniteError: If the scores contain NaN or infinities.
    """
    scores = as_tensor(scores)
    n_s, n_t = scores.shape
    if tau <= 0:
        raise ContractError("Sinkhorn temperature must be positive.", details={"tau": tau})
    if iters < 1:
        raise ContractError("Sinkhorn needs at least one iteration.", details={"iters": iters})
    if n_s > n_t:
        raise ContractError(
            "The source graph must not have more nodes than the target.",
            details={"shape": [n_s, n_t]},
        )
    if not np.all(np.isfinite(scores.value)):
        raise NonFiniteError("Sinkhorn received non-finite scores.")

    scaled = ops.scalar_mul(scores, 1.0 / tau)
    masked = scaled.value if support is None else np.where(support, scaled.value, -np.inf)
    row_max = masked.max(axis=1, keepdims=True) if n_t else np.zeros((n_s, 1))
    row_max = np.where(np.isfinite(row_max), row_max, 0.0)
    # Row scaling cancels in the first row step, so the shift is a constant.
    shifted = ops.sub(scaled, Tensor(row_max))
    if support is not None:
        keep = np.asarray(support, dtype=np.float64)
        # exp(-1000) underflows to exactly zero.
        shifted = ops.add(ops.elementwise_mul(shifted, Tensor(keep)), Tensor((keep - 1.0) * 1000.0))
    k = ops.exp(shifted)
    k = _normalize_rows(k)
    k = ops.pad_rows(k, n_t - n_s, 1.0 / n_t if n_t else 0.0)
    limit = max(iters, max_iters)
    rounds, previous = 0, np.inf
    while rounds < limit:
        k = _normalize_rows(_normalize_cols(k))
        rounds += 1
        if rounds < iters:
            continue
        excess = _column_excess(k.value[:n_s])
        # A support with no feasible scaling leaves an excess that stops moving.
        if excess <= CONVERGENCE_TOLERANCE or abs(previous - excess) < STALL_TOLERANCE:
            break
        previous = excess
    if n_t > n_s:
        k = ops.take_rows(k, np.arange(n_s))
    if _column_excess(k.value) > MARGINAL_TOLERANCE:
        logger.debug("Sinkhorn stopped after %d rounds; capping columns.", rounds)
        k = _cap_cols(k)
    return k


def check_marginals(values: np.ndarray, strict: bool = False, tol: float = MARGINAL_TOLERANCE) -> float:
    """Return the largest column-sum excess over one.

    Raises:
        MarginalViolation: If `strict` and a row sum misses one or a column
            sum exceeds 1 + tol.
    """
    row_sums = values.sum(axis=1)
    nonempty = row_sums > 0
    row_error = float(np.max(np.abs(row_sums[nonempty] - 1.0))) if nonempty.any() else 0.0
    excess = _column_excess(values)
    if row_error > tol or excess > tol:
        message = f"Sinkhorn marginals off: row error {row_error:.3e}, column excess {excess:.3e}."
        if strict:
            raise MarginalViolation(
                message, details={"row_error": row_error, "column_excess": excess}
            )
        logger.warning(message)
    return excess


def sinkhorn_normalize(
    scores,
    iters: int = DEFAULT_ITERS,
    tau: float = DEFAULT_TAU,
    *,
    support: Optional[np.ndarray] = None,
    strict: bool = False,
) -> Correspondence:
    """Sinkhorn-normalize `scores` into a correspondence with checked marginals."""
    values = sinkhorn(scores, iters=iters, tau=tau, support=support)
    check_marginals(values.value, strict=strict)
    return Correspondence(values=values, provenance=SINKHORNED, support=support)
