"""High-order, local and fused similarity between source and target embeddings."""

from __future__ import annotations

from typing import Optional

import numpy as np

from src.autodiff import ops
from src.autodiff.tape import Tensor, as_tensor
from src.exceptions import ContractError
from src.graphs.sparse import SparseMatrix
from src.matching.correspondence import Correspondence
from src.matching.sinkhorn import DEFAULT_ITERS, DEFAULT_TAU, sinkhorn_normalize


def high_order_similarity(
    h_s: SparseMatrix, z_s, z_t, h_t: SparseMatrix
) -> Tensor:
    """(H̃_s Z_s)(H̃_t Z_t)ᵀ, projected back onto the original nodes.

    The |V^(m)| × |V^(m)| product is never formed.
    """
    z_s, z_t = as_tensor(z_s), as_tensor(z_t)
    if z_s.shape[1] != z_t.shape[1]:
        raise ContractError(
            "Source and target embeddings must have the same width.",
            details={"source": list(z_s.shape), "target": list(z_t.shape)},
        )
    projected_s = ops.spmm(h_s, z_s)
    projected_t = ops.spmm(h_t, z_t)
    return ops.matmul(projected_s, ops.transpose(projected_t))


def local_similarity(z_s, z_t) -> Tensor:
    """Z_s Z_tᵀ on the original nodes."""
    z_s, z_t = as_tensor(z_s), as_tensor(z_t)
    if z_s.shape[1] != z_t.shape[1]:
        raise ContractError("Source and target embeddings must have the same width.")
    return ops.matmul(z_s, ops.transpose(z_t))


def fuse(alpha: float, high: Optional[Tensor], local: Optional[Tensor]) -> Tensor:
    """α·high + (1 − α)·local; a branch with zero weight is never read."""
    if not 0.0 <= alpha <= 1.0:
        raise ContractError("alpha must be in [0, 1].", details={"alpha": alpha})
    if alpha == 0.0:
        return ops.scalar_mul(local, 1.0)
    if alpha == 1.0:
        return ops.scalar_mul(high, 1.0)
    high, local = as_tensor(high), as_tensor(local)
    if high.shape != local.shape:
        raise ContractError(
            "High-order and local similarities differ in shape.",
            details={"high": list(high.shape), "local": list(local.shape)},
        )
    return ops.add(ops.scalar_mul(high, alpha), ops.scalar_mul(local, 1.0 - alpha))


def combined_similarity(
    alpha: float,
    high: Optional[Tensor],
    local: Optional[Tensor],
    iters: int = DEFAULT_ITERS,
    tau: float = DEFAULT_TAU,
    *,
    support: Optional[np.ndarray] = None,
    strict: bool = False,
) -> Correspondence:
    """Sinkhorn of the α-weighted sum of the two similarity branches."""
    return sinkhorn_normalize(fuse(alpha, high, local), iters, tau, support=support, strict=strict)
