"""Cross-entropy of a soft correspondence against training anchors."""

from __future__ import annotations

import numpy as np

from src.autodiff import ops
from src.autodiff.tape import Tensor
from src.exceptions import ContractError, ValidationError
from src.graphs.graph import AnchorSet
from src.matching.correspondence import Correspondence


def _pairs(anchors) -> np.ndarray:
    if isinstance(anchors, AnchorSet):
        return anchors.train_pairs
    return np.asarray(anchors, dtype=np.int64).reshape(-1, 2)


def matching_loss(s: Correspondence, anchors) -> Tensor:
    """−Σ log S[i, π(i)] over training anchors, with log clamped at 1e-12.

    `anchors` is an AnchorSet (its train split is used) or an array of pairs.

    Raises:
        ValidationError: If there are no training pairs.
        ContractError: If an anchor lies outside the correspondence support.
    """
    pairs = _pairs(anchors)
    if pairs.shape[0] == 0:
        raise ValidationError("The matching loss needs at least one training anchor.")
    rows, cols = pairs[:, 0], pairs[:, 1]
    n_s, n_t = s.shape
    if rows.max() >= n_s or cols.max() >= n_t:
        raise ContractError("Anchor ids exceed the correspondence shape.")
    outside = ~s.contains(rows, cols)
    if outside.any():
        first = int(np.flatnonzero(outside)[0])
        raise ContractError(
            "Anchor lies outside the sparse support.",
            details={"source": int(rows[first]), "target": int(cols[first])},
        )
    picked = ops.gather(s.values, rows, cols)
    return ops.scalar_mul(ops.sum(ops.log(picked)), -1.0)
