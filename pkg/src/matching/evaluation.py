"""Top-k sparsification, P@k and hard one-to-one assignment."""

from __future__ import annotations

from typing import Optional, Sequence

import numpy as np
from scipy.optimize import linear_sum_assignment

from src.exceptions import ContractError, ValidationError
from src.graphs.graph import AnchorSet
from src.matching.correspondence import Correspondence

EXACT_ASSIGNMENT_LIMIT = 500
DEFAULT_P_AT = (1, 10, 30)


def _as_array(s) -> np.ndarray:
    return s.dense() if isinstance(s, Correspondence) else np.asarray(s, dtype=np.float64)


def topk_support(scores, k: int, anchors=None) -> np.ndarray:
    """Boolean mask of each row's k largest entries plus its anchor column.

    Ties keep the lowest column id. An AnchorSet contributes every pair, so
    each ground-truth column survives; training passes its train pairs as an
    array instead.
    """
    if k < 1:
        raise ContractError("Top-k needs k >= 1.", details={"k": k})
    values = _as_array(scores)
    n_s, n_t = values.shape
    support = np.zeros((n_s, n_t), dtype=bool)
    if n_t == 0:
        return support
    # Stable sort on the negated values keeps lower column ids first among ties.
    order = np.argsort(-values, axis=1, kind="stable")[:, : min(k, n_t)]
    np.put_along_axis(support, order, True, axis=1)
    if anchors is not None:
        pairs = anchors.pairs if isinstance(anchors, AnchorSet) else anchors
        pairs = np.asarray(pairs, dtype=np.int64).reshape(-1, 2)
        support[pairs[:, 0], pairs[:, 1]] = True
    return support


def sparsify_topk(s: Correspondence, k: int, anchors=None) -> Correspondence:
    """Restrict `s` to its row-wise top-k entries plus the anchor columns."""
    mask = s.support_mask()
    support = topk_support(np.where(mask, s.dense(), -np.inf), k, anchors) & mask
    values = np.where(support, s.dense(), 0.0)
    return Correspondence.from_array(values, provenance=s.provenance, support=support)


def ranks_of(s, pairs) -> np.ndarray:
    """1-based rank of column j within row i for every (i, j); ties favor lower ids.

    Columns outside a sparse support rank after every supported column.
    """
    values = _as_array(s)
    pairs = np.asarray(pairs, dtype=np.int64).reshape(-1, 2)
    mask = s.support_mask() if isinstance(s, Correspondence) else np.ones(values.shape, dtype=bool)
    ranks = np.empty(pairs.shape[0], dtype=np.int64)
    columns = np.arange(values.shape[1])
    for index, (i, j) in enumerate(pairs.tolist()):
        if not mask[i, j]:
            ranks[index] = int(mask[i].sum()) + 1
            continue
        row = values[i]
        better = (row > row[j]) | ((row == row[j]) & (columns < j))
        ranks[index] = int(np.count_nonzero(better & mask[i])) + 1
    return ranks


def precision_at_k(s, test_anchors, k: int) -> float:
    """Fraction of test pairs whose target column ranks within the top k.

    `test_anchors` is an AnchorSet (its test split is used) or an array of pairs.

    Raises:
        ValidationError: If there are no test pairs.
    """
    if k < 1:
        raise ContractError("P@k needs k >= 1.", details={"k": k})
    pairs = test_anchors.test_pairs if isinstance(test_anchors, AnchorSet) else test_anchors
    pairs = np.asarray(pairs, dtype=np.int64).reshape(-1, 2)
    if pairs.shape[0] == 0:
        raise ValidationError("P@k is undefined without test anchors.")
    return float(np.mean(ranks_of(s, pairs) <= k))


def precision_table(s, test_anchors, ks: Sequence[int] = DEFAULT_P_AT) -> dict[int, float]:
    return {k: precision_at_k(s, test_anchors, k) for k in ks}


def greedy_assignment(s) -> np.ndarray:
    """Row → column map, −1 for rows left without a free column.

    Rows are visited by descending best score; each takes its best unused
    column, lowest id first among ties.
    """
    values = _as_array(s)
    mask = s.support_mask() if isinstance(s, Correspondence) else np.ones(values.shape, dtype=bool)
    n_s, n_t = values.shape
    assignment = np.full(n_s, -1, dtype=np.int64)
    if n_t == 0:
        return assignment
    confidence = np.where(mask, values, -np.inf).max(axis=1)
    taken = np.zeros(n_t, dtype=bool)
    for i in np.argsort(-confidence, kind="stable").tolist():
        available = mask[i] & ~taken
        if not available.any():
            continue
        j = int(np.argmax(np.where(available, values[i], -np.inf)))
        assignment[i] = j
        taken[j] = True
    return assignment


def exact_assignment(s, limit: int = EXACT_ASSIGNMENT_LIMIT) -> np.ndarray:
    """Maximum-weight one-to-one assignment via the Hungarian method.

    Raises:
        ContractError: If the source side exceeds `limit` rows.
    """
    values = _as_array(s)
    if values.shape[0] > limit:
        raise ContractError(
            f"Exact assignment is limited to {limit} source nodes.",
            details={"rows": values.shape[0]},
        )
    if isinstance(s, Correspondence) and s.support is not None:
        values = np.where(s.support, values, -1e9)
    rows, cols = linear_sum_assignment(values, maximize=True)
    assignment = np.full(values.shape[0], -1, dtype=np.int64)
    assignment[rows] = cols
    return assignment


def matching_accuracy(assignment: np.ndarray, pairs) -> float:
    """Fraction of pairs (i, j) with assignment[i] == j."""
    pairs = pairs.test_pairs if isinstance(pairs, AnchorSet) else pairs
    pairs = np.asarray(pairs, dtype=np.int64).reshape(-1, 2)
    if pairs.shape[0] == 0:
        raise ValidationError("Matching accuracy is undefined without anchor pairs.")
    return float(np.mean(assignment[pairs[:, 0]] == pairs[:, 1]))


def hard_assignment(s, method: str) -> Optional[np.ndarray]:
    if method == "none":
        return None
    if method == "greedy":
        return greedy_assignment(s)
    if method == "exact":
        return exact_assignment(s)
    raise ContractError(f"Unknown assignment method '{method}'.")
