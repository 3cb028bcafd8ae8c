"""Soft correspondence matrices between a source and a target graph."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from src.autodiff.tape import Tensor
from src.exceptions import ContractError
from src.graphs.sparse import SparseMatrix

RAW = "raw"
SINKHORNED = "sinkhorned"
DENSE = "dense"
SPARSE = "sparse"


@dataclass(frozen=True, eq=False)
class Correspondence:
    """|V_s| × |V_t| scores.

    `values` is always a dense Tensor; entries outside `support` are zero.
    A correspondence without a support mask is dense, one with a mask is
    row-sparse.
    """

    values: Tensor
    provenance: str = RAW
    support: Optional[np.ndarray] = None

    def __post_init__(self):
        if self.provenance not in (RAW, SINKHORNED):
            raise ContractError(f"Unknown provenance '{self.provenance}'.")
        if self.support is not None:
            support = np.asarray(self.support, dtype=bool)
            if support.shape != self.values.shape:
                raise ContractError("Support mask shape differs from the score shape.")
            object.__setattr__(self, "support", support)

    @classmethod
    def from_array(cls, values, provenance: str = RAW, support=None) -> "Correspondence":
        return cls(values=Tensor(values), provenance=provenance, support=support)

    @property
    def shape(self) -> tuple[int, int]:
        return self.values.shape

    @property
    def storage(self) -> str:
        return DENSE if self.support is None else SPARSE

    @property
    def is_sinkhorned(self) -> bool:
        return self.provenance == SINKHORNED

    def dense(self) -> np.ndarray:
        return self.values.value

    def support_mask(self) -> np.ndarray:
        if self.support is None:
            return np.ones(self.shape, dtype=bool)
        return self.support

    def contains(self, rows, cols) -> np.ndarray:
        return self.support_mask()[np.asarray(rows), np.asarray(cols)]

    def row_sums(self) -> np.ndarray:
        return self.dense().sum(axis=1)

    def col_sums(self) -> np.ndarray:
        return self.dense().sum(axis=0)

    def support_triplets(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """(row, col, value) for every supported entry, row-major."""
        rows, cols = np.nonzero(self.support_mask())
        return rows.astype(np.int64), cols.astype(np.int64), self.dense()[rows, cols]

    def to_sparse(self) -> SparseMatrix:
        rows, cols, values = self.support_triplets()
        return SparseMatrix.from_triplets(rows, cols, values, self.shape)

    def detach(self) -> "Correspondence":
        return Correspondence(self.values.detach(), self.provenance, self.support)
