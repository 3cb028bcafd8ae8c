"""
Canonical sparse matrices for adjacency and incidence structure.

`SparseMatrix` wraps a scipy CSR matrix that is kept in canonical form:
sorted column indices, no duplicates and no explicit zeros. Two matrices with
the same pattern and values therefore compare equal bit-for-bit.
"""

from __future__ import annotations

from typing import Iterator

import numpy as np
import scipy.sparse as sp

from src.exceptions import ContractError, InvariantViolation


def _canonical(matrix: sp.spmatrix) -> sp.csr_matrix:
    csr = sp.csr_matrix(matrix, dtype=np.float64, copy=True)
    csr.sum_duplicates()
    csr.eliminate_zeros()
    csr.sort_indices()
    csr.indices = csr.indices.astype(np.int64, copy=False)
    csr.indptr = csr.indptr.astype(np.int64, copy=False)
    return csr


class SparseMatrix:
    """Immutable real matrix with entries in canonical row-major order."""

    __slots__ = ("_csr",)

    def __init__(self, matrix):
        if isinstance(matrix, SparseMatrix):
            self._csr = matrix._csr
        else:
            self._csr = _canonical(sp.csr_matrix(matrix))

    # --- Construction ---

    @classmethod
    def from_triplets(cls, rows, cols, values, shape: tuple[int, int]) -> "SparseMatrix":
        """Build from (row, col, value) triplets.

        Raises:
            InvariantViolation: If an index is out of range or a (row, col) repeats.
        """
        rows = np.asarray(rows, dtype=np.int64)
        cols = np.asarray(cols, dtype=np.int64)
        values = np.asarray(values, dtype=np.float64)
        n_rows, n_cols = shape
        if rows.size and (rows.min() < 0 or rows.max() >= n_rows):
            raise InvariantViolation("Row index out of range.", details={"shape": shape})
        if cols.size and (cols.min() < 0 or cols.max() >= n_cols):
            raise InvariantViolation("Column index out of range.", details={"shape": shape})
        if rows.size:
            keys = rows * max(n_cols, 1) + cols
            if np.unique(keys).size != keys.size:
                raise InvariantViolation("Duplicate (row, col) entries in triplets.")
        return cls(sp.coo_matrix((values, (rows, cols)), shape=shape))

    @classmethod
    def identity(cls, n: int) -> "SparseMatrix":
        return cls(sp.identity(n, dtype=np.float64, format="csr"))

    @classmethod
    def zeros(cls, shape: tuple[int, int]) -> "SparseMatrix":
        return cls(sp.csr_matrix(shape, dtype=np.float64))

    # --- Introspection ---

    @property
    def shape(self) -> tuple[int, int]:
        return tuple(int(s) for s in self._csr.shape)

    @property
    def rows(self) -> int:
        return self.shape[0]

    @property
    def cols(self) -> int:
        return self.shape[1]

    @property
    def nnz(self) -> int:
        return int(self._csr.nnz)

    @property
    def csr(self) -> sp.csr_matrix:
        """Read-only view of the underlying CSR matrix."""
        return self._csr

    def triplets(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        coo = self._csr.tocoo()
        return (
            coo.row.astype(np.int64),
            coo.col.astype(np.int64),
            coo.data.astype(np.float64),
        )

    def entries(self) -> Iterator[tuple[int, int, float]]:
        rows, cols, values = self.triplets()
        for r, c, v in zip(rows.tolist(), cols.tolist(), values.tolist()):
            yield r, c, v

    def row_columns(self, row: int) -> np.ndarray:
        start, end = self._csr.indptr[row], self._csr.indptr[row + 1]
        return np.asarray(self._csr.indices[start:end])

    def to_dense(self) -> np.ndarray:
        return self._csr.toarray()

    def row_sums(self) -> np.ndarray:
        return np.asarray(self._csr.sum(axis=1)).ravel()

    def col_sums(self) -> np.ndarray:
        return np.asarray(self._csr.sum(axis=0)).ravel()

    def col_nnz(self) -> np.ndarray:
        return np.bincount(self._csr.indices, minlength=self.cols)

    # --- Algebra ---

    def transpose(self) -> "SparseMatrix":
        return SparseMatrix(self._csr.T)

    @property
    def T(self) -> "SparseMatrix":
        return self.transpose()

    def binarized(self) -> "SparseMatrix":
        """Pattern of strictly positive entries as a 0/1 matrix."""
        pattern = self._csr.copy()
        pattern.data = (pattern.data > 0).astype(np.float64)
        return SparseMatrix(pattern)

    def scale_rows(self, factors: np.ndarray) -> "SparseMatrix":
        factors = np.asarray(factors, dtype=np.float64)
        if factors.shape != (self.rows,):
            raise ContractError(
                "scale_rows: factor length does not match row count.",
                details={"rows": self.rows, "factors": list(factors.shape)},
            )
        return SparseMatrix(sp.diags(factors) @ self._csr)

    def __add__(self, other: "SparseMatrix") -> "SparseMatrix":
        if not isinstance(other, SparseMatrix):
            return NotImplemented
        self._check_same_shape(other, "add")
        return SparseMatrix(self._csr + other._csr)

    def __sub__(self, other: "SparseMatrix") -> "SparseMatrix":
        if not isinstance(other, SparseMatrix):
            return NotImplemented
        self._check_same_shape(other, "sub")
        return SparseMatrix(self._csr - other._csr)

    def __matmul__(self, other):
        if isinstance(other, SparseMatrix):
            if self.cols != other.rows:
                raise ContractError(
                    "matmul: inner dimensions differ.",
                    details={"left": list(self.shape), "right": list(other.shape)},
                )
            return SparseMatrix(self._csr @ other._csr)
        dense = np.asarray(other, dtype=np.float64)
        if dense.ndim != 2 or dense.shape[0] != self.cols:
            raise ContractError(
                "matmul: inner dimensions differ.",
                details={"left": list(self.shape), "right": list(dense.shape)},
            )
        return np.asarray(self._csr @ dense)

    def _check_same_shape(self, other: "SparseMatrix", op: str) -> None:
        if self.shape != other.shape:
            raise ContractError(
                f"{op}: shapes differ.",
                details={"left": list(self.shape), "right": list(other.shape)},
            )

    # --- Equality ---

    def __eq__(self, other) -> bool:
        if not isinstance(other, SparseMatrix):
            return NotImplemented
        return (
            self.shape == other.shape
            and np.array_equal(self._csr.indptr, other._csr.indptr)
            and np.array_equal(self._csr.indices, other._csr.indices)
            and np.array_equal(self._csr.data, other._csr.data)
        )

    __hash__ = None

    def __repr__(self) -> str:
        return f"SparseMatrix(shape={self.shape}, nnz={self.nnz})"
