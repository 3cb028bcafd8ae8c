"""Sparse kernels derived from a graph's adjacency."""

from __future__ import annotations

import numpy as np
import scipy.sparse as sp

from src.graphs.graph import Graph
from src.graphs.sparse import SparseMatrix


def symmetrized(adjacency: SparseMatrix) -> SparseMatrix:
    """Binary pattern of A + Aᵀ."""
    return (adjacency + adjacency.transpose()).binarized()


def undirected_adjacency(g: Graph) -> SparseMatrix:
    """A for undirected graphs, the pattern of A + Aᵀ for directed ones."""
    adjacency = g.adjacency()
    return symmetrized(adjacency) if g.directed else adjacency


def renormalized(adjacency: SparseMatrix) -> SparseMatrix:
    """D̃^{-1/2} (A + I) D̃^{-1/2} with D̃_ii = Σ_j (A_ij + I_ij)."""
    n = adjacency.shape[0]
    a_hat = adjacency.csr + sp.identity(n, dtype=np.float64, format="csr")
    degree = np.asarray(a_hat.sum(axis=1)).ravel()
    scaling = sp.diags(1.0 / np.sqrt(degree))
    return SparseMatrix(scaling @ a_hat @ scaling)


def normalized_adjacency(g: Graph) -> SparseMatrix:
    """Renormalized A of `g` as stored.

    For a directed graph A is not symmetric and D̃ counts out-edges, so the
    result is not symmetric either. The GCN encoder symmetrizes first.
    """
    return renormalized(g.adjacency())
