"""
Single-step line-graph construction.

Line-graph node i stands for edge i of the parent level, in the parent's
canonical edge order. The incidence matrix H has one row per parent node and
one column per line-graph node, with a 1 wherever the parent node is an
endpoint of that edge.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations

import numpy as np

from src.exceptions import ContractError, EmptyLevelError, InvariantViolation
from src.graphs.graph import Graph
from src.graphs.sparse import SparseMatrix


@dataclass(frozen=True, eq=False)
class LineGraphLevel:
    """The k-th iterated line graph.

    `graph` carries the level's nodes, (possibly pruned) edges and features
    X^(k); `endpoints[i]` holds the two parent nodes of line node i in
    canonical order (ascending for undirected, (tail, head) for directed).
    """

    order: int
    parent_edge_of_node: np.ndarray
    endpoints: np.ndarray
    incidence: SparseMatrix
    graph: Graph

    @property
    def adjacency(self) -> SparseMatrix:
        return self.graph.adjacency()

    @property
    def features(self) -> np.ndarray:
        return self.graph.features

    @property
    def num_nodes(self) -> int:
        return self.graph.num_nodes

    @property
    def directed(self) -> bool:
        return self.graph.directed


def incidence_matrix(level_graph: Graph) -> SparseMatrix:
    """H with H[v, e] = 1 iff node v is an endpoint of edge e."""
    num_edges = level_graph.num_edges
    rows = level_graph.edges.reshape(-1)
    cols = np.repeat(np.arange(num_edges, dtype=np.int64), 2)
    return SparseMatrix.from_triplets(
        rows, cols, np.ones(rows.size), (level_graph.num_nodes, num_edges)
    )


def _validate_incidence(h: SparseMatrix) -> None:
    counts = h.col_nnz()
    bad = np.flatnonzero(counts != 2)
    if bad.size:
        raise InvariantViolation(
            f"Incidence column {int(bad[0])} has {int(counts[bad[0]])} nonzeros, expected 2.",
            details={"column": int(bad[0])},
        )
    _, _, values = h.triplets()
    if np.any(values != 1.0):
        raise InvariantViolation("Incidence entries must all equal 1.")


def _rule_based_edges(level_graph: Graph) -> np.ndarray:
    incident = level_graph.incident_edges()
    pairs: list[tuple[int, int]] = []
    if level_graph.directed:
        heads, tails = level_graph.edges[:, 1], level_graph.edges[:, 0]
        for node in range(level_graph.num_nodes):
            edge_ids = incident[node]
            incoming = edge_ids[heads[edge_ids] == node]
            outgoing = edge_ids[tails[edge_ids] == node]
            pairs.extend((int(e1), int(e2)) for e1 in incoming for e2 in outgoing)
    else:
        for node in range(level_graph.num_nodes):
            pairs.extend(combinations(incident[node].tolist(), 2))
    return np.array(pairs, dtype=np.int64).reshape(-1, 2)


def build_line_graph(level_graph: Graph, *, order: int = 1) -> LineGraphLevel:
    """Build L(level_graph).

    Undirected: two line nodes are adjacent iff their edges share an endpoint.
    Directed: e1 → e2 iff head(e1) = tail(e2).

    Raises:
        EmptyLevelError: If `level_graph` has no edges.
    """
    if level_graph.num_edges == 0:
        raise EmptyLevelError(
            f"Cannot build level {order}: level {order - 1} has no edges.", level=order
        )
    incidence = incidence_matrix(level_graph)
    endpoints = np.array(level_graph.edges, copy=True)
    features = lift_features(incidence, level_graph.features, endpoints=endpoints)
    graph = Graph.from_edges(
        level_graph.num_edges,
        _rule_based_edges(level_graph),
        directed=level_graph.directed,
        features=features,
    )
    return LineGraphLevel(
        order=order,
        parent_edge_of_node=np.arange(level_graph.num_edges, dtype=np.int64),
        endpoints=endpoints,
        incidence=incidence,
        graph=graph,
    )


def adjacency_from_incidence(h: SparseMatrix) -> SparseMatrix:
    """A = HᵀH − 2I, binarized.

    For simple graphs the off-diagonal entries of HᵀH are already 0 or 1; the
    result is still clamped to a binary pattern after asserting that.

    Raises:
        InvariantViolation: If a column does not hold exactly two 1s, or HᵀH
            has an off-diagonal entry above 1.
    """
    _validate_incidence(h)
    gram = h.transpose() @ h
    shifted = gram - SparseMatrix.identity(h.cols).scale_rows(np.full(h.cols, 2.0))
    _, _, values = shifted.triplets()
    if values.size and (values.max() > 1.0 or values.min() < 0.0):
        raise InvariantViolation(
            "HᵀH − 2I has entries outside {0, 1}; the parent graph is not simple."
        )
    return shifted.binarized()


def lift_features(h: SparseMatrix, x_prev, *, endpoints=None) -> np.ndarray:
    """Row i is concat(x_prev[u], x_prev[v]) for the endpoints (u, v) of line node i.

    Without `endpoints`, u < v (ascending node id). Pass the parent's edge
    array to keep (tail, head) order for directed graphs.

    Raises:
        InvariantViolation: On a malformed incidence matrix or endpoints that
            disagree with it.
        ContractError: If x_prev does not have one row per incidence row.
    """
    _validate_incidence(h)
    x_prev = np.asarray(x_prev, dtype=np.float64)
    if x_prev.ndim != 2 or x_prev.shape[0] != h.rows:
        raise ContractError(
            "lift_features: feature rows must match incidence rows.",
            details={"incidence": list(h.shape), "features": list(x_prev.shape)},
        )
    if h.cols == 0:
        return np.zeros((0, 2 * x_prev.shape[1]))
    by_column = h.transpose()
    ascending = np.stack([by_column.row_columns(i) for i in range(h.cols)]).reshape(-1, 2)
    if endpoints is None:
        pairs = ascending
    else:
        pairs = np.asarray(endpoints, dtype=np.int64).reshape(-1, 2)
        if pairs.shape != ascending.shape or not np.array_equal(
            np.sort(pairs, axis=1), ascending
        ):
            raise InvariantViolation("Endpoints disagree with the incidence matrix.")
    return np.hstack([x_prev[pairs[:, 0]], x_prev[pairs[:, 1]]])
