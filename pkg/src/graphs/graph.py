"""
Graph and anchor-set value types.

Both are immutable after construction; constructors validate every invariant
and canonicalize storage (undirected edges stored once as (u, v) with u < v,
edge list sorted lexicographically) so equal graphs compare equal.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np
import scipy.sparse as sp
from scipy.sparse.csgraph import connected_components

from src.exceptions import GraphValidationError, ValidationError
from src.graphs.features import DEFAULT_MAX_DEGREE, degree_one_hot
from src.graphs.sparse import SparseMatrix


def _frozen(array: np.ndarray) -> np.ndarray:
    array = np.array(array, copy=True)
    array.flags.writeable = False
    return array


@dataclass(frozen=True, eq=False)
class Graph:
    """Directed or undirected simple graph with a node-feature matrix.

    Attributes:
        directed: Whether edges are ordered (tail, head) pairs.
        num_nodes: Node ids are 0..num_nodes-1.
        edges: int64 array of shape (E, 2) in canonical order.
        features: float64 array of shape (num_nodes, d).
        anchor_tags: Optional set of node ids flagged as ground-truth-relevant.
        edge_features: Optional (E, d_e) matrix; stored but not consumed by any operator.
    """

    directed: bool
    num_nodes: int
    edges: np.ndarray
    features: np.ndarray
    anchor_tags: Optional[frozenset] = None
    edge_features: Optional[np.ndarray] = field(default=None)

    @classmethod
    def from_edges(
        cls,
        num_nodes: int,
        edges,
        *,
        directed: bool = False,
        features=None,
        anchor_tags=None,
        edge_features=None,
        max_degree: int = DEFAULT_MAX_DEGREE,
    ) -> "Graph":
        """Validate and canonicalize an edge list.

        Without explicit features, nodes get one-hot degree encodings.

        Raises:
            GraphValidationError: On out-of-range ids, self-loops or duplicate edges.
        """
        if num_nodes < 0:
            raise GraphValidationError("num_nodes must be non-negative.")
        edge_array = np.asarray(edges, dtype=np.int64).reshape(-1, 2)
        if edge_array.size and (edge_array.min() < 0 or edge_array.max() >= num_nodes):
            raise GraphValidationError(
                "Edge endpoint out of range.", details={"num_nodes": num_nodes}
            )
        loops = edge_array[:, 0] == edge_array[:, 1]
        if np.any(loops):
            node = int(edge_array[loops][0, 0])
            raise GraphValidationError(
                f"Self-loop on node {node} is not allowed.", details={"node": node}
            )
        if not directed:
            edge_array = np.sort(edge_array, axis=1)

        order = np.lexsort((edge_array[:, 1], edge_array[:, 0]))
        edge_array = edge_array[order]
        if edge_features is not None:
            edge_features = np.asarray(edge_features, dtype=np.float64)[order]

        if len(edge_array) > 1:
            duplicate = np.all(edge_array[1:] == edge_array[:-1], axis=1)
            if np.any(duplicate):
                u, v = edge_array[1:][duplicate][0].tolist()
                raise GraphValidationError(
                    f"Duplicate edge ({u}, {v}).", details={"edge": [u, v]}
                )

        if features is None:
            features = degree_one_hot(_degrees(num_nodes, edge_array), max_degree)
        features = np.asarray(features, dtype=np.float64)
        if features.ndim != 2 or features.shape[0] != num_nodes:
            raise GraphValidationError(
                "Feature row count must equal num_nodes.",
                details={"rows": int(features.shape[0]), "num_nodes": num_nodes},
            )
        if edge_features is not None and edge_features.shape[0] != len(edge_array):
            raise GraphValidationError("Edge feature rows must match the edge count.")
        if anchor_tags is not None:
            anchor_tags = frozenset(int(a) for a in anchor_tags)
            if any(a < 0 or a >= num_nodes for a in anchor_tags):
                raise GraphValidationError("Anchor tag out of range.")

        return cls(
            directed=bool(directed),
            num_nodes=int(num_nodes),
            edges=_frozen(edge_array),
            features=_frozen(features),
            anchor_tags=anchor_tags,
            edge_features=None if edge_features is None else _frozen(edge_features),
        )

    # --- Derived structure ---

    @property
    def num_edges(self) -> int:
        return int(self.edges.shape[0])

    @property
    def feature_width(self) -> int:
        return int(self.features.shape[1])

    def adjacency(self) -> SparseMatrix:
        """Binary adjacency; A[u, v] = 1 for u→v, symmetric when undirected."""
        rows, cols = self.edges[:, 0], self.edges[:, 1]
        if not self.directed:
            rows, cols = np.concatenate([rows, cols]), np.concatenate([cols, rows])
        values = np.ones(rows.size, dtype=np.float64)
        return SparseMatrix(
            sp.coo_matrix((values, (rows, cols)), shape=(self.num_nodes, self.num_nodes))
        )

    def degrees(self) -> np.ndarray:
        """Number of incident edges per node (in + out for directed graphs)."""
        return _degrees(self.num_nodes, self.edges)

    def max_degree(self) -> int:
        degrees = self.degrees()
        return int(degrees.max()) if degrees.size else 0

    def incident_edges(self) -> list[np.ndarray]:
        """Edge indices incident to each node, ascending."""
        endpoints = np.concatenate([self.edges[:, 0], self.edges[:, 1]])
        edge_ids = np.concatenate([np.arange(self.num_edges)] * 2)
        order = np.lexsort((edge_ids, endpoints))
        bounds = np.searchsorted(endpoints[order], np.arange(self.num_nodes + 1))
        return [edge_ids[order][bounds[i]:bounds[i + 1]] for i in range(self.num_nodes)]

    def is_connected(self) -> bool:
        if self.num_nodes == 0:
            return False
        count, _ = connected_components(self.adjacency().csr, directed=False)
        return count == 1

    # --- Derived graphs ---

    def with_features(self, features) -> "Graph":
        return Graph.from_edges(
            self.num_nodes,
            self.edges,
            directed=self.directed,
            features=features,
            anchor_tags=self.anchor_tags,
            edge_features=self.edge_features,
        )

    def with_edges(self, edges) -> "Graph":
        """Same nodes and features, different edge set (edge features dropped)."""
        return Graph.from_edges(
            self.num_nodes,
            edges,
            directed=self.directed,
            features=self.features,
            anchor_tags=self.anchor_tags,
        )

    def with_anchor_tags(self, anchor_tags) -> "Graph":
        return Graph.from_edges(
            self.num_nodes,
            self.edges,
            directed=self.directed,
            features=self.features,
            anchor_tags=anchor_tags,
            edge_features=self.edge_features,
        )

    def permuted(self, permutation) -> "Graph":
        """Relabel node i as permutation[i]; feature rows move with their nodes."""
        permutation = np.asarray(permutation, dtype=np.int64)
        if sorted(permutation.tolist()) != list(range(self.num_nodes)):
            raise GraphValidationError("Not a permutation of the node set.")
        features = np.empty_like(self.features)
        features[permutation] = self.features
        tags = None
        if self.anchor_tags is not None:
            tags = {int(permutation[a]) for a in self.anchor_tags}
        return Graph.from_edges(
            self.num_nodes,
            permutation[self.edges],
            directed=self.directed,
            features=features,
            anchor_tags=tags,
        )

    def __eq__(self, other) -> bool:
        if not isinstance(other, Graph):
            return NotImplemented
        return (
            self.directed == other.directed
            and self.num_nodes == other.num_nodes
            and np.array_equal(self.edges, other.edges)
            and np.array_equal(self.features, other.features)
            and self.anchor_tags == other.anchor_tags
        )

    __hash__ = None

    def __repr__(self) -> str:
        kind = "directed" if self.directed else "undirected"
        return (
            f"Graph({kind}, nodes={self.num_nodes}, edges={self.num_edges}, "
            f"feature_width={self.feature_width})"
        )


def _degrees(num_nodes: int, edges: np.ndarray) -> np.ndarray:
    return np.bincount(edges.reshape(-1), minlength=num_nodes).astype(np.int64)


TRAIN = "train"
TEST = "test"


@dataclass(frozen=True, eq=False)
class AnchorSet:
    """One-to-one ground-truth pairs, each labeled train or test."""

    pairs: np.ndarray
    train_mask: np.ndarray

    def __post_init__(self):
        pairs = np.asarray(self.pairs, dtype=np.int64).reshape(-1, 2)
        mask = np.asarray(self.train_mask, dtype=bool).reshape(-1)
        if mask.shape[0] != pairs.shape[0]:
            raise ValidationError("Every anchor pair needs exactly one split label.")
        for side, name in ((0, "source"), (1, "target")):
            if np.unique(pairs[:, side]).size != pairs.shape[0]:
                raise ValidationError(
                    f"Anchor pairs are not one-to-one: a {name} node appears twice."
                )
        object.__setattr__(self, "pairs", _frozen(pairs))
        object.__setattr__(self, "train_mask", _frozen(mask))

    @classmethod
    def split(cls, pairs, train_ratio: float, rng: np.random.Generator) -> "AnchorSet":
        """Seeded shuffle; the first round(train_ratio * k) shuffled pairs train."""
        if not 0.0 <= train_ratio <= 1.0:
            raise ValidationError("train_ratio must be in [0, 1].")
        pairs = np.asarray(pairs, dtype=np.int64).reshape(-1, 2)
        n_train = int(round(train_ratio * pairs.shape[0]))
        order = rng.permutation(pairs.shape[0])
        mask = np.zeros(pairs.shape[0], dtype=bool)
        mask[order[:n_train]] = True
        return cls(pairs=pairs, train_mask=mask)

    @classmethod
    def identity(cls, num_nodes: int, train_ratio: float, rng: np.random.Generator) -> "AnchorSet":
        ids = np.arange(num_nodes)
        return cls.split(np.stack([ids, ids], axis=1), train_ratio, rng)

    @classmethod
    def from_labels(cls, pairs, labels) -> "AnchorSet":
        labels = list(labels)
        unknown = {label for label in labels if label not in (TRAIN, TEST)}
        if unknown:
            raise ValidationError(f"Unknown split labels: {sorted(unknown)}")
        return cls(pairs=pairs, train_mask=[label == TRAIN for label in labels])

    def __len__(self) -> int:
        return int(self.pairs.shape[0])

    @property
    def train_pairs(self) -> np.ndarray:
        return self.pairs[self.train_mask]

    @property
    def test_pairs(self) -> np.ndarray:
        return self.pairs[~self.train_mask]

    def labels(self) -> list[str]:
        return [TRAIN if flag else TEST for flag in self.train_mask.tolist()]

    def __eq__(self, other) -> bool:
        if not isinstance(other, AnchorSet):
            return NotImplemented
        return np.array_equal(self.pairs, other.pairs) and np.array_equal(
            self.train_mask, other.train_mask
        )

    __hash__ = None
