"""Synthetic benchmark graphs: Erdős–Rényi sources and edge-deletion targets."""

from __future__ import annotations

import networkx as nx
import numpy as np

from src.exceptions import GraphValidationError
from src.graphs.graph import AnchorSet, Graph


def generate_erdos_renyi(n: int, p: float, seed: int, **graph_kwargs) -> Graph:
    """Undirected G(n, p): each unordered pair is an edge independently with probability p.

    Deterministic for a fixed integer seed.
    """
    if n <= 0:
        raise GraphValidationError("An Erdős–Rényi graph needs at least one node.")
    if not 0.0 <= p <= 1.0:
        raise GraphValidationError("Edge probability must be in [0, 1].")
    sampled = nx.gnp_random_graph(n, p, seed=int(seed), directed=False)
    edges = np.array(list(sampled.edges()), dtype=np.int64).reshape(-1, 2)
    return Graph.from_edges(n, edges, directed=False, **graph_kwargs)


def perturb_delete_edges(
    g: Graph, p_d: float, seed: int, *, train_ratio: float = 0.7
) -> tuple[Graph, AnchorSet]:
    """Remove each edge independently with probability p_d.

    The target keeps the node set and features of `g`; anchors are the
    identity mapping split by `train_ratio`, drawn from the same seeded
    stream after the deletion draws.
    """
    if not 0.0 <= p_d <= 1.0:
        raise GraphValidationError("Deletion probability must be in [0, 1].")
    rng = np.random.default_rng(seed)
    keep = rng.random(g.num_edges) >= p_d
    target = g.with_edges(g.edges[keep])
    anchors = AnchorSet.identity(g.num_nodes, train_ratio, rng)
    return target, anchors
