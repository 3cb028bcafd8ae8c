"""Bounded-degree edge deletion applied to a level before its line graph is built."""

from __future__ import annotations

import logging

import numpy as np

from src.exceptions import ContractError
from src.graphs.graph import Graph

logger = logging.getLogger(__name__)


def bounded_degree_prune(
    level_graph: Graph, d_k: int, protected, seed
) -> Graph:
    """Keep at most `d_k` sampled edges per unprotected node.

    Each unprotected node samples min(|candidates|, d_k) of its edges to other
    unprotected nodes; such an edge survives iff both endpoints sampled it.
    Every edge touching a protected node survives unconditionally. `seed` may
    be an int or a shared numpy Generator.
    """
    rng = np.random.default_rng(seed)
    if d_k < 1:
        raise ContractError("Pruning degree d_k must be at least 1.", details={"d_k": d_k})
    is_protected = np.zeros(level_graph.num_nodes, dtype=bool)
    protected = np.asarray(
        sorted(int(p) for p in (protected if protected is not None else ())), dtype=np.int64
    )
    is_protected[protected] = True

    edges = level_graph.edges
    touches_protected = is_protected[edges[:, 0]] | is_protected[edges[:, 1]]
    votes = np.zeros(level_graph.num_edges, dtype=np.int64)

    for node, edge_ids in enumerate(level_graph.incident_edges()):
        if is_protected[node]:
            continue
        candidates = edge_ids[~touches_protected[edge_ids]]
        if candidates.size > d_k:
            candidates = np.sort(rng.choice(candidates, size=d_k, replace=False))
        votes[candidates] += 1

    keep = touches_protected | (votes == 2)
    dropped = int(level_graph.num_edges - keep.sum())
    if dropped:
        logger.debug("Pruned %d of %d edges (d_k=%d).", dropped, level_graph.num_edges, d_k)
    return level_graph.with_edges(edges[keep])
