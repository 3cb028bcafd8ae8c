"""
Iterated line-graph stacks.

A stack holds levels 1..m of L^k(G) together with the composed incidence
H^(k) = H^(0,1) ··· H^(k−1,k) and its row-normalized form H̃^(k) for every
k ≤ m. Level k is pruned (when a degree cap is configured for it) before
level k+1 is built from it; the base graph itself is never modified.
"""

from __future__ import annotations

import dataclasses
import logging
from dataclasses import dataclass
from typing import Optional

import numpy as np

from src.exceptions import ContractError, EmptyLevelError, InvariantViolation
from src.graphs.graph import Graph
from src.graphs.sparse import SparseMatrix
from src.linegraph.construction import LineGraphLevel, build_line_graph
from src.linegraph.pruning import bounded_degree_prune
from src.schemas.config import PruneConfig
from src.schemas.reports import LevelSize

logger = logging.getLogger(__name__)


def row_normalize(h: SparseMatrix) -> SparseMatrix:
    """D_H^{-1} H; all-zero rows stay zero."""
    sums = h.row_sums()
    factors = np.divide(1.0, sums, out=np.zeros_like(sums), where=sums > 0)
    return h.scale_rows(factors)


@dataclass(frozen=True, eq=False)
class IlgStack:
    base: Graph
    root: Graph
    levels: tuple[LineGraphLevel, ...]
    composed: tuple[SparseMatrix, ...]
    normalized: tuple[SparseMatrix, ...]
    sizes: tuple[LevelSize, ...]
    prune: PruneConfig
    seed: int

    @property
    def order(self) -> int:
        return len(self.levels)

    @property
    def composed_incidence(self) -> SparseMatrix:
        """H^(m)."""
        return self.composed[-1]

    @property
    def row_normalized(self) -> SparseMatrix:
        """H̃^(m)."""
        return self.normalized[-1]

    def composed_at(self, k: int) -> SparseMatrix:
        return self.composed[k]

    def row_normalized_at(self, k: int) -> SparseMatrix:
        return self.normalized[k]

    def level(self, k: int) -> LineGraphLevel:
        if not 1 <= k <= self.order:
            raise ContractError(f"Level {k} is outside 1..{self.order}.")
        return self.levels[k - 1]

    def level_graph(self, k: int) -> Graph:
        """Graph at order k; order 0 is the unpruned base graph."""
        return self.base if k == 0 else self.level(k).graph


def _protected_columns(composed: SparseMatrix, anchors) -> set[int]:
    """Level-k nodes whose composed-incidence column touches an anchor node."""
    protected: set[int] = set()
    for anchor in anchors:
        protected.update(composed.row_columns(int(anchor)).tolist())
    return protected


def _level_size(order: int, before: Graph, after: Graph, base_nodes: int, degree_product: int) -> LevelSize:
    return LevelSize(
        order=order,
        nodes=before.num_nodes,
        edges=before.num_edges,
        edges_after_prune=after.num_edges,
        max_degree=before.max_degree(),
        size_bound=base_nodes * degree_product / 2 ** order,
        within_bound=before.num_nodes * 2 ** order <= base_nodes * degree_product,
    )


def build_ilg_stack(
    g: Graph,
    m: int,
    prune: Optional[PruneConfig] = None,
    seed: int = 0,
) -> IlgStack:
    """Build L^1(g) .. L^m(g) with optional level-by-level pruning.

    Protected nodes for pruning are derived from `g.anchor_tags`. The size
    of every level is asserted against |V| · Π_{l<k} (d_max^(l) / 2), with
    degrees measured before the level is pruned.

    Raises:
        EmptyLevelError: If some level has no edges before order m is reached.
        InvariantViolation: If a level exceeds the size bound.
    """
    if m < 0:
        raise ContractError("The stack order m must be non-negative.")
    prune = prune or PruneConfig()
    rng = np.random.default_rng(seed)

    composed = [SparseMatrix.identity(g.num_nodes)]
    levels: list[LineGraphLevel] = []
    sizes: list[LevelSize] = []
    anchors = sorted(g.anchor_tags or ())

    current = g
    root = g
    # Π_{l<k} d_max^(l), degrees taken before level l is pruned.
    degree_product = 1
    for k in range(m):
        unpruned = current
        d_k = prune.degree_for(k)
        if d_k is not None:
            protected = _protected_columns(composed[k], anchors)
            current = bounded_degree_prune(unpruned, d_k, protected, rng)
            if k == 0:
                root = current
            else:
                levels[k - 1] = dataclasses.replace(levels[k - 1], graph=current)
        sizes.append(_level_size(k, unpruned, current, g.num_nodes, degree_product))
        degree_product *= unpruned.max_degree()

        try:
            level = build_line_graph(current, order=k + 1)
        except EmptyLevelError:
            logger.warning("Stack construction stopped: level %d has no edges.", k)
            raise

        if level.num_nodes * 2 ** (k + 1) > g.num_nodes * degree_product:
            raise InvariantViolation(
                f"Level {k + 1} has {level.num_nodes} nodes, above the size bound.",
                details={"level": k + 1, "nodes": level.num_nodes},
            )
        levels.append(level)
        composed.append(composed[k] @ level.incidence)
        current = level.graph

    sizes.append(_level_size(m, current, current, g.num_nodes, degree_product))
    normalized = [row_normalize(h) for h in composed]
    return IlgStack(
        base=g,
        root=root,
        levels=tuple(levels),
        composed=tuple(composed),
        normalized=tuple(normalized),
        sizes=tuple(sizes),
        prune=prune,
        seed=seed,
    )

