"""
Line-graph export service.

Responsibilities:
- Load a graph from an edge list.
- Build its iterated line-graph stack with optional pruning.
- Export levels, incidence matrices and a size manifest.
"""

from __future__ import annotations

import logging
from pathlib import Path
from typing import Optional

from src.graphs.graph import Graph
from src.linegraph.stack import IlgStack, build_ilg_stack
from src.repositories.interfaces import ArtifactRepository, DatasetRepository
from src.schemas.config import PruneConfig
from src.schemas.reports import StackManifest

logger = logging.getLogger(__name__)

STACK_DIR = "stack"


def stack_manifest(stack: IlgStack) -> StackManifest:
    base = stack.base
    return StackManifest(
        directed=base.directed,
        order=stack.order,
        base_nodes=base.num_nodes,
        base_edges=base.num_edges,
        feature_width=base.feature_width,
        prune_degrees=list(stack.prune.degrees),
        seed=stack.seed,
        levels=list(stack.sizes),
    )


class LineGraphService:
    """Builds and exports iterated line-graph stacks."""

    def __init__(self, dataset_repository: DatasetRepository, artifact_repository: ArtifactRepository):
        self._datasets = dataset_repository
        self._artifacts = artifact_repository

    def build(self, g: Graph, m: int, prune: Optional[PruneConfig] = None, seed: int = 0) -> IlgStack:
        return build_ilg_stack(g, m, prune=prune, seed=seed)

    def export_from_file(
        self,
        edges: Path,
        m: int,
        *,
        directed: bool = False,
        prune: Optional[PruneConfig] = None,
        seed: int = 0,
    ) -> StackManifest:
        """Build the order-m stack of the graph in `edges` and write it out.

        Returns:
            StackManifest: The manifest that was written next to the levels.

        Raises:
            StorageError: If the edge list cannot be read or outputs cannot be written.
            ParseError: On a malformed edge list.
            EmptyLevelError: If a level runs out of edges before order m.
        """
        g, _ = self._datasets.load_graph(edges, directed)
        stack = self.build(g, m, prune=prune, seed=seed)
        manifest = stack_manifest(stack)
        self._artifacts.write_stack(STACK_DIR, stack, manifest)
        for size in manifest.levels:
            logger.info(
                "level %d: %d nodes, %d edges (%d after pruning), bound %.1f",
                size.order,
                size.nodes,
                size.edges,
                size.edges_after_prune,
                size.size_bound,
            )
        return manifest
