"""
Filesystem-backed dataset repository.
Edge lists and anchor files are UTF-8 text; features are header-less CSV.
"""

from __future__ import annotations

import json
import logging
from pathlib import Path
from typing import Any

import numpy as np

from src.exceptions import ConfigError, StorageError
from src.graphs.features import from_csv
from src.graphs.graph import AnchorSet, Graph
from src.graphs.parsing import NodeIdMap, load_anchor_text, load_edge_list
from src.repositories.interfaces import DatasetRepository

logger = logging.getLogger(__name__)


def _read_text(path: Path) -> str:
    try:
        return Path(path).read_text(encoding="utf-8")
    except OSError as e:
        raise StorageError(
            f"Could not read '{path}': {e}", details={"path": str(path)}
        ) from e


class FileDatasetRepository(DatasetRepository):
    """Local-file implementation of dataset loading."""

    def load_graph(self, path: Path, directed: bool) -> tuple[Graph, NodeIdMap]:
        """Parse an edge list file.

        Returns:
            tuple[Graph, NodeIdMap]: The graph with degree features and its id map.

        Raises:
            StorageError: If the file cannot be read.
            ParseError: On a malformed line.
        """
        graph, ids = load_edge_list(_read_text(path), directed)
        logger.info(
            "Loaded %s: %d nodes, %d edges (%s).",
            path,
            graph.num_nodes,
            graph.num_edges,
            "directed" if directed else "undirected",
        )
        return graph, ids

    def load_anchors(
        self,
        path: Path,
        source_ids: NodeIdMap,
        target_ids: NodeIdMap,
        *,
        train_ratio: float,
        rng: np.random.Generator,
    ) -> AnchorSet:
        anchors = load_anchor_text(
            _read_text(path), source_ids, target_ids, train_ratio=train_ratio, rng=rng
        )
        logger.info(
            "Loaded %d anchors from %s (%d train).",
            len(anchors),
            path,
            anchors.train_pairs.shape[0],
        )
        return anchors

    def load_features(self, path: Path, num_nodes: int) -> np.ndarray:
        try:
            return from_csv(Path(path), num_nodes)
        except OSError as e:
            raise StorageError(f"Could not read '{path}': {e}") from e

    def load_json(self, path: Path) -> dict[str, Any]:
        """Read a JSON object, e.g. a config file or an earlier report.

        Raises:
            StorageError: If the file cannot be read.
            ConfigError: If it is not a JSON object.
        """
        try:
            payload = json.loads(_read_text(path))
        except json.JSONDecodeError as e:
            raise ConfigError(f"'{path}' is not valid JSON: {e}") from e
        if not isinstance(payload, dict):
            raise ConfigError(f"'{path}' must contain a JSON object.")
        return payload
