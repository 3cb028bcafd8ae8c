"""
Text ingestion for edge lists and anchor files.

Edge lists are UTF-8 text with one "u v" pair per line and '#' comments.
External ids need not be contiguous: they are remapped to a dense 0-based
range in ascending numeric order, and the mapping is returned alongside the
graph so it can be persisted next to outputs.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Optional

import numpy as np

from src.exceptions import GraphValidationError, ParseError, ValidationError
from src.graphs.graph import TEST, TRAIN, AnchorSet, Graph

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class NodeIdMap:
    """Dense id i corresponds to external id `external_ids[i]`."""

    external_ids: tuple[int, ...]

    def __len__(self) -> int:
        return len(self.external_ids)

    def __post_init__(self):
        lookup = {ext: i for i, ext in enumerate(self.external_ids)}
        object.__setattr__(self, "_lookup", lookup)

    def dense_id(self, external_id: int) -> Optional[int]:
        return self._lookup.get(external_id)

    def rows(self) -> list[tuple[int, int]]:
        return list(enumerate(self.external_ids))


def _content_lines(text: str):
    for line_number, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if line:
            yield line_number, line.split()


def _parse_int(token: str, line_number: int) -> int:
    try:
        return int(token)
    except ValueError as exc:
        raise ParseError(
            f"Line {line_number}: '{token}' is not an integer node id.",
            line_number=line_number,
        ) from exc


def load_edge_list(text: str, directed: bool, *, features=None) -> tuple[Graph, NodeIdMap]:
    """Parse an edge list into a validated Graph plus its external id mapping.

    Duplicate lines are dropped (for undirected graphs "u v" and "v u" are the
    same edge); self-loops are rejected.

    Raises:
        ParseError: On a malformed line, naming the line number.
        GraphValidationError: On a self-loop line.
    """
    raw_edges: list[tuple[int, int]] = []
    for line_number, tokens in _content_lines(text):
        if len(tokens) != 2:
            raise ParseError(
                f"Line {line_number}: expected 'u v', got {len(tokens)} fields.",
                line_number=line_number,
            )
        u, v = (_parse_int(token, line_number) for token in tokens)
        if u == v:
            raise GraphValidationError(
                f"Line {line_number}: self-loop on node {u} is not allowed.",
                details={"line": line_number, "node": u},
            )
        raw_edges.append((u, v))

    external_ids = sorted({node for edge in raw_edges for node in edge})
    id_map = NodeIdMap(tuple(external_ids))
    dense = np.array(
        [(id_map.dense_id(u), id_map.dense_id(v)) for u, v in raw_edges], dtype=np.int64
    ).reshape(-1, 2)
    if not directed:
        dense = np.sort(dense, axis=1)
    unique = np.unique(dense, axis=0) if len(dense) else dense
    if len(unique) != len(dense):
        logger.debug("Dropped %d duplicate edge lines.", len(dense) - len(unique))

    graph = Graph.from_edges(len(id_map), unique, directed=directed, features=features)
    return graph, id_map


def load_anchor_text(
    text: str,
    source_ids: NodeIdMap,
    target_ids: NodeIdMap,
    *,
    train_ratio: float,
    rng: np.random.Generator,
) -> AnchorSet:
    """Parse "src tgt [train|test]" lines into an AnchorSet over dense ids.

    When every line carries an explicit label the labels are used; otherwise
    the split is drawn by a seeded shuffle with `train_ratio`.

    Raises:
        ParseError: On malformed lines or a mix of labeled and unlabeled lines.
        ValidationError: On ids absent from either graph.
    """
    pairs: list[tuple[int, int]] = []
    labels: list[Optional[str]] = []
    for line_number, tokens in _content_lines(text):
        if len(tokens) not in (2, 3):
            raise ParseError(
                f"Line {line_number}: expected 'src tgt [train|test]'.",
                line_number=line_number,
            )
        src, tgt = (_parse_int(token, line_number) for token in tokens[:2])
        dense_src, dense_tgt = source_ids.dense_id(src), target_ids.dense_id(tgt)
        if dense_src is None or dense_tgt is None:
            raise ValidationError(
                f"Line {line_number}: anchor ({src}, {tgt}) references an unknown node.",
                details={"line": line_number},
            )
        pairs.append((dense_src, dense_tgt))
        label = tokens[2].lower() if len(tokens) == 3 else None
        if label is not None and label not in (TRAIN, TEST):
            raise ParseError(
                f"Line {line_number}: split label must be 'train' or 'test'.",
                line_number=line_number,
            )
        labels.append(label)

    if not pairs:
        raise ValidationError("The anchor file contains no pairs.")
    explicit = [label is not None for label in labels]
    if all(explicit):
        return AnchorSet.from_labels(pairs, labels)
    if any(explicit):
        raise ParseError("Anchor file mixes labeled and unlabeled lines.")
    return AnchorSet.split(pairs, train_ratio, rng)
