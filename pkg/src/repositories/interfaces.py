"""
Repository interfaces for dataset and artifact access.

These interfaces keep services decoupled from file layout and formats.
"""

from __future__ import annotations

from pathlib import Path
from typing import TYPE_CHECKING, Any, Optional, Protocol

if TYPE_CHECKING:
    import numpy as np
    import pandas as pd
    from pydantic import BaseModel

    from src.graphs.graph import AnchorSet, Graph
    from src.graphs.parsing import NodeIdMap
    from src.linegraph.stack import IlgStack
    from src.matching.correspondence import Correspondence
    from src.schemas.reports import CorrespondenceManifest, StackManifest


class DatasetRepository(Protocol):
    """Read contract for graphs, anchors, features and configuration files."""

    def load_graph(self, path: Path, directed: bool) -> tuple[Graph, NodeIdMap]: ...

    def load_anchors(
        self,
        path: Path,
        source_ids: NodeIdMap,
        target_ids: NodeIdMap,
        *,
        train_ratio: float,
        rng: np.random.Generator,
    ) -> AnchorSet: ...

    def load_features(self, path: Path, num_nodes: int) -> np.ndarray: ...

    def load_json(self, path: Path) -> dict[str, Any]: ...


class ArtifactRepository(Protocol):
    """Write contract for everything a run leaves in its output directory."""

    root: Path

    def write_json(self, name: str, payload: BaseModel) -> Path: ...

    def write_schema(self, name: str, model: type[BaseModel]) -> Path: ...

    def write_frame(self, name: str, frame: pd.DataFrame) -> Path: ...

    def write_node_ids(self, side: str, ids: NodeIdMap) -> Path: ...

    def write_checkpoint(self, name: str, state: dict[str, Any]) -> Path: ...

    def read_checkpoint(self, name: str) -> dict[str, Any]: ...

    def write_correspondence(
        self, name: str, correspondence: Correspondence, manifest: CorrespondenceManifest
    ) -> Path: ...

    def write_stack(self, name: str, stack: IlgStack, manifest: StackManifest) -> Path: ...

    def write_figure(self, name: str, figure: Any) -> Optional[Path]: ...
