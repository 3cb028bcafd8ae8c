"""
Filesystem-backed artifact repository.
All artifacts of one run live under a single output directory.
"""

from __future__ import annotations

import json
import logging
from pathlib import Path
from typing import Any, Iterable, Optional

import pandas as pd
from pydantic import BaseModel

from src.exceptions import StorageError
from src.graphs.parsing import NodeIdMap
from src.graphs.sparse import SparseMatrix
from src.linegraph.stack import IlgStack
from src.matching.correspondence import DENSE, Correspondence
from src.repositories.interfaces import ArtifactRepository
from src.schemas.reports import CorrespondenceManifest, StackManifest

logger = logging.getLogger(__name__)

FLOAT_FORMAT = "%.17g"


class FileArtifactRepository(ArtifactRepository):
    """Writes JSON, CSV, triplet text, checkpoints and SVG figures under `root`."""

    def __init__(self, root: Path):
        self.root = Path(root)

    def _path(self, name: str) -> Path:
        path = self.root / name
        try:
            path.parent.mkdir(parents=True, exist_ok=True)
        except OSError as e:
            raise StorageError(f"Could not create '{path.parent}': {e}") from e
        return path

    def _write_text(self, name: str, text: str) -> Path:
        path = self._path(name)
        try:
            path.write_text(text, encoding="utf-8")
        except OSError as e:
            raise StorageError(
                f"Could not write '{path}': {e}", details={"path": str(path)}
            ) from e
        logger.debug("Wrote %s", path)
        return path

    def _write_lines(self, name: str, lines: Iterable[str]) -> Path:
        return self._write_text(name, "".join(f"{line}\n" for line in lines))

    def write_json(self, name: str, payload: BaseModel) -> Path:
        return self._write_text(name, payload.model_dump_json(indent=2) + "\n")

    def write_schema(self, name: str, model: type[BaseModel]) -> Path:
        return self._write_text(name, json.dumps(model.model_json_schema(), indent=2) + "\n")

    def write_frame(self, name: str, frame: pd.DataFrame) -> Path:
        path = self._path(name)
        try:
            frame.to_csv(path, index=False)
        except OSError as e:
            raise StorageError(f"Could not write '{path}': {e}") from e
        return path

    def write_node_ids(self, side: str, ids: NodeIdMap) -> Path:
        frame = pd.DataFrame(ids.rows(), columns=["dense_id", "external_id"])
        return self.write_frame(f"node_ids_{side}.csv", frame)

    def write_checkpoint(self, name: str, state: dict[str, Any]) -> Path:
        return self._write_text(name, json.dumps(state) + "\n")

    def read_checkpoint(self, name: str) -> dict[str, Any]:
        path = self.root / name
        try:
            return json.loads(path.read_text(encoding="utf-8"))
        except (OSError, json.JSONDecodeError) as e:
            raise StorageError(f"Could not read checkpoint '{path}': {e}") from e

    def write_correspondence(
        self, name: str, correspondence: Correspondence, manifest: CorrespondenceManifest
    ) -> Path:
        """Dense storage → `<name>.csv`; sparse → `<name>.txt` with "i j score" lines."""
        if correspondence.storage == DENSE:
            frame = pd.DataFrame(correspondence.dense())
            path = self._path(f"{name}.csv")
            try:
                frame.to_csv(path, index=False, header=False, float_format=FLOAT_FORMAT)
            except OSError as e:
                raise StorageError(f"Could not write '{path}': {e}") from e
        else:
            rows, cols, values = correspondence.support_triplets()
            path = self._write_lines(
                f"{name}.txt",
                (f"{i} {j} {FLOAT_FORMAT % v}" for i, j, v in zip(rows, cols, values)),
            )
        self.write_json(f"{name}.manifest.json", manifest)
        return path

    def _write_triplets(self, name: str, matrix: SparseMatrix) -> Path:
        return self._write_lines(
            name, (f"{r} {c} {FLOAT_FORMAT % v}" for r, c, v in matrix.entries())
        )

    def write_stack(self, name: str, stack: IlgStack, manifest: StackManifest) -> Path:
        """Per-level edge lists, per-step incidence triplets and a manifest.

        Layout under `<root>/<name>/`:
            level_0.edges           the (possibly pruned) original graph
            level_k.edges           L^k after pruning, k = 1..m
            incidence_k.triplets    H^(k−1,k)
            composed_k.triplets     H^(k), k = 1..m
            manifest.json
        """
        graphs = [stack.root] + [stack.level(k).graph for k in range(1, stack.order + 1)]
        for k, graph in enumerate(graphs):
            self._write_lines(
                f"{name}/level_{k}.edges", (f"{u} {v}" for u, v in graph.edges.tolist())
            )
        for k in range(1, stack.order + 1):
            self._write_triplets(f"{name}/incidence_{k}.triplets", stack.level(k).incidence)
            self._write_triplets(f"{name}/composed_{k}.triplets", stack.composed_at(k))
        self.write_json(f"{name}/manifest.json", manifest)
        logger.info("Exported stack of order %d to %s", stack.order, self.root / name)
        return self.root / name

    def write_figure(self, name: str, figure: Any) -> Optional[Path]:
        import matplotlib.pyplot as plt

        path = self._path(name)
        try:
            figure.savefig(path, format="svg")
        except OSError as e:
            raise StorageError(f"Could not write '{path}': {e}") from e
        finally:
            plt.close(figure)
        return path
