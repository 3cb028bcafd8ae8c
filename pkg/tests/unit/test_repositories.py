import json

import numpy as np
import pandas as pd
import pytest

from src.exceptions import ConfigError, ParseError, StorageError
from src.graphs.parsing import NodeIdMap
from src.graphs.sparse import SparseMatrix
from src.linegraph import build_ilg_stack
from src.matching import Correspondence
from src.repositories import get_artifact_repository, get_dataset_repository
from src.repositories.file_artifact_repository import FileArtifactRepository
from src.repositories.file_dataset_repository import FileDatasetRepository
from src.schemas.config import PruneConfig
from src.schemas.reports import CorrespondenceManifest, LevelSize
from src.services.linegraph_service import stack_manifest
from tests.helpers import complete, cycle


def _manifest(s, seed=0):
    return CorrespondenceManifest(
        shape=s.shape, storage=s.storage, provenance=s.provenance, config_hash="abc", seed=seed
    )


def _load_triplets(path, shape):
    data = np.loadtxt(path, ndmin=2)
    return SparseMatrix.from_triplets(data[:, 0].astype(int), data[:, 1].astype(int), data[:, 2], shape)


class TestDatasetRepository:
    def test_is_a_singleton(self):
        assert get_dataset_repository() is get_dataset_repository()

    def test_loads_the_toy_dataset(self, toy_dataset):
        repo = FileDatasetRepository()
        g_s, ids_s = repo.load_graph(toy_dataset["source_edges"], directed=False)
        g_t, ids_t = repo.load_graph(toy_dataset["target_edges"], directed=False)
        anchors = repo.load_anchors(
            toy_dataset["anchors"], ids_s, ids_t, train_ratio=0.5, rng=np.random.default_rng(0)
        )
        assert (g_s.num_nodes, g_s.num_edges) == (10, 12)
        assert (g_t.num_nodes, g_t.num_edges) == (10, 11)
        assert len(anchors) == 7
        assert anchors.train_pairs.shape[0] == 4

    def test_missing_file(self, tmp_path):
        with pytest.raises(StorageError):
            FileDatasetRepository().load_graph(tmp_path / "missing.edges", directed=False)

    def test_malformed_file(self, edge_file):
        with pytest.raises(ParseError):
            FileDatasetRepository().load_graph(edge_file("1 2 3 4\n"), directed=False)

    def test_features_csv(self, tmp_path):
        path = tmp_path / "features.csv"
        path.write_text("0.5,1\n2,3\n", encoding="utf-8")
        assert FileDatasetRepository().load_features(path, 2).tolist() == [[0.5, 1.0], [2.0, 3.0]]

    def test_load_json_requires_an_object(self, tmp_path):
        path = tmp_path / "config.json"
        path.write_text("[1, 2]", encoding="utf-8")
        with pytest.raises(ConfigError):
            FileDatasetRepository().load_json(path)
        path.write_text("{not json", encoding="utf-8")
        with pytest.raises(ConfigError):
            FileDatasetRepository().load_json(path)


class TestArtifactRepository:
    def test_factory_roots_the_repository(self, tmp_path):
        assert get_artifact_repository(tmp_path).root == tmp_path

    def test_dense_correspondence_is_a_headerless_csv(self, tmp_path):
        repo = FileArtifactRepository(tmp_path)
        s = Correspondence.from_array([[0.25, 0.75], [1.0, 0.0]], provenance="sinkhorned")
        path = repo.write_correspondence("correspondence", s, _manifest(s))
        assert path.name == "correspondence.csv"
        frame = pd.read_csv(path, header=None)
        assert frame.to_numpy().tolist() == [[0.25, 0.75], [1.0, 0.0]]
        manifest = json.loads((tmp_path / "correspondence.manifest.json").read_text())
        assert manifest["storage"] == "dense"
        assert manifest["shape"] == [2, 2]

    def test_sparse_correspondence_is_triplet_text(self, tmp_path):
        repo = FileArtifactRepository(tmp_path)
        support = np.array([[True, False], [False, True]])
        s = Correspondence.from_array([[0.5, 0.0], [0.0, 1.0]], support=support)
        path = repo.write_correspondence("correspondence", s, _manifest(s))
        assert path.read_text().splitlines() == ["0 0 0.5", "1 1 1"]

    def test_node_ids_table(self, tmp_path):
        repo = FileArtifactRepository(tmp_path)
        path = repo.write_node_ids("source", NodeIdMap((10, 20, 30)))
        frame = pd.read_csv(path)
        assert list(frame.columns) == ["dense_id", "external_id"]
        assert frame["external_id"].tolist() == [10, 20, 30]

    def test_checkpoint_round_trip(self, tmp_path):
        repo = FileArtifactRepository(tmp_path)
        state = {"version": 1, "parameters": {"w": [[1.0, 2.0]]}}
        repo.write_checkpoint("checkpoints/local.json", state)
        assert repo.read_checkpoint("checkpoints/local.json") == state

    def test_missing_checkpoint(self, tmp_path):
        with pytest.raises(StorageError):
            FileArtifactRepository(tmp_path).read_checkpoint("checkpoints/high.json")

    def test_stack_export_layout(self, tmp_path):
        repo = FileArtifactRepository(tmp_path)
        stack = build_ilg_stack(cycle(4), 2)
        root = repo.write_stack("stack", stack, stack_manifest(stack))
        names = sorted(p.name for p in root.iterdir())
        assert names == [
            "composed_1.triplets",
            "composed_2.triplets",
            "incidence_1.triplets",
            "incidence_2.triplets",
            "level_0.edges",
            "level_1.edges",
            "level_2.edges",
            "manifest.json",
        ]
        for k in (1, 2):
            assert _load_triplets(root / f"composed_{k}.triplets", stack.composed_at(k).shape) == (
                stack.composed_at(k)
            )
        manifest = json.loads((root / "manifest.json").read_text())
        assert [LevelSize(**level).nodes for level in manifest["levels"]] == [4, 4, 4]

    def test_level_zero_is_the_pruned_graph(self, tmp_path):
        repo = FileArtifactRepository(tmp_path)
        stack = build_ilg_stack(complete(6), 1, PruneConfig(degrees=[3]), seed=0)
        root = repo.write_stack("stack", stack, stack_manifest(stack))
        lines = (root / "level_0.edges").read_text().splitlines()
        assert len(lines) == stack.root.num_edges
        assert stack.root.num_edges < complete(6).num_edges
