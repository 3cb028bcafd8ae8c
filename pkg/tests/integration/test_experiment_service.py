import json

import numpy as np
import pandas as pd
import pytest

from src.events import experiment_finished, replicate_finished
from src.exceptions import ConfigError
from src.graphs.synthetic import generate_erdos_renyi
from src.repositories.file_dataset_repository import FileDatasetRepository
from src.schemas.config import (
    DatasetConfig,
    ExperimentSpec,
    FeatureConfig,
    SweepConfig,
    SyntheticConfig,
)
from src.services import get_report_service
from src.services.experiment_service import ExperimentService, _apply_sweep, _apply_variant, assign_features


@pytest.fixture
def service():
    return ExperimentService(FileDatasetRepository())


@pytest.fixture
def synth_spec(tmp_path, small_gnn, quick_train):
    return ExperimentSpec(
        mode="synthetic",
        synthetic=SyntheticConfig(num_nodes=12, edge_probability=0.3, p_delete=0.1),
        gnn=small_gnn,
        train=quick_train.model_copy(update={"epochs": 3}),
        output_dir=tmp_path / "run",
    )


@pytest.fixture
def dataset_spec(tmp_path, toy_dataset, small_gnn, quick_train):
    return ExperimentSpec(
        mode="dataset",
        dataset=DatasetConfig(**toy_dataset),
        gnn=small_gnn,
        train=quick_train.model_copy(update={"epochs": 3, "m": 1, "topk": 3}),
        output_dir=tmp_path / "run",
        hard_assignment="greedy",
    )


class TestFeatures:
    def test_degree_features(self):
        g = assign_features(generate_erdos_renyi(10, 0.3, seed=0), FeatureConfig(max_degree=4), seed=0)
        assert g.features.shape == (10, 5)
        np.testing.assert_array_equal(g.features.sum(axis=1), np.ones(10))

    def test_random_features_can_be_shared(self):
        g = generate_erdos_renyi(6, 0.5, seed=0)
        config = FeatureConfig(kind="random", width=3)
        shared = np.arange(18, dtype=float).reshape(6, 3)
        assert assign_features(g, config, seed=1, shared=shared).features.tolist() == shared.tolist()
        a = assign_features(g, config, seed=1).features
        assert len({tuple(row) for row in a}) == 6

    def test_file_kind_keeps_loaded_features(self):
        g = generate_erdos_renyi(6, 0.5, seed=0)
        assert assign_features(g, FeatureConfig(kind="file"), seed=0) is g


class TestSweeps:
    def test_points_override_one_setting(self, synth_spec):
        assert _apply_sweep(synth_spec, "p_delete", 0.4).synthetic.p_delete == 0.4
        assert _apply_sweep(synth_spec, "alpha", 0.1).train.alpha == 0.1
        assert _apply_sweep(synth_spec, "layers", 1).gnn.layers == 1
        assert _apply_sweep(synth_spec, "topk", 5).train.topk == 5
        assert _apply_sweep(synth_spec, "topk", None).train.topk is None
        assert _apply_sweep(synth_spec, "none", None) is synth_spec

    def test_variant_overrides_the_level_list(self, synth_spec):
        train = _apply_variant(synth_spec, "0-1-2").train
        assert (train.m, train.hierarchical, train.variant) == (2, True, "0-1-2")
        assert _apply_variant(synth_spec, None) is synth_spec

    def test_unknown_sweep(self, synth_spec):
        with pytest.raises(ConfigError):
            _apply_sweep(synth_spec, "lr", 0.1)


class TestSyntheticProtocol:
    def test_pair_shares_features_and_identity_anchors(self, service, synth_spec):
        g_s, g_t, anchors = service.synthetic_pair(synth_spec, seed=3)
        assert g_s.num_nodes == g_t.num_nodes == 12
        assert g_t.num_edges <= g_s.num_edges
        np.testing.assert_array_equal(anchors.pairs[:, 0], anchors.pairs[:, 1])

    def test_run_writes_rows_in_job_order(self, service, synth_spec, signal_tracker):
        spec = synth_spec.model_copy(
            update={"replicates": 2, "workers": 2, "sweeps": SweepConfig(alpha=[0.2, 0.8])}
        )
        with signal_tracker(replicate_finished) as replicates, signal_tracker(experiment_finished) as done:
            report = service.run_synthetic(spec, get_report_service(spec.output_dir))
        assert [(r.value, r.replicate) for r in report.rows] == [(0.2, 0), (0.2, 1), (0.8, 0), (0.8, 1)]
        assert [r.seed for r in report.rows] == [0, 1, 0, 1]
        assert len(replicates.calls) == 4
        assert done.data["command"] == "synth"
        assert len(report.summary) == 2
        assert len(report.loss_curve) == 3
        assert (spec.output_dir / "replicates.csv").is_file()

    def test_variants_share_the_replicate_seeds(self, service, synth_spec, signal_tracker):
        spec = synth_spec.model_copy(update={"replicates": 2, "variants": ["0", "1"]})
        with signal_tracker(replicate_finished) as replicates:
            report = service.run_synthetic(spec, get_report_service(spec.output_dir))
        assert [(r.variant, r.seed) for r in report.rows] == [("0", 0), ("0", 1), ("1", 0), ("1", 1)]
        assert [(r.variant, r.replicates) for r in report.summary] == [("0", 2), ("1", 2)]
        assert sorted(call["variant"] for call in replicates.calls) == ["0", "0", "1", "1"]

    def test_topk_sweep_adds_a_dense_point(self, service, synth_spec):
        spec = synth_spec.model_copy(update={"sweeps": SweepConfig(topk=[2])})
        report = service.run_synthetic(spec, get_report_service(spec.output_dir))
        assert [(r.sweep, r.value) for r in report.summary] == [("topk", 2.0), ("topk", None)]

    def test_same_spec_same_metrics(self, service, synth_spec):
        first = service.run_synthetic(synth_spec, get_report_service(synth_spec.output_dir))
        second = service.run_synthetic(synth_spec, get_report_service(synth_spec.output_dir))
        assert first.p_at == second.p_at
        assert first.loss_curve == second.loss_curve

    def test_rejects_dataset_specs(self, service, dataset_spec):
        with pytest.raises(ConfigError):
            service.run_synthetic(dataset_spec, get_report_service(dataset_spec.output_dir))


class TestDatasetRun:
    def test_exports(self, service, dataset_spec):
        report = service.run_dataset(dataset_spec, get_report_service(dataset_spec.output_dir))
        out = dataset_spec.output_dir
        assert 0.0 <= report.matching_accuracy <= 1.0
        assert set(report.p_at) == {1, 10, 30}
        assert report.p_at[10] == 1.0

        manifest = json.loads((out / "correspondence.manifest.json").read_text())
        assert manifest["storage"] == "sparse"
        assert manifest["shape"] == [10, 10]
        triplets = np.loadtxt(out / "correspondence.txt", ndmin=2)
        rows, cols = triplets[:, 0].astype(int), triplets[:, 1].astype(int)
        assert np.bincount(rows, minlength=10).min() >= 3
        exported = set(zip(rows.tolist(), cols.tolist()))
        # Every ground-truth pair, train or test, stays in the sparse export.
        assert {(i, i) for i in range(7)} <= exported
        assert sorted(p.name for p in (out / "checkpoints").iterdir()) == ["high.json", "local.json"]
        ids = pd.read_csv(out / "node_ids_source.csv")
        assert ids["external_id"].tolist() == list(range(100, 110))

    def test_hierarchical_checkpoints(self, service, dataset_spec):
        spec = dataset_spec.model_copy(
            update={"train": dataset_spec.train.model_copy(update={"hierarchical": True, "topk": None})}
        )
        service.run_dataset(spec, get_report_service(spec.output_dir))
        names = sorted(p.name for p in (spec.output_dir / "checkpoints").iterdir())
        assert names == ["level0.json", "level1.json"]
        assert (spec.output_dir / "correspondence.csv").is_file()
