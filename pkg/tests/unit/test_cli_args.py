import json

import pytest
from pydantic import ValidationError

from src.cli import _merge, build_parser, resolve_spec
from src.exceptions import ConfigError
from src.schemas.config import ExperimentSpec, OperatorKind, SyntheticConfig


def _args(*argv):
    return build_parser().parse_args(list(argv))


def _write_json(path, payload):
    path.write_text(json.dumps(payload), encoding="utf-8")
    return path


class TestMerge:
    def test_nested_blocks_merge_key_by_key(self):
        base = {"train": {"alpha": 0.9, "m": 1}, "seed": 0}
        merged = _merge(base, {"train": {"alpha": 0.5}, "seed": 3})
        assert merged == {"train": {"alpha": 0.5, "m": 1}, "seed": 3}
        assert base["train"]["alpha"] == 0.9


class TestResolveSpec:
    def test_defaults(self, monkeypatch):
        monkeypatch.delenv("HGMN_WORKERS", raising=False)
        spec = resolve_spec(_args("synth"), "synthetic")
        assert spec.synthetic == SyntheticConfig()
        assert spec.workers == 1

    def test_preset_then_flags(self):
        spec = resolve_spec(_args("synth", "--preset", "social", "--alpha", "0.2"), "synthetic")
        assert spec.gnn.operator == OperatorKind.GCN
        assert spec.train.m == 2
        assert spec.train.alpha == 0.2

    def test_config_file_sits_between_preset_and_flags(self, tmp_path):
        config = _write_json(
            tmp_path / "config.json",
            {"train": {"alpha": 0.3, "epochs": 7}, "synthetic": {"num_nodes": 40}},
        )
        spec = resolve_spec(
            _args("synth", "--preset", "social", "--config", str(config), "--epochs", "9"), "synthetic"
        )
        assert spec.train.alpha == 0.3
        assert spec.train.epochs == 9
        assert spec.train.m == 2
        assert spec.synthetic.num_nodes == 40

    def test_reuses_the_config_of_an_earlier_run(self, tmp_path):
        earlier = ExperimentSpec(mode="synthetic", synthetic=SyntheticConfig(num_nodes=25), seed=11)
        metrics = _write_json(
            tmp_path / "metrics.json",
            {"config": earlier.model_dump(mode="json"), "config_hash": earlier.config_hash()},
        )
        spec = resolve_spec(_args("synth", "--config", str(metrics)), "synthetic")
        assert spec.config_hash() == earlier.config_hash()

    def test_config_for_another_mode(self, tmp_path):
        config = _write_json(tmp_path / "config.json", {"mode": "dataset"})
        with pytest.raises(ConfigError):
            resolve_spec(_args("synth", "--config", str(config)), "synthetic")

    def test_injected_loader(self, tmp_path):
        spec = resolve_spec(
            _args("synth", "--config", str(tmp_path / "unused.json")),
            "synthetic",
            load_json=lambda path: {"seed": 5},
        )
        assert spec.seed == 5

    def test_variant_flag(self):
        spec = resolve_spec(_args("synth", "--variant", "0-1-2"), "synthetic")
        assert (spec.train.m, spec.train.hierarchical) == (2, True)

    def test_bad_variant(self):
        with pytest.raises(ConfigError):
            resolve_spec(_args("synth", "--variant", "1-2"), "synthetic")

    def test_variants_list(self):
        spec = resolve_spec(_args("synth", "--variants", "0,1,0-1"), "synthetic")
        assert spec.variants == ["0", "1", "0-1"]

    @pytest.mark.parametrize("variants", ["0,1-2", "1,1"])
    def test_bad_variants_list(self, variants):
        with pytest.raises(ValidationError):
            resolve_spec(_args("synth", "--variants", variants), "synthetic")

    def test_prune_and_sweep_lists(self):
        spec = resolve_spec(
            _args("synth", "--prune", "10,5", "--p-delete-sweep", "0.1,0.3"), "synthetic"
        )
        assert spec.train.prune.degrees == [10, 5]
        assert spec.sweeps.p_delete == [0.1, 0.3]

    def test_constraint_violations_surface_as_pydantic_errors(self):
        with pytest.raises(ValidationError):
            resolve_spec(_args("synth", "--alpha", "1.5"), "synthetic")

    def test_dataset_paths(self, toy_dataset):
        spec = resolve_spec(
            _args(
                "dataset",
                "--source-edges", str(toy_dataset["source_edges"]),
                "--target-edges", str(toy_dataset["target_edges"]),
                "--anchors", str(toy_dataset["anchors"]),
                "--hard-assignment", "greedy",
            ),
            "dataset",
        )
        assert spec.dataset.anchors == toy_dataset["anchors"]
        assert spec.hard_assignment == "greedy"
        assert spec.synthetic is None

    def test_dataset_mode_needs_files(self):
        with pytest.raises(ValidationError):
            resolve_spec(_args("dataset"), "dataset")
