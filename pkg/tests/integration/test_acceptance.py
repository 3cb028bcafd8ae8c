"""
Benchmark-level checks of the matching engine.

Everything except the reachability oracle is marked `heavy` and only runs
with HGMN_RUN_HEAVY=1.
"""

import numpy as np
import pytest
from scipy.stats import binomtest

from src.graphs.features import random_injective
from src.graphs.graph import AnchorSet
from src.graphs.synthetic import generate_erdos_renyi
from src.linegraph.lemma import run_lemma1_oracle
from src.matching.evaluation import precision_at_k
from src.matching.training import train_khgmn
from src.repositories.file_dataset_repository import FileDatasetRepository
from src.schemas.config import ExperimentSpec, GnnConfig, SyntheticConfig, TrainConfig
from src.services.experiment_service import ExperimentService, train_variant

ABLATION_SEEDS = range(20)
DEPTH_SEEDS = range(10)


def _ablation_spec(layers=3):
    return ExperimentSpec(
        mode="synthetic",
        synthetic=SyntheticConfig(num_nodes=100, edge_probability=0.1, p_delete=0.3),
        gnn=GnnConfig(layers=layers),
        train=TrainConfig(alpha=0.9, train_ratio=0.7),
    )


def _mean_p_at_1(spec, train, seeds):
    service = ExperimentService(FileDatasetRepository())
    scores = []
    for seed in seeds:
        g_s, g_t, anchors = service.synthetic_pair(spec, seed)
        result = train_variant(g_s, g_t, anchors, train.model_copy(update={"seed": seed}), spec.gnn)
        scores.append(precision_at_k(result.correspondence, anchors, 1))
    return np.array(scores)


def test_reachability_oracle_on_random_graphs():
    result = run_lemma1_oracle(num_graphs=50, max_nodes=30, p=0.3, orders=(1, 2), seed=0)
    assert result.total == 50
    assert result.passed == 50, result.failures


@pytest.mark.heavy
@pytest.mark.parametrize("m", [0, 1])
def test_self_matching_is_perfect(m):
    gnn = GnnConfig(layers=2, hidden_dim=32)
    train = TrainConfig(m=m, alpha=0.0, epochs=100, lr=0.01)
    perfect = 0
    for seed in range(20):
        g = generate_erdos_renyi(50, 0.1, seed)
        g = g.with_features(random_injective(50, 16, seed))
        anchors = AnchorSet.identity(50, 0.7, np.random.default_rng(seed))
        result = train_khgmn(g, g, anchors, train.model_copy(update={"seed": seed}), gnn)
        perfect += precision_at_k(result.correspondence, anchors, 1) == 1.0
    assert perfect >= 19


@pytest.mark.heavy
def test_line_graph_level_beats_the_local_encoder():
    spec = _ablation_spec()
    local = _mean_p_at_1(spec, spec.train, ABLATION_SEEDS)
    hierarchical = _mean_p_at_1(
        spec, spec.train.model_copy(update={"m": 1, "hierarchical": True}), ABLATION_SEEDS
    )
    assert hierarchical.mean() > local.mean()
    wins = int(np.sum(hierarchical > local))
    losses = int(np.sum(hierarchical < local))
    assert binomtest(wins, wins + losses, 0.5, alternative="greater").pvalue < 0.1


@pytest.mark.heavy
def test_hierarchical_variant_is_stable_in_depth():
    depths = (3, 9, 16)
    local = {}
    hierarchical = {}
    for layers in depths:
        spec = _ablation_spec(layers)
        local[layers] = _mean_p_at_1(spec, spec.train, DEPTH_SEEDS).mean()
        hierarchical[layers] = _mean_p_at_1(
            spec, spec.train.model_copy(update={"m": 1, "hierarchical": True}), DEPTH_SEEDS
        ).mean()
    assert hierarchical[16] >= hierarchical[9] - 0.05
    assert local[16] < max(local.values())
