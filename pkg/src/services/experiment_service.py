"""
Experiment service for the synthetic protocol and file-based datasets.

Responsibilities:
- Generate or load source/target pairs and their anchors.
- Assign node features according to the experiment's feature settings.
- Run each configured matching variant per replicate, in a worker pool.
- Hand per-replicate rows and artifacts to the report service.
"""

from __future__ import annotations

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Optional

import numpy as np

from src.events import dispatch_event, experiment_finished, replicate_finished
from src.exceptions import ConfigError
from src.graphs.features import degree_one_hot, random_injective
from src.graphs.graph import AnchorSet, Graph
from src.graphs.synthetic import generate_erdos_renyi, perturb_delete_edges
from src.matching.correspondence import Correspondence
from src.matching.evaluation import hard_assignment, matching_accuracy, precision_table, sparsify_topk
from src.matching.hierarchical import train_hierarchical
from src.matching.training import TrainResult, train_khgmn
from src.repositories.interfaces import DatasetRepository
from src.schemas.config import ExperimentSpec, FeatureConfig, GnnConfig, TrainConfig, parse_variant
from src.schemas.reports import CorrespondenceManifest, MetricsReport, ReplicateRow
from src.services.report_service import ReportService

logger = logging.getLogger(__name__)

P_AT = (1, 10, 30)
NO_SWEEP = "none"


@dataclass
class ReplicateOutcome:
    row: ReplicateRow
    result: TrainResult
    p_at: dict[int, float]


def assign_features(g: Graph, config: FeatureConfig, seed: int, shared: Optional[np.ndarray] = None) -> Graph:
    """Replace `g`'s features per `config`; `shared` wins for random features."""
    if config.kind == "degree":
        return g.with_features(degree_one_hot(g.degrees(), config.max_degree))
    if config.kind == "random":
        features = shared if shared is not None else random_injective(g.num_nodes, config.width, seed)
        return g.with_features(features)
    return g


def train_variant(
    g_s: Graph, g_t: Graph, anchors: AnchorSet, train: TrainConfig, gnn: GnnConfig
) -> TrainResult:
    if train.hierarchical:
        return train_hierarchical(g_s, g_t, anchors, train, gnn)
    return train_khgmn(g_s, g_t, anchors, train, gnn)


def _apply_sweep(spec: ExperimentSpec, name: str, value) -> ExperimentSpec:
    if name == NO_SWEEP:
        return spec
    if name == "p_delete":
        return spec.model_copy(
            update={"synthetic": spec.synthetic.model_copy(update={"p_delete": float(value)})}
        )
    if name == "alpha":
        return spec.model_copy(update={"train": spec.train.model_copy(update={"alpha": float(value)})})
    if name == "layers":
        return spec.model_copy(update={"gnn": spec.gnn.model_copy(update={"layers": int(value)})})
    if name == "topk":
        topk = None if value is None else int(value)
        return spec.model_copy(update={"train": spec.train.model_copy(update={"topk": topk})})
    raise ConfigError(f"Unknown sweep '{name}'.")


def _apply_variant(spec: ExperimentSpec, variant: Optional[str]) -> ExperimentSpec:
    if variant is None:
        return spec
    m, hierarchical = parse_variant(variant)
    train = spec.train.model_copy(update={"m": m, "hierarchical": hierarchical})
    return spec.model_copy(update={"train": train})


def _sweep_points(spec: ExperimentSpec) -> list[tuple[str, Optional[float]]]:
    """Every (sweep, value) job point; a top-k sweep also gets a dense point."""
    points: list[tuple[str, Optional[float]]] = []
    for name, values in spec.sweeps.active():
        points.extend((name, value) for value in values)
        if name == "topk":
            points.append((name, None))
    return points or [(NO_SWEEP, None)]


class ExperimentService:
    """Application service running synthetic and dataset experiments."""

    def __init__(self, dataset_repository: DatasetRepository):
        self._datasets = dataset_repository

    # --- Synthetic protocol ---

    def synthetic_pair(self, spec: ExperimentSpec, seed: int) -> tuple[Graph, Graph, AnchorSet]:
        """One ER source graph, its edge-deleted copy and identity anchors."""
        cfg = spec.synthetic
        g_s = generate_erdos_renyi(cfg.num_nodes, cfg.edge_probability, seed)
        g_s = assign_features(g_s, spec.features, seed)
        g_t, anchors = perturb_delete_edges(
            g_s, cfg.p_delete, seed + 1, train_ratio=spec.train.train_ratio
        )
        g_t = assign_features(g_t, spec.features, seed, shared=g_s.features)
        return g_s, g_t, anchors

    def _replicate(
        self, spec: ExperimentSpec, sweep: str, value, variant: Optional[str], index: int
    ) -> ReplicateOutcome:
        seed = spec.seed + index
        point = _apply_variant(_apply_sweep(spec, sweep, value), variant)
        g_s, g_t, anchors = self.synthetic_pair(point, seed)
        train = point.train.model_copy(update={"seed": seed})
        result = train_variant(g_s, g_t, anchors, train, point.gnn)
        p_at = precision_table(result.correspondence, anchors, P_AT)
        row = ReplicateRow(
            sweep=sweep,
            value=None if value is None else float(value),
            replicate=index,
            seed=seed,
            variant=train.variant,
            p_at_1=p_at[1],
            p_at_10=p_at[10],
            p_at_30=p_at[30],
            final_loss=result.final_loss,
            epochs=len(result.loss_curve),
        )
        dispatch_event(
            replicate_finished,
            self,
            sweep=sweep,
            value=value,
            variant=train.variant,
            replicate=index,
            p_at_1=p_at[1],
        )
        return ReplicateOutcome(row=row, result=result, p_at=p_at)

    def run_synthetic(self, spec: ExperimentSpec, reports: ReportService) -> MetricsReport:
        """Run every (sweep point, replicate) job and write the reports.

        Every variant in `spec.variants` trains on the same seeded replicate
        pairs. Rows are collected in job order regardless of completion order.
        """
        if spec.mode != "synthetic":
            raise ConfigError("run_synthetic needs a synthetic experiment spec.")
        points = _sweep_points(spec)
        variants = spec.variants or [None]
        jobs = [
            (name, value, variant, r)
            for name, value in points
            for variant in variants
            for r in range(spec.replicates)
        ]
        logger.info(
            "Synthetic run: %d sweep points x %d variants x %d replicates on %d workers.",
            len(points),
            len(variants),
            spec.replicates,
            spec.workers,
        )
        with ThreadPoolExecutor(max_workers=spec.workers) as pool:
            futures = [pool.submit(self._replicate, spec, *job) for job in jobs]
            outcomes = [future.result() for future in futures]

        rows = [outcome.row for outcome in outcomes]
        first = outcomes[0]
        p_at = {k: float(np.mean([o.p_at[k] for o in outcomes])) for k in P_AT}
        report = reports.build_report(
            spec,
            command="synth",
            rows=rows,
            p_at=p_at,
            loss_curve=first.result.loss_curve,
        )
        reports.write_run(report, spec)
        dispatch_event(experiment_finished, self, command="synth", replicates=len(rows), p_at_1=p_at[1])
        return report

    # --- Datasets ---

    def load_dataset(self, spec: ExperimentSpec, reports: Optional[ReportService] = None):
        cfg = spec.dataset
        g_s, ids_s = self._datasets.load_graph(cfg.source_edges, cfg.directed)
        g_t, ids_t = self._datasets.load_graph(cfg.target_edges, cfg.directed)
        if cfg.source_features is not None:
            g_s = g_s.with_features(self._datasets.load_features(cfg.source_features, g_s.num_nodes))
        else:
            g_s = assign_features(g_s, spec.features, spec.seed)
        if cfg.target_features is not None:
            g_t = g_t.with_features(self._datasets.load_features(cfg.target_features, g_t.num_nodes))
        else:
            g_t = assign_features(g_t, spec.features, spec.seed + 1)
        anchors = self._datasets.load_anchors(
            cfg.anchors,
            ids_s,
            ids_t,
            train_ratio=spec.train.train_ratio,
            rng=np.random.default_rng(spec.seed),
        )
        if reports is not None:
            reports.artifacts.write_node_ids("source", ids_s)
            reports.artifacts.write_node_ids("target", ids_t)
        return g_s, g_t, anchors

    def run_dataset(self, spec: ExperimentSpec, reports: ReportService) -> MetricsReport:
        """Train once on a file-based pair and export metrics, correspondence and checkpoints."""
        if spec.mode != "dataset":
            raise ConfigError("run_dataset needs a dataset experiment spec.")
        g_s, g_t, anchors = self.load_dataset(spec, reports)
        train = spec.train.model_copy(update={"seed": spec.seed})
        result = train_variant(g_s, g_t, anchors, train, spec.gnn)
        p_at = precision_table(result.correspondence, anchors, P_AT)

        accuracy = None
        assignment = hard_assignment(result.correspondence, spec.hard_assignment)
        if assignment is not None:
            accuracy = matching_accuracy(assignment, anchors)

        row = ReplicateRow(
            replicate=0,
            seed=spec.seed,
            variant=train.variant,
            p_at_1=p_at[1],
            p_at_10=p_at[10],
            p_at_30=p_at[30],
            final_loss=result.final_loss,
            epochs=len(result.loss_curve),
        )
        report = reports.build_report(
            spec,
            command="dataset",
            rows=[row],
            p_at=p_at,
            loss_curve=result.loss_curve,
            matching_accuracy=accuracy,
        )
        self._export_model(spec, result, reports, anchors)
        reports.write_run(report, spec)
        dispatch_event(experiment_finished, self, command="dataset", p_at_1=p_at[1])
        return report

    def _export_model(
        self, spec: ExperimentSpec, result: TrainResult, reports: ReportService, anchors: AnchorSet
    ) -> None:
        correspondence: Correspondence = result.correspondence
        if spec.train.topk is not None:
            correspondence = sparsify_topk(correspondence, spec.train.topk, anchors)
        manifest = CorrespondenceManifest(
            shape=correspondence.shape,
            storage=correspondence.storage,
            provenance=correspondence.provenance,
            config_hash=spec.config_hash(),
            seed=spec.seed,
        )
        reports.artifacts.write_correspondence("correspondence", correspondence, manifest)
        for name, store in result.params.items():
            reports.artifacts.write_checkpoint(f"checkpoints/{name}.json", store.state_dict())
