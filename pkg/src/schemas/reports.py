"""Pydantic DTOs for every artifact the CLI writes."""

from __future__ import annotations

from typing import Any, Optional

from pydantic import BaseModel, Field

REPORT_VERSION = 1

# Stable CSV column order for per-replicate and summary tables.
REPLICATE_COLUMNS = [
    "sweep",
    "value",
    "replicate",
    "seed",
    "variant",
    "p_at_1",
    "p_at_10",
    "p_at_30",
    "final_loss",
    "epochs",
]
SUMMARY_COLUMNS = [
    "sweep",
    "value",
    "variant",
    "replicates",
    "p_at_1_mean",
    "p_at_1_std",
    "p_at_10_mean",
    "p_at_30_mean",
]


class ReplicateRow(BaseModel):
    sweep: str = "none"
    value: Optional[float] = None
    replicate: int
    seed: int
    variant: str
    p_at_1: float = Field(..., ge=0.0, le=1.0)
    p_at_10: float = Field(..., ge=0.0, le=1.0)
    p_at_30: float = Field(..., ge=0.0, le=1.0)
    final_loss: float
    epochs: int


class SummaryRow(BaseModel):
    sweep: str = "none"
    value: Optional[float] = None
    variant: str
    replicates: int
    p_at_1_mean: float
    p_at_1_std: float
    p_at_10_mean: float
    p_at_30_mean: float


class MetricsReport(BaseModel):
    """Top-level JSON report; `config` holds the fully resolved ExperimentSpec."""

    version: int = REPORT_VERSION
    command: str
    config_hash: str
    seed: int
    p_at: dict[int, float] = Field(default_factory=dict)
    loss_curve: list[float] = Field(default_factory=list)
    replicates: list[ReplicateRow] = Field(default_factory=list)
    summary: list[SummaryRow] = Field(default_factory=list)
    matching_accuracy: Optional[float] = None
    config: dict[str, Any]


class LevelSize(BaseModel):
    order: int
    nodes: int
    edges: int
    edges_after_prune: int
    max_degree: int
    size_bound: float
    within_bound: bool


class StackManifest(BaseModel):
    version: int = REPORT_VERSION
    directed: bool
    order: int
    base_nodes: int
    base_edges: int
    feature_width: int
    prune_degrees: list[int]
    seed: int
    levels: list[LevelSize]


class CorrespondenceManifest(BaseModel):
    version: int = REPORT_VERSION
    shape: tuple[int, int]
    storage: str
    provenance: str
    config_hash: str
    seed: int


class CheckReport(BaseModel):
    lemma_passed: int
    lemma_total: int
    lemma_skipped: int
    grad_max_relative_error: float
    grad_failures: list[str] = Field(default_factory=list)
    notes: list[str] = Field(default_factory=list)

    @property
    def ok(self) -> bool:
        return self.lemma_passed == self.lemma_total and not self.grad_failures
