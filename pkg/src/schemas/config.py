"""Pydantic schemas for encoder, training, pruning and experiment configuration."""

from __future__ import annotations

import hashlib
import json
from enum import Enum
from pathlib import Path
from typing import Literal, Optional

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator


class OperatorKind(str, Enum):
    GIN = "gin"
    GCN = "gcn"
    TRI_DIRECTED = "tridirected"


class PruneConfig(BaseModel):
    """Per-level degree caps: degrees[k] bounds level k before level k+1 is built."""

    model_config = ConfigDict(frozen=True)

    degrees: list[int] = Field(default_factory=list)

    @field_validator("degrees")
    @classmethod
    def validate_degrees(cls, v: list[int]) -> list[int]:
        if any(d < 1 for d in v):
            raise ValueError("Every pruning degree must be at least 1.")
        return v

    @classmethod
    def parse(cls, text: str) -> "PruneConfig":
        """Parse the CLI form "d0,d1,..."."""
        tokens = [token.strip() for token in text.split(",") if token.strip()]
        return cls(degrees=[int(token) for token in tokens])

    def degree_for(self, level: int) -> Optional[int]:
        return self.degrees[level] if level < len(self.degrees) else None

    @property
    def enabled(self) -> bool:
        return bool(self.degrees)


class GnnConfig(BaseModel):
    """Encoder architecture shared by the ILG and original-graph encoders."""

    model_config = ConfigDict(frozen=True)

    operator: OperatorKind = OperatorKind.GIN
    layers: int = Field(3, ge=1)
    hidden_dim: int = Field(100, ge=1)
    mlp_layers: int = Field(2, ge=1)
    use_jk: bool = True
    batch_norm: bool = True
    activation: Literal["relu"] = "relu"


class TrainConfig(BaseModel):
    """Similarity fusion, Sinkhorn, optimizer and schedule settings."""

    model_config = ConfigDict(frozen=True)

    alpha: float = Field(0.9, ge=0.0, le=1.0)
    m: int = Field(0, ge=0)
    epochs: int = Field(100, ge=0)
    lr: float = Field(1e-3, gt=0.0)
    sinkhorn_iters: int = Field(10, ge=1)
    sinkhorn_tau: float = Field(1.0, gt=0.0)
    sinkhorn_strict: bool = False
    topk: Optional[int] = Field(None, ge=1)
    train_ratio: float = Field(0.7, ge=0.0, le=1.0)
    seed: int = 0
    hierarchical: bool = False
    prune: PruneConfig = Field(default_factory=PruneConfig)

    @model_validator(mode="after")
    def validate_hierarchy(self) -> "TrainConfig":
        if self.hierarchical and self.m < 1:
            raise ValueError("The hierarchical variant needs m >= 1.")
        return self

    @property
    def variant(self) -> str:
        """Conventional variant name: '0', '1', '2', '0-1', '0-1-2', ..."""
        if self.hierarchical:
            return "-".join(str(k) for k in range(self.m + 1))
        return str(self.m)


def parse_variant(text: str) -> tuple[int, bool]:
    """Map '2' to (m=2, flat) and '0-1-2' to (m=2, hierarchical)."""
    try:
        orders = [int(token) for token in text.split("-")]
    except ValueError as exc:
        raise ValueError(f"Unrecognized variant '{text}'.") from exc
    if len(orders) == 1:
        return orders[0], False
    if orders != list(range(len(orders))):
        raise ValueError(f"Hierarchical variants must read 0-1-...-m, got '{text}'.")
    return orders[-1], True


class FeatureConfig(BaseModel):
    model_config = ConfigDict(frozen=True)

    kind: Literal["degree", "random", "file"] = "degree"
    max_degree: int = Field(32, ge=0)
    width: int = Field(16, ge=1)


class SyntheticConfig(BaseModel):
    model_config = ConfigDict(frozen=True)

    num_nodes: int = Field(100, ge=1)
    edge_probability: float = Field(0.1, ge=0.0, le=1.0)
    p_delete: float = Field(0.3, ge=0.0, le=1.0)


class DatasetConfig(BaseModel):
    model_config = ConfigDict(frozen=True)

    source_edges: Path
    target_edges: Path
    anchors: Path
    source_features: Optional[Path] = None
    target_features: Optional[Path] = None
    directed: bool = False

    @model_validator(mode="after")
    def validate_files_exist(self) -> "DatasetConfig":
        for name in (
            "source_edges",
            "target_edges",
            "anchors",
            "source_features",
            "target_features",
        ):
            path = getattr(self, name)
            if path is not None and not Path(path).is_file():
                raise ValueError(f"{name}: file '{path}' does not exist.")
        return self


class SweepConfig(BaseModel):
    """Optional one-dimensional sweeps over the synthetic protocol."""

    model_config = ConfigDict(frozen=True)

    p_delete: Optional[list[float]] = None
    alpha: Optional[list[float]] = None
    layers: Optional[list[int]] = None
    topk: Optional[list[int]] = None

    def active(self) -> list[tuple[str, list]]:
        return [
            (name, values)
            for name, values in (
                ("p_delete", self.p_delete),
                ("alpha", self.alpha),
                ("layers", self.layers),
                ("topk", self.topk),
            )
            if values
        ]


class ExperimentSpec(BaseModel):
    """Everything needed to reproduce one CLI run."""

    model_config = ConfigDict(frozen=True)

    mode: Literal["synthetic", "dataset"]
    synthetic: Optional[SyntheticConfig] = None
    dataset: Optional[DatasetConfig] = None
    train: TrainConfig = Field(default_factory=TrainConfig)
    gnn: GnnConfig = Field(default_factory=GnnConfig)
    features: FeatureConfig = Field(default_factory=FeatureConfig)
    sweeps: SweepConfig = Field(default_factory=SweepConfig)
    variants: Optional[list[str]] = None
    replicates: int = Field(1, ge=1)
    seed: int = 0
    workers: int = Field(1, ge=1)
    output_dir: Path = Path("results")
    plot: bool = False
    hard_assignment: Literal["none", "greedy", "exact"] = "none"

    @field_validator("variants")
    @classmethod
    def validate_variants(cls, v: Optional[list[str]]) -> Optional[list[str]]:
        if v is None:
            return v
        if not v:
            raise ValueError("The variant list must not be empty.")
        if len(set(v)) != len(v):
            raise ValueError("The variant list repeats a variant.")
        for text in v:
            parse_variant(text)
        return v

    @model_validator(mode="after")
    def validate_sources(self) -> "ExperimentSpec":
        if self.mode == "synthetic" and self.synthetic is None:
            raise ValueError("Synthetic mode needs a 'synthetic' block.")
        if self.mode == "dataset" and self.dataset is None:
            raise ValueError("Dataset mode needs a 'dataset' block.")
        return self

    def config_hash(self) -> str:
        payload = json.dumps(self.model_dump(mode="json"), sort_keys=True)
        return hashlib.sha256(payload.encode("utf-8")).hexdigest()
