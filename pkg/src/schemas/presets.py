"""Default settings per experiment family."""

from __future__ import annotations

from src.schemas.config import GnnConfig, OperatorKind, PruneConfig, TrainConfig

PRESETS: dict[str, tuple[GnnConfig, TrainConfig]] = {
    "synthetic": (
        GnnConfig(operator=OperatorKind.GIN, layers=3),
        TrainConfig(alpha=0.9, train_ratio=0.7),
    ),
    "social": (
        GnnConfig(operator=OperatorKind.GCN, layers=3),
        TrainConfig(
            alpha=0.5,
            train_ratio=0.3,
            m=2,
            topk=10,
            prune=PruneConfig(degrees=[10, 5]),
        ),
    ),
    "directed": (
        GnnConfig(operator=OperatorKind.TRI_DIRECTED, layers=3),
        TrainConfig(alpha=0.5, topk=10, prune=PruneConfig(degrees=[5, 1])),
    ),
}


def preset(name: str) -> tuple[GnnConfig, TrainConfig]:
    try:
        return PRESETS[name]
    except KeyError as exc:
        raise ValueError(f"Unknown preset '{name}'; choose from {sorted(PRESETS)}.") from exc
