"""
Report service for experiment outputs.

Responsibilities:
- Assemble the JSON metrics report with the resolved configuration.
- Aggregate replicate rows into per-sweep-point summaries.
- Write metrics, schemas, CSV tables and optional sweep plots.
"""

from __future__ import annotations

import logging
from typing import Optional, Sequence

import pandas as pd

from src.repositories.interfaces import ArtifactRepository
from src.schemas.config import ExperimentSpec
from src.schemas.reports import (
    REPLICATE_COLUMNS,
    SUMMARY_COLUMNS,
    MetricsReport,
    ReplicateRow,
    SummaryRow,
)

logger = logging.getLogger(__name__)

METRICS_FILE = "metrics.json"
METRICS_SCHEMA_FILE = "metrics.schema.json"
REPLICATES_FILE = "replicates.csv"
SUMMARY_FILE = "summary.csv"

GROUP_KEYS = ["sweep", "value", "variant"]


def replicate_frame(rows: Sequence[ReplicateRow]) -> pd.DataFrame:
    return pd.DataFrame([row.model_dump() for row in rows], columns=REPLICATE_COLUMNS)


def summarize(rows: Sequence[ReplicateRow]) -> list[SummaryRow]:
    """Mean and standard deviation of P@k per (sweep, value, variant).

    A single replicate has a standard deviation of 0, not NaN.
    """
    if not rows:
        return []
    frame = replicate_frame(rows)
    grouped = frame.groupby(GROUP_KEYS, sort=False, dropna=False)
    stats = grouped.agg(
        replicates=("replicate", "count"),
        p_at_1_mean=("p_at_1", "mean"),
        p_at_1_std=("p_at_1", lambda s: float(s.std(ddof=0))),
        p_at_10_mean=("p_at_10", "mean"),
        p_at_30_mean=("p_at_30", "mean"),
    ).reset_index()
    summary = []
    for record in stats.to_dict(orient="records"):
        value = record["value"]
        summary.append(
            SummaryRow(
                sweep=record["sweep"],
                value=None if pd.isna(value) else float(value),
                variant=record["variant"],
                replicates=int(record["replicates"]),
                p_at_1_mean=float(record["p_at_1_mean"]),
                p_at_1_std=float(record["p_at_1_std"]),
                p_at_10_mean=float(record["p_at_10_mean"]),
                p_at_30_mean=float(record["p_at_30_mean"]),
            )
        )
    return summary


class ReportService:
    """Builds and persists the reports of one run."""

    def __init__(self, artifact_repository: ArtifactRepository):
        self.artifacts = artifact_repository

    def build_report(
        self,
        spec: ExperimentSpec,
        *,
        command: str,
        rows: Sequence[ReplicateRow],
        p_at: dict[int, float],
        loss_curve: Sequence[float] = (),
        matching_accuracy: Optional[float] = None,
    ) -> MetricsReport:
        return MetricsReport(
            command=command,
            config_hash=spec.config_hash(),
            seed=spec.seed,
            p_at=dict(p_at),
            loss_curve=[float(v) for v in loss_curve],
            replicates=list(rows),
            summary=summarize(rows),
            matching_accuracy=matching_accuracy,
            config=spec.model_dump(mode="json"),
        )

    def write_run(self, report: MetricsReport, spec: Optional[ExperimentSpec] = None) -> None:
        """Write metrics.json, its schema and the replicate/summary tables.

        Args:
            report (MetricsReport): The assembled report.
            spec (ExperimentSpec, optional): When given and `spec.plot` is set,
                sweep plots are rendered as SVG next to the tables.
        """
        self.artifacts.write_json(METRICS_FILE, report)
        self.artifacts.write_schema(METRICS_SCHEMA_FILE, MetricsReport)
        self.artifacts.write_frame(REPLICATES_FILE, replicate_frame(report.replicates))
        summary = pd.DataFrame(
            [row.model_dump() for row in report.summary], columns=SUMMARY_COLUMNS
        )
        self.artifacts.write_frame(SUMMARY_FILE, summary)
        if spec is not None and spec.plot:
            self.plot_sweeps(report)
        logger.info("Reports written to %s", self.artifacts.root)

    def plot_sweeps(self, report: MetricsReport) -> list[str]:
        """One SVG per swept parameter: mean P@1 with a one-std band per variant.

        A point without a value (the dense end of a top-k sweep) is drawn as a
        dashed horizontal baseline in the variant's colour.
        """
        import matplotlib

        matplotlib.use("Agg")
        import matplotlib.pyplot as plt

        written = []
        by_sweep: dict[str, dict[str, list[SummaryRow]]] = {}
        for row in report.summary:
            if row.sweep != "none":
                by_sweep.setdefault(row.sweep, {}).setdefault(row.variant, []).append(row)
        for sweep, by_variant in by_sweep.items():
            figure, axis = plt.subplots(figsize=(5, 3.5))
            for variant, rows in by_variant.items():
                points = sorted((r for r in rows if r.value is not None), key=lambda r: r.value)
                dense = [r for r in rows if r.value is None]
                colour = None
                if points:
                    xs = [r.value for r in points]
                    means = [r.p_at_1_mean for r in points]
                    stds = [r.p_at_1_std for r in points]
                    (line,) = axis.plot(xs, means, marker="o", label=f"variant {variant}")
                    colour = line.get_color()
                    axis.fill_between(
                        xs,
                        [m - s for m, s in zip(means, stds)],
                        [m + s for m, s in zip(means, stds)],
                        alpha=0.2,
                        color=colour,
                    )
                for row in dense:
                    axis.axhline(
                        row.p_at_1_mean,
                        linestyle="--",
                        color=colour,
                        label=f"variant {variant} dense",
                    )
            axis.set_xlabel(sweep)
            axis.set_ylabel("P@1")
            axis.set_ylim(0.0, 1.0)
            axis.legend()
            figure.tight_layout()
            name = f"sweep_{sweep}.svg"
            self.artifacts.write_figure(name, figure)
            written.append(name)
        return written
