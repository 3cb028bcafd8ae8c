"""
Service wiring for application-layer orchestration.
"""

from __future__ import annotations

from pathlib import Path
from typing import TYPE_CHECKING

if TYPE_CHECKING:
    from src.services.diagnostics_service import DiagnosticsService
    from src.services.experiment_service import ExperimentService
    from src.services.linegraph_service import LineGraphService
    from src.services.report_service import ReportService

_experiment_service = None
_diagnostics_service = None


def get_experiment_service() -> "ExperimentService":
    """Return the singleton experiment service instance."""
    global _experiment_service
    if _experiment_service is None:
        from src.repositories import get_dataset_repository
        from src.services.experiment_service import ExperimentService

        _experiment_service = ExperimentService(get_dataset_repository())
    return _experiment_service


def get_diagnostics_service() -> "DiagnosticsService":
    """Return the singleton diagnostics service instance."""
    global _diagnostics_service
    if _diagnostics_service is None:
        from src.repositories import get_dataset_repository
        from src.services.diagnostics_service import DiagnosticsService

        _diagnostics_service = DiagnosticsService(get_dataset_repository())
    return _diagnostics_service


def get_report_service(output_dir: Path) -> "ReportService":
    """Return a report service writing under `output_dir`; one per run."""
    from src.repositories import get_artifact_repository
    from src.services.report_service import ReportService

    return ReportService(get_artifact_repository(output_dir))


def get_linegraph_service(output_dir: Path) -> "LineGraphService":
    """Return a line-graph export service writing under `output_dir`."""
    from src.repositories import get_artifact_repository, get_dataset_repository
    from src.services.linegraph_service import LineGraphService

    return LineGraphService(get_dataset_repository(), get_artifact_repository(output_dir))
