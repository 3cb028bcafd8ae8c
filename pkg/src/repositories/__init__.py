"""
Repository wiring for dataset and artifact access.
"""

from pathlib import Path

from src.repositories.file_artifact_repository import FileArtifactRepository
from src.repositories.file_dataset_repository import FileDatasetRepository

_dataset_repository = FileDatasetRepository()


def get_dataset_repository() -> FileDatasetRepository:
    """Return the singleton dataset repository instance."""
    return _dataset_repository


def get_artifact_repository(root: Path) -> FileArtifactRepository:
    """Return an artifact repository rooted at the given output directory."""
    return FileArtifactRepository(root)
