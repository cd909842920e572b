"""Deterministic demo environments: snapshot trees, inventory, advisories."""

from importlib import resources
from pathlib import Path

__all__ = ["data_path"]


def data_path(name: str) -> Path:
    """Absolute path of a bundled data file (frozen certificates etc.)."""
    return Path(str(resources.files(__package__) / "data" / name))
