"""Small bundled benchmark datasets (see scripts/make_datasets.py for provenance)."""

from importlib import resources

from ..data import TabularDataset, load_csv
from ..errors import DataError

BUNDLED = ("wine", "breast")


def load_bundled(name: str) -> TabularDataset:
    """Load one of the CSVs shipped with the package by short name."""
    if name not in BUNDLED:
        raise DataError(f"unknown bundled dataset {name!r}; available: {', '.join(BUNDLED)}")
    with resources.as_file(resources.files(__package__) / f"{name}.csv") as path:
        return load_csv(path, label_column="label", name=name)
