"""Experiment configuration: JSON file -> validated dataclasses.

Every default mirrors the benchmark protocol: temperature 0.5,
contamination 0.1, three seed replicates, z-score normalization before
fusion. Unknown keys are rejected so typos fail fast (exit code 2).
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, fields
from pathlib import Path

from .data import Orientation
from .errors import ConfigError

METHODS = ("blind", "evidence_only", "ephad", "ephad_ada", "refine")
DETECTORS = ("iforest", "lof", "knn", "rbf_svdd")
EVIDENCES = ("lof", "iforest", "knn", "external")


def _build(cls, raw: dict, where: str):
    if not isinstance(raw, dict):
        raise ConfigError(f"{where}: expected an object, got {type(raw).__name__}")
    known = {f.name for f in fields(cls)}
    unknown = set(raw) - known
    if unknown:
        raise ConfigError(f"{where}: unknown keys {sorted(unknown)}; known: {sorted(known)}")
    try:
        return cls(**raw)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"{where}: {exc}") from exc


@dataclass(frozen=True)
class DatasetConfig:
    name: str = ""
    path: str | None = None  # CSV path; empty = bundled dataset or "toy"
    label_column: str = "label"

    def __post_init__(self):
        if not self.name and not self.path:
            raise ValueError("dataset needs a name (bundled / 'toy') or a path")
        if not self.name:
            object.__setattr__(self, "name", Path(self.path).stem)

    @property
    def is_toy(self) -> bool:
        return self.path is None and self.name == "toy"


@dataclass(frozen=True)
class DetectorConfig:
    name: str = "iforest"
    k: int = 20  # lof / knn
    tree_count: int = 100  # iforest
    subsample_size: int = 256
    epochs: int = 200  # rbf_svdd
    batch: int = 25
    lr: float = 0.01

    def __post_init__(self):
        if self.name not in DETECTORS:
            raise ValueError(f"unknown detector {self.name!r}; choose from {DETECTORS}")


@dataclass(frozen=True)
class EvidenceConfig:
    name: str = "lof"
    k: int = 20
    tree_count: int = 100
    subsample_size: int = 256
    path: str | None = None  # external score file over all dataset rows
    orientation: str = "anomaly-high"  # orientation of the external file

    def __post_init__(self):
        if self.name not in EVIDENCES:
            raise ValueError(f"unknown evidence {self.name!r}; choose from {EVIDENCES}")
        if self.name == "external" and not self.path:
            raise ValueError("external evidence needs a path")
        Orientation.parse(self.orientation)


@dataclass(frozen=True)
class ToyConfig:
    n_train: int = 100
    n_test: int = 100
    lof_k: int = 10
    refine_rounds: int = 5
    grid_cells: int = 100
    grid_lo: float = -2.0
    grid_hi: float = 3.0

    def __post_init__(self):
        if self.n_train < 2 or self.n_test < 2:
            raise ValueError("toy sample sizes must be at least 2")
        if self.refine_rounds < 1:
            raise ValueError("refine needs at least 1 round")


@dataclass(frozen=True)
class ExperimentConfig:
    datasets: tuple = (DatasetConfig(name="toy"),)
    detector: DetectorConfig = DetectorConfig()
    evidence: EvidenceConfig = EvidenceConfig()
    methods: tuple = ("blind", "evidence_only", "ephad", "ephad_ada")
    beta_grid: tuple = (0.5,)
    epsilon_grid: tuple = (0.1,)
    test_anomaly_fraction_grid: tuple = (None,)
    seeds: tuple = (0, 1, 2)
    normalization: str = "zscore"
    delta: float = 1e-12
    input_standardize: bool = False
    toy: ToyConfig = field(default_factory=ToyConfig)
    master_seed: int = 0
    threads: int = 1
    out_dir: str = "tiltfuse-out"

    def __post_init__(self):
        object.__setattr__(self, "datasets", tuple(self.datasets))
        object.__setattr__(self, "methods", tuple(self.methods))
        object.__setattr__(self, "beta_grid", tuple(float(b) for b in self.beta_grid))
        object.__setattr__(self, "epsilon_grid", tuple(float(e) for e in self.epsilon_grid))
        object.__setattr__(
            self,
            "test_anomaly_fraction_grid",
            tuple(None if f is None else float(f) for f in self.test_anomaly_fraction_grid),
        )
        object.__setattr__(self, "seeds", tuple(int(s) for s in self.seeds))
        if not self.methods:
            raise ValueError("method set is empty")
        for m in self.methods:
            if m not in METHODS:
                raise ValueError(f"unknown method {m!r}; choose from {METHODS}")
        if not self.beta_grid or any(not b > 0 for b in self.beta_grid):
            raise ValueError("beta grid must be non-empty with positive values")
        if not self.epsilon_grid or any(not 0 <= e < 1 for e in self.epsilon_grid):
            raise ValueError("epsilon grid must be non-empty with values in [0, 1)")
        if not self.test_anomaly_fraction_grid or any(
            f is not None and not 0 < f < 1 for f in self.test_anomaly_fraction_grid
        ):
            raise ValueError("test anomaly fractions must lie strictly between 0 and 1")
        if not self.seeds:
            raise ValueError("at least one seed replicate is required")
        if self.normalization not in ("none", "zscore", "minmax"):
            raise ValueError(f"unknown normalization {self.normalization!r}")
        if self.delta <= 0:
            raise ValueError("delta must be positive")
        if self.threads < 1:
            raise ValueError("threads must be at least 1")
        if not self.datasets:
            raise ValueError("at least one dataset is required")


def config_from_dict(raw: dict) -> ExperimentConfig:
    if not isinstance(raw, dict):
        raise ConfigError("config root must be a JSON object")
    raw = dict(raw)
    if "datasets" in raw:
        items = raw["datasets"]
        if not isinstance(items, list):
            raise ConfigError("'datasets' must be a list")
        parsed = []
        for i, item in enumerate(items):
            if isinstance(item, str):
                item = {"name": item} if not item.endswith(".csv") else {"path": item}
            parsed.append(_build(DatasetConfig, item, f"datasets[{i}]"))
        raw["datasets"] = tuple(parsed)
    for key, cls in (("detector", DetectorConfig), ("evidence", EvidenceConfig), ("toy", ToyConfig)):
        if key in raw:
            raw[key] = _build(cls, raw[key], key)
    return _build(ExperimentConfig, raw, "config")


def load_config(path) -> ExperimentConfig:
    path = Path(path)
    if not path.is_file():
        raise ConfigError(f"config file not found: {path}")
    try:
        raw = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: invalid JSON ({exc})") from exc
    return config_from_dict(raw)


def config_to_dict(config: ExperimentConfig) -> dict:
    """JSON-ready echo of a config (tuples as lists, nested dataclasses as objects)."""

    def convert(obj):
        if isinstance(obj, tuple):
            return [convert(o) for o in obj]
        if hasattr(obj, "__dataclass_fields__"):
            return {f.name: convert(getattr(obj, f.name)) for f in fields(obj)}
        return obj

    return convert(config)
