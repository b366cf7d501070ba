"""Core data types: datasets, score vectors, orientations, and seed streams.

Conventions used everywhere else in the package:

* labels are 0 = normal, 1 = anomalous (both in files and in memory);
* every score vector carries an explicit orientation flag so that callers
  never have to guess whether "large" means "anomalous";
* randomness is derived from a ``SeedStream`` so that any experiment cell
  can be reproduced from (master seed, path) alone.
"""

from __future__ import annotations

import csv
import enum
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import DataError


class Orientation(enum.Enum):
    """Whether larger score values mean more anomalous or more normal."""

    ANOMALY_HIGH = "anomaly-high"
    INLIER_HIGH = "inlier-high"

    @classmethod
    def parse(cls, text: str) -> "Orientation":
        for member in cls:
            if member.value == text:
                return member
        raise DataError(f"unknown orientation {text!r} (expected 'anomaly-high' or 'inlier-high')")


class Label(enum.IntEnum):
    NORMAL = 0
    ANOMALOUS = 1


def _frozen_array(values, dtype=np.float64, ndim=None) -> np.ndarray:
    arr = np.array(values, dtype=dtype)
    if ndim is not None and arr.ndim != ndim:
        raise ValueError(f"expected {ndim}-d array, got {arr.ndim}-d")
    arr.flags.writeable = False
    return arr


@dataclass(frozen=True)
class TabularDataset:
    """A dense feature matrix with optional binary labels.

    Immutable after construction; the underlying arrays are marked
    read-only so fitted models can share them safely.
    """

    features: np.ndarray
    labels: np.ndarray | None = None
    name: str = "unnamed"

    def __post_init__(self):
        feats = _frozen_array(self.features, ndim=2)
        if feats.shape[0] < 1 or feats.shape[1] < 1:
            raise ValueError("dataset needs at least one row and one feature column")
        if not np.all(np.isfinite(feats)):
            raise ValueError(f"dataset {self.name!r} contains non-finite feature values")
        object.__setattr__(self, "features", feats)
        if self.labels is not None:
            labels = _frozen_array(self.labels, dtype=np.int8, ndim=1)
            if labels.shape[0] != feats.shape[0]:
                raise ValueError("label length does not match number of rows")
            if not np.all((labels == Label.NORMAL) | (labels == Label.ANOMALOUS)):
                raise ValueError("labels must be 0 (normal) or 1 (anomalous)")
            object.__setattr__(self, "labels", labels)

    @property
    def n_samples(self) -> int:
        return self.features.shape[0]

    @property
    def n_features(self) -> int:
        return self.features.shape[1]

    def without_labels(self) -> "TabularDataset":
        return TabularDataset(self.features, None, self.name)

    def select(self, indices, name: str | None = None) -> "TabularDataset":
        """Row subset (keeps labels when present)."""
        idx = np.asarray(indices, dtype=np.intp)
        labels = None if self.labels is None else self.labels[idx]
        return TabularDataset(self.features[idx], labels, name or self.name)


@dataclass(frozen=True)
class ScoreVector:
    """Per-sample real scores plus the orientation they are expressed in."""

    values: np.ndarray
    orientation: Orientation
    source: str = ""

    def __post_init__(self):
        vals = _frozen_array(self.values, ndim=1)
        if not np.all(np.isfinite(vals)):
            raise ValueError(f"score vector {self.source!r} contains non-finite values")
        object.__setattr__(self, "values", vals)

    def __len__(self) -> int:
        return self.values.shape[0]


def reorient(scores: ScoreVector, target: Orientation) -> ScoreVector:
    """Express ``scores`` in the ``target`` orientation.

    A no-op when the orientation already matches; otherwise values are
    negated (s_in = -s_out), which exactly reverses the ranking.
    """
    if scores.orientation is target:
        return scores
    return ScoreVector(-scores.values, target, scores.source)


def standardize(scores: ScoreVector, mode: str) -> ScoreVector:
    """Rescale scores with a strictly monotone map: 'none', 'zscore' or 'minmax'.

    zscore uses the population standard deviation. Degenerate (constant)
    inputs map to all-zeros / all-0.5 instead of erroring, so that a
    constant signal fused with another one degrades gracefully.
    """
    if mode == "none":
        return scores
    if mode not in ("zscore", "minmax"):
        raise ValueError(f"unknown standardization mode {mode!r}")
    if len(scores) < 2:
        raise ValueError(f"mode {mode!r} needs at least 2 scores")
    v = scores.values
    if mode == "zscore":
        std = v.std()
        out = np.zeros_like(v) if std == 0.0 else (v - v.mean()) / std
    else:
        lo, hi = v.min(), v.max()
        out = np.full_like(v, 0.5) if hi == lo else (v - lo) / (hi - lo)
    return ScoreVector(out, scores.orientation, scores.source)


@dataclass(frozen=True)
class SeedStream:
    """Splittable source of reproducible randomness.

    Equal (master_seed, path) always produce identical draws; any two
    distinct paths produce statistically independent streams (numpy
    SeedSequence spawn keys).
    """

    master_seed: int
    path: tuple[int, ...] = field(default=())

    def __post_init__(self):
        if not 0 <= int(self.master_seed) < 2**64:
            raise ValueError("master_seed must fit in 64 unsigned bits")
        object.__setattr__(self, "path", tuple(int(p) for p in self.path))

    def child(self, *indices: int) -> "SeedStream":
        return SeedStream(self.master_seed, self.path + tuple(indices))

    def generator(self) -> np.random.Generator:
        seq = np.random.SeedSequence(entropy=self.master_seed, spawn_key=self.path)
        return np.random.Generator(np.random.PCG64(seq))


# ---------------------------------------------------------------------------
# file ingestion
# ---------------------------------------------------------------------------


def load_csv(path, label_column: str | None = None, name: str | None = None) -> TabularDataset:
    """Load a dataset from a UTF-8 CSV file with a header row.

    All non-label columns must parse as finite reals; the optional label
    column must contain only 0 (normal) / 1 (anomalous).
    """
    path = Path(path)
    if not path.is_file():
        raise DataError(f"dataset file not found: {path}")
    with path.open(newline="", encoding="utf-8") as handle:
        reader = csv.reader(handle)
        try:
            header = next(reader)
        except StopIteration:
            raise DataError(f"{path}: empty file") from None
        header = [h.strip() for h in header]
        if label_column is not None and label_column not in header:
            raise DataError(f"{path}: label column {label_column!r} not in header {header}")
        label_idx = header.index(label_column) if label_column is not None else None
        feature_cols = [i for i in range(len(header)) if i != label_idx]
        if not feature_cols:
            raise DataError(f"{path}: no feature columns")
        rows: list[list[float]] = []
        labels: list[int] = []
        for row_num, row in enumerate(reader, start=2):  # 1-based, incl. header
            if len(row) != len(header):
                raise DataError(f"{path}: row {row_num} has {len(row)} cells, expected {len(header)}")
            values = []
            for i in feature_cols:
                try:
                    value = float(row[i])
                except ValueError:
                    raise DataError(
                        f"{path}: row {row_num}, column {header[i]!r}: "
                        f"cannot parse {row[i]!r} as a number"
                    ) from None
                if not np.isfinite(value):
                    raise DataError(f"{path}: row {row_num}, column {header[i]!r}: non-finite value")
                values.append(value)
            rows.append(values)
            if label_idx is not None:
                raw = row[label_idx].strip()
                if raw not in ("0", "1"):
                    raise DataError(
                        f"{path}: row {row_num}: label {raw!r} not in {{0,1}} "
                        "(1 = anomalous, 0 = normal)"
                    )
                labels.append(int(raw))
    if not rows:
        raise DataError(f"{path}: no data rows")
    return TabularDataset(
        np.asarray(rows, dtype=np.float64),
        np.asarray(labels, dtype=np.int8) if label_idx is not None else None,
        name or path.stem,
    )


def load_scores(path, orientation: Orientation, source: str | None = None) -> ScoreVector:
    """Read a score file: CSV with header ``index,score``.

    Indices must run 0,1,2,... matching dataset row order; the first gap
    or disorder is reported by index.
    """
    path = Path(path)
    if not path.is_file():
        raise DataError(f"score file not found: {path}")
    with path.open(newline="", encoding="utf-8") as handle:
        reader = csv.reader(handle)
        try:
            header = next(reader)
        except StopIteration:
            raise DataError(f"{path}: empty file") from None
        header = [h.strip() for h in header]
        if header[:2] != ["index", "score"]:
            raise DataError(f"{path}: expected header 'index,score', got {header}")
        values: list[float] = []
        expected = 0
        for row_num, row in enumerate(reader, start=2):
            if len(row) < 2:
                raise DataError(f"{path}: row {row_num}: expected 'index,score'")
            try:
                idx = int(row[0])
            except ValueError:
                raise DataError(f"{path}: row {row_num}: bad index {row[0]!r}") from None
            if idx != expected:
                raise DataError(f"{path}: missing or out-of-order index {expected} (found {idx})")
            try:
                score = float(row[1])
            except ValueError:
                raise DataError(f"{path}: row {row_num}: bad score {row[1]!r}") from None
            if not np.isfinite(score):
                raise DataError(f"{path}: row {row_num}: non-finite score")
            values.append(score)
            expected += 1
    if not values:
        raise DataError(f"{path}: no score rows")
    return ScoreVector(np.asarray(values), orientation, source or path.stem)


def save_scores(path, scores: ScoreVector) -> None:
    path = Path(path)
    with path.open("w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle)
        writer.writerow(["index", "score"])
        for i, value in enumerate(scores.values):
            writer.writerow([i, format(value, ".17g")])
