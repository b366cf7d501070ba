"""Contaminated training sets: the 2-d three-Gaussian toy generator, mixture
injection with overlap / non-overlap protocols, and noised synthetic
anomalies for tabular benchmarks.

The training set handed to detectors is always an unlabeled view; the true
per-row labels live next to it as audit metadata so tests can check the
realized contamination without ever leaking labels into fitting.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .data import Label, SeedStream, TabularDataset
from .errors import DataError


@dataclass(frozen=True)
class GaussianMixtureSpec:
    """Mixture of isotropic Gaussians: (mean, scalar variance) pairs plus weights."""

    components: tuple  # ((mean vector, variance), ...)
    weights: tuple

    def __post_init__(self):
        comps = tuple((np.asarray(m, dtype=np.float64), float(v)) for m, v in self.components)
        weights = np.asarray(self.weights, dtype=np.float64)
        if len(comps) != weights.shape[0]:
            raise ValueError("one weight per component required")
        if abs(weights.sum() - 1.0) > 1e-12 or np.any(weights < 0):
            raise ValueError("weights must be non-negative and sum to 1")
        if any(v <= 0 for _, v in comps):
            raise ValueError("component variances must be positive")
        object.__setattr__(self, "components", comps)
        object.__setattr__(self, "weights", tuple(float(w) for w in weights))

    @property
    def dim(self) -> int:
        return self.components[0][0].shape[0]

    def sample(self, n: int, rng: np.random.Generator) -> np.ndarray:
        if n == 0:
            return np.empty((0, self.dim))
        which = rng.choice(len(self.components), size=n, p=np.asarray(self.weights))
        out = np.empty((n, self.dim))
        for j, (mean, var) in enumerate(self.components):
            rows = which == j
            out[rows] = mean + math.sqrt(var) * rng.standard_normal((int(rows.sum()), self.dim))
        return out

    def pdf(self, points: np.ndarray) -> np.ndarray:
        points = np.atleast_2d(points)
        total = np.zeros(points.shape[0])
        for weight, (mean, var) in zip(self.weights, self.components):
            sq = ((points - mean) ** 2).sum(axis=1)
            norm = (2.0 * np.pi * var) ** (points.shape[1] / 2.0)
            total += weight * np.exp(-sq / (2.0 * var)) / norm
        return total


# The 2-d toy world: one normal blob, two tighter anomaly blobs.
TOY_NORMAL = GaussianMixtureSpec((((1.0, 1.0), 0.07),), (1.0,))
TOY_ANOMALOUS = GaussianMixtureSpec(
    (((-0.25, 2.5), 0.03), ((-1.0, 0.5), 0.03)),
    (0.5, 0.5),
)


def sample_toy(
    n_normal: int,
    n_anomalous: int,
    seed: SeedStream,
    normal_spec: GaussianMixtureSpec = TOY_NORMAL,
    anomaly_spec: GaussianMixtureSpec = TOY_ANOMALOUS,
    name: str = "toy2d",
) -> TabularDataset:
    """Labeled draw from the toy generator; deterministic per seed."""
    if n_normal < 0 or n_anomalous < 0 or n_normal + n_anomalous == 0:
        raise ValueError("need a non-negative, non-empty sample")
    rng = seed.generator()
    normals = normal_spec.sample(n_normal, rng)
    anomalies = anomaly_spec.sample(n_anomalous, rng)
    features = np.vstack([normals, anomalies])
    labels = np.concatenate(
        [np.full(n_normal, Label.NORMAL, dtype=np.int8), np.full(n_anomalous, Label.ANOMALOUS, dtype=np.int8)]
    )
    return TabularDataset(features, labels, name)


class Protocol(enum.Enum):
    OVERLAP = "overlap"
    NON_OVERLAP = "non_overlap"
    SYNTHETIC_NOISE = "synthetic_noise"


@dataclass(frozen=True)
class ContaminationSpec:
    epsilon: float
    protocol: Protocol = Protocol.SYNTHETIC_NOISE
    noise_sigma: float | None = None  # synthetic_noise only; None = 3x train-normal std

    def __post_init__(self):
        if not 0.0 <= self.epsilon < 1.0:
            raise ValueError(f"contamination factor must be in [0, 1), got {self.epsilon}")
        if self.noise_sigma is not None and self.noise_sigma <= 0:
            raise ValueError("noise_sigma must be positive")


@dataclass(frozen=True)
class ContaminationResult:
    train: TabularDataset  # unlabeled view, safe to hand to detectors
    test_anomalies: TabularDataset  # anomaly pool after protocol adjustment
    audit_labels: np.ndarray  # true labels of the train rows (tests only)
    injected_indices: np.ndarray  # rows of the anomaly pool that were injected
    nominal_epsilon: float
    realized_epsilon: float


def _round_half_up(x: float) -> int:
    return int(math.floor(x + 0.5))


def required_injection_count(n_normals: int, epsilon: float) -> int:
    """Anomaly count a with a / (normals + a) as close to epsilon as rounding allows."""
    return _round_half_up(epsilon * n_normals / (1.0 - epsilon))


def synthetic_anomalies(
    test_anomalies: TabularDataset,
    sigma,
    seed: SeedStream,
    count: int | None = None,
) -> TabularDataset:
    """Noised copies of test anomalies: rows sampled with replacement, plus
    zero-mean Gaussian noise per feature. ``sigma`` may be a scalar or a
    per-feature vector."""
    if test_anomalies.n_samples == 0:
        raise ValueError("no anomalies to perturb")
    sigma = np.asarray(sigma, dtype=np.float64)
    if np.any(sigma <= 0):
        raise ValueError("sigma must be positive")
    if count is None:
        count = test_anomalies.n_samples
    rng = seed.generator()
    rows = rng.integers(test_anomalies.n_samples, size=count)
    noise = rng.standard_normal((count, test_anomalies.n_features)) * sigma
    features = test_anomalies.features[rows] + noise
    labels = np.full(count, Label.ANOMALOUS, dtype=np.int8)
    return TabularDataset(features, labels, f"{test_anomalies.name}_noised")


def contaminate_train(
    normals: TabularDataset,
    anomalies: TabularDataset,
    spec: ContaminationSpec,
    seed: SeedStream,
) -> ContaminationResult:
    """Mix anomalies into the normal training rows per the chosen protocol.

    overlap: injected anomalies are sampled from the pool and stay in it.
    non_overlap: injected anomalies are removed from the pool.
    synthetic_noise: noised copies are injected; the pool is untouched.
    """
    m = normals.n_samples
    a = required_injection_count(m, spec.epsilon)
    rng = seed.generator()
    if a == 0:
        injected = np.empty(0, dtype=np.intp)
        train_features = normals.features
    elif spec.protocol is Protocol.SYNTHETIC_NOISE:
        sigma = spec.noise_sigma
        if sigma is None:
            sigma = 3.0 * np.maximum(normals.features.std(axis=0), 1e-12)
        noised = synthetic_anomalies(anomalies, sigma, seed.child(0), count=a)
        injected = np.empty(0, dtype=np.intp)
        train_features = np.vstack([normals.features, noised.features])
    else:
        if a > anomalies.n_samples:
            raise DataError(
                f"need {a} anomalies for epsilon={spec.epsilon} but only "
                f"{anomalies.n_samples} are available"
            )
        injected = np.sort(rng.choice(anomalies.n_samples, size=a, replace=False))
        train_features = np.vstack([normals.features, anomalies.features[injected]])
    audit = np.concatenate(
        [np.full(m, Label.NORMAL, dtype=np.int8), np.full(len(train_features) - m, Label.ANOMALOUS, dtype=np.int8)]
    )
    if spec.protocol is Protocol.NON_OVERLAP and injected.size:
        keep = np.setdiff1d(np.arange(anomalies.n_samples), injected)
        if keep.size == 0:
            raise DataError(
                "non_overlap injection consumed every anomaly; nothing left for the test set"
            )
        pool = anomalies.select(keep)
    else:
        pool = anomalies
    total = train_features.shape[0]
    return ContaminationResult(
        train=TabularDataset(train_features, None, f"{normals.name}_contaminated"),
        test_anomalies=pool,
        audit_labels=audit,
        injected_indices=injected,
        nominal_epsilon=spec.epsilon,
        realized_epsilon=(total - m) / total,
    )


@dataclass(frozen=True)
class TabularSplit:
    train_normals: TabularDataset
    test: TabularDataset
    test_original_indices: np.ndarray  # rows of the source dataset, for score-file alignment


def split_tabular(dataset: TabularDataset, seed: SeedStream, train_fraction: float = 0.5) -> TabularSplit:
    """Half the normals (shuffled) become the clean training pool; the other
    half plus every true anomaly form the test set."""
    if dataset.labels is None:
        raise ValueError("labeled dataset required for benchmark splits")
    if not 0.0 < train_fraction < 1.0:
        raise ValueError("train_fraction must be strictly between 0 and 1")
    labels = dataset.labels
    normal_idx = np.flatnonzero(labels == Label.NORMAL)
    anomaly_idx = np.flatnonzero(labels == Label.ANOMALOUS)
    if normal_idx.size < 2:
        raise ValueError("need at least 2 normal samples to split")
    rng = seed.generator()
    order = rng.permutation(normal_idx.size)
    n_train = int(round(train_fraction * normal_idx.size))
    n_train = min(max(n_train, 1), normal_idx.size - 1)
    train_rows = normal_idx[order[:n_train]]
    test_rows = np.concatenate([normal_idx[order[n_train:]], anomaly_idx])
    return TabularSplit(
        train_normals=dataset.select(train_rows, f"{dataset.name}_train").without_labels(),
        test=dataset.select(test_rows, f"{dataset.name}_test"),
        test_original_indices=test_rows,
    )
