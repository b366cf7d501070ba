"""Plain k-th-nearest-neighbor distance baseline."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.spatial.distance import cdist

from ..data import Orientation, ScoreVector, TabularDataset


@dataclass(frozen=True)
class KnnDistanceModel:
    reference_points: np.ndarray
    k: int

    def __post_init__(self):
        if self.k < 1 or self.k > self.reference_points.shape[0]:
            raise ValueError(f"k={self.k} out of range for {self.reference_points.shape[0]} points")


def knn_fit(data: TabularDataset, k: int) -> KnnDistanceModel:
    return KnnDistanceModel(data.features, k)


def knn_distance_score(model: KnnDistanceModel, queries) -> ScoreVector:
    """Euclidean distance from each query to its k-th nearest reference point."""
    queries = np.atleast_2d(np.asarray(queries, dtype=np.float64))
    if queries.shape[1] != model.reference_points.shape[1]:
        raise ValueError("query dimensionality does not match the reference points")
    dists = cdist(queries, model.reference_points)
    kth = np.partition(dists, model.k - 1, axis=1)[:, model.k - 1]
    return ScoreVector(kth, Orientation.ANOMALY_HIGH, source=f"knn{model.k}")
