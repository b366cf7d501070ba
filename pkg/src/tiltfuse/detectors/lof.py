"""Local outlier factor with the classical reachability-density construction.

Neighborhoods are tie-inclusive: every point whose distance is at most the
k-distance belongs to the neighborhood, so it can hold more than k points.
The reachability distance of x from a neighbor o is
max(k-distance(o), d(x, o)); the neighbor's own k-distance smooths the
density estimate. A point scoring 1 sits in locally uniform density;
values well above 1 mark outliers.

Scoring is transductive-friendly: a query that coincides with a reference
point excludes that one copy from its own neighborhood, so scoring the
fit set reproduces the fitted values exactly.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.spatial.distance import cdist

from ..data import Orientation, ScoreVector, TabularDataset

# Keeps reachability positive on exact duplicates, so densities stay finite.
REACH_FLOOR = 1e-12


@dataclass(frozen=True)
class LofModel:
    reference_points: np.ndarray
    k: int
    k_distance: np.ndarray  # per reference point
    lrd: np.ndarray  # local reachability density per reference point


def _neighborhood_stats(dist_row: np.ndarray, k: int, k_distance_all: np.ndarray):
    """k-distance, tie-inclusive neighbor indices and the LRD ingredients
    for one point, given its distances to every reference point (self
    already masked to +inf when applicable)."""
    kth = np.partition(dist_row, k - 1)[k - 1]
    neighbors = np.flatnonzero(dist_row <= kth)
    reach = np.maximum(k_distance_all[neighbors], dist_row[neighbors])
    reach = np.maximum(reach, REACH_FLOOR)
    lrd = 1.0 / reach.mean()
    return kth, neighbors, lrd


def lof_fit(data: TabularDataset, k: int) -> LofModel:
    points = data.features
    m = points.shape[0]
    if m < 2:
        raise ValueError("LOF needs at least 2 points")
    if not 1 <= k < m:
        raise ValueError(f"k={k} must satisfy 1 <= k < n={m}")
    dists = cdist(points, points)
    np.fill_diagonal(dists, np.inf)
    # k-distances first: every point's LRD depends on its neighbors' k-distances.
    k_distance = np.partition(dists, k - 1, axis=1)[:, k - 1]
    lrd = np.empty(m)
    for i in range(m):
        _, neighbors, lrd_i = _neighborhood_stats(dists[i], k, k_distance)
        lrd[i] = lrd_i
    return LofModel(points, k, k_distance, lrd)


def lof_score(model: LofModel, queries) -> ScoreVector:
    """Ratio of the neighbors' mean reachability density to the query's own."""
    queries = np.atleast_2d(np.asarray(queries, dtype=np.float64))
    if queries.shape[1] != model.reference_points.shape[1]:
        raise ValueError("query dimensionality does not match the reference points")
    dists = cdist(queries, model.reference_points)
    scores = np.empty(queries.shape[0])
    for i in range(queries.shape[0]):
        row = dists[i].copy()
        exact = np.flatnonzero((model.reference_points == queries[i]).all(axis=1))
        if exact.size:
            row[exact[0]] = np.inf  # self-exclusion: drop one coinciding copy
        _, neighbors, lrd_q = _neighborhood_stats(row, model.k, model.k_distance)
        scores[i] = model.lrd[neighbors].mean() / lrd_q
    return ScoreVector(scores, Orientation.ANOMALY_HIGH, source=f"lof{model.k}")
