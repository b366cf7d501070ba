"""Isolation forest built on random axis-aligned splits of small subsamples.

Trees are grown to at most ceil(log2(subsample_size)); unresolved leaves
are credited with the average path length of an unsuccessful binary
search, c(n) = 2 H(n-1) - 2 (n-1)/n with H(i) = ln(i) + Euler's gamma,
and the per-query score is 2 ** (-E[path length] / c(subsample_size)),
always strictly inside (0, 1).

Internal nodes are (feature, threshold, left, right) tuples; a leaf is
just its sample count. Values equal to the threshold go right.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..data import Orientation, ScoreVector, SeedStream, TabularDataset

EULER_GAMMA = 0.5772156649


def average_unsuccessful_depth(n: int) -> float:
    """c(n): expected path length of an unsuccessful search in a BST of n points."""
    if n <= 1:
        return 0.0
    return 2.0 * (np.log(n - 1.0) + EULER_GAMMA) - 2.0 * (n - 1.0) / n


def _grow(x: np.ndarray, depth: int, max_depth: int, rng: np.random.Generator):
    size = x.shape[0]
    if size <= 1 or depth >= max_depth:
        return size
    mins = x.min(axis=0)
    maxs = x.max(axis=0)
    varying = np.flatnonzero(maxs > mins)
    if varying.size == 0:
        return size  # all rows identical; nothing can isolate them
    feature = int(varying[rng.integers(varying.size)])
    lo, hi = mins[feature], maxs[feature]
    threshold = rng.uniform(lo, hi)
    while not lo < threshold < hi:  # keep the split strictly inside the range
        threshold = rng.uniform(lo, hi)
    mask = x[:, feature] < threshold
    left = _grow(x[mask], depth + 1, max_depth, rng)
    right = _grow(x[~mask], depth + 1, max_depth, rng)
    return (feature, float(threshold), left, right)


@dataclass(frozen=True)
class IsolationForest:
    trees: tuple
    tree_count: int
    subsample_size: int
    max_depth: int
    n_features: int

    def to_debug_dict(self) -> dict:
        """JSON-friendly dump of every tree; for inspection, not a stable format."""

        def node_dict(node):
            if isinstance(node, int):
                return {"size": node}
            feature, threshold, left, right = node
            return {
                "feature": feature,
                "threshold": threshold,
                "left": node_dict(left),
                "right": node_dict(right),
            }

        return {
            "tree_count": self.tree_count,
            "subsample_size": self.subsample_size,
            "max_depth": self.max_depth,
            "trees": [node_dict(t) for t in self.trees],
        }


def iforest_fit(
    data: TabularDataset,
    tree_count: int = 100,
    subsample_size: int = 256,
    seed: SeedStream = SeedStream(0),
) -> IsolationForest:
    """Grow ``tree_count`` trees on independent uniform subsamples.

    Subsampling is without replacement when the dataset is at least as
    large as the subsample, with replacement otherwise. Split features are
    uniform over the features that still vary at the node; thresholds are
    uniform strictly between the node's min and max on that feature.
    """
    if tree_count < 1:
        raise ValueError("tree_count must be at least 1")
    if subsample_size < 2:
        raise ValueError("subsample_size must be at least 2")
    x = data.features
    n = x.shape[0]
    if n < 2:
        raise ValueError("need at least 2 samples")
    max_depth = int(np.ceil(np.log2(subsample_size)))
    rng = seed.generator()
    trees = []
    for _ in range(tree_count):
        idx = rng.choice(n, size=subsample_size, replace=n < subsample_size)
        trees.append(_grow(x[idx], 0, max_depth, rng))
    return IsolationForest(tuple(trees), tree_count, subsample_size, max_depth, x.shape[1])


def _route(node, x: np.ndarray, idx: np.ndarray, depth: int, out: np.ndarray) -> None:
    while not isinstance(node, int):
        feature, threshold, left, right = node
        mask = x[idx, feature] < threshold
        left_idx = idx[mask]
        if left_idx.size:
            _route(left, x, left_idx, depth + 1, out)
        idx = idx[~mask]
        if not idx.size:
            return
        node = right
        depth += 1
    out[idx] = depth + average_unsuccessful_depth(node)


def iforest_score(model: IsolationForest, queries) -> ScoreVector:
    """2 ** (-mean path length / c(subsample size)) per query, in (0, 1)."""
    x = np.atleast_2d(np.asarray(queries, dtype=np.float64))
    if x.shape[1] != model.n_features:
        raise ValueError("query dimensionality does not match the training data")
    n_queries = x.shape[0]
    total = np.zeros(n_queries)
    depths = np.empty(n_queries)
    all_idx = np.arange(n_queries)
    for tree in model.trees:
        _route(tree, x, all_idx, 0, depths)
        total += depths
    expected = total / model.tree_count
    scores = np.exp2(-expected / average_unsuccessful_depth(model.subsample_size))
    return ScoreVector(scores, Orientation.ANOMALY_HIGH, source="iforest")
