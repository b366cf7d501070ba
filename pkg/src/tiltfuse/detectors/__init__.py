"""Score-based detectors, usable both as contaminated base models and as
transductive evidence functions. All of them emit anomaly-high scores."""

from .iforest import IsolationForest, iforest_fit, iforest_score
from .knn import KnnDistanceModel, knn_fit, knn_distance_score
from .lof import LofModel, lof_fit, lof_score
from .rbf_svdd import RbfSvddModel, rbf_svdd_fit, rbf_svdd_score

__all__ = [
    "IsolationForest",
    "iforest_fit",
    "iforest_score",
    "KnnDistanceModel",
    "knn_fit",
    "knn_distance_score",
    "LofModel",
    "lof_fit",
    "lof_score",
    "RbfSvddModel",
    "rbf_svdd_fit",
    "rbf_svdd_score",
]
