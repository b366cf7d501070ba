"""Post-hoc anomaly-score adjustment toolkit.

Fuses the scores of a detector trained on contaminated data with test-time
evidence via exponential tilting, optionally choosing the temperature from
rank-calibrated inlier probabilities, and ships the classical detectors,
contamination protocols and evaluation harness needed to run desk-scale
benchmark experiments.
"""

from .calibration import AdaConfig, AdaFusionResult, beta_ada, binary_entropy_sum, fuse_ada, inlier_probability
from .contamination import (
    ContaminationResult,
    ContaminationSpec,
    GaussianMixtureSpec,
    Protocol,
    TOY_ANOMALOUS,
    TOY_NORMAL,
    contaminate_train,
    sample_toy,
    split_tabular,
    synthetic_anomalies,
)
from .data import (
    Label,
    Orientation,
    ScoreVector,
    SeedStream,
    TabularDataset,
    load_csv,
    load_scores,
    reorient,
    save_scores,
    standardize,
)
from .errors import ConfigError, DataError
from .evaluation import ExperimentReport, ReportCell, aggregate, auroc, kendall_tau
from .fusion import (
    DetectorThreshold,
    DiscreteDensity,
    FusionConfig,
    TiltConditionReport,
    discretize_pdf,
    discretize_pdf_2d,
    fuse_scores,
    kl_divergence,
    kl_objective,
    midpoint_grid,
    revised_detector,
    tilt_condition_report,
    tilt_density,
)

__version__ = "0.1.0"

__all__ = [
    "AdaConfig",
    "AdaFusionResult",
    "ConfigError",
    "ContaminationResult",
    "ContaminationSpec",
    "DataError",
    "DetectorThreshold",
    "DiscreteDensity",
    "ExperimentReport",
    "FusionConfig",
    "GaussianMixtureSpec",
    "Label",
    "Orientation",
    "Protocol",
    "ReportCell",
    "ScoreVector",
    "SeedStream",
    "TOY_ANOMALOUS",
    "TOY_NORMAL",
    "TabularDataset",
    "TiltConditionReport",
    "aggregate",
    "auroc",
    "beta_ada",
    "binary_entropy_sum",
    "contaminate_train",
    "discretize_pdf",
    "discretize_pdf_2d",
    "fuse_ada",
    "fuse_scores",
    "inlier_probability",
    "kendall_tau",
    "kl_divergence",
    "kl_objective",
    "load_csv",
    "load_scores",
    "midpoint_grid",
    "reorient",
    "revised_detector",
    "sample_toy",
    "save_scores",
    "split_tabular",
    "standardize",
    "synthetic_anomalies",
    "tilt_condition_report",
    "tilt_density",
]
