"""Adaptive temperature selection from rank-based inlier probabilities.

A score's inlier probability is the posterior mean of a Beta(1,1)-prior
estimate of P(S <= s), counted against a reference sample of scores:
p_inlier = 1 - (1 + t) / (2 + n) with t = #{s' <= s}. Probabilities are
strictly inside (0,1) by construction, so binary entropies are always
well defined. The adaptive temperature is the ratio of the evidence
entropy to the base-score entropy: confident (low-entropy) evidence pulls
the temperature down, a confident base model pushes it up.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .data import Orientation, ScoreVector, reorient
from .fusion import FusionConfig, fuse_scores


@dataclass(frozen=True)
class AdaConfig:
    """Numerical stabilizer for the entropy ratio."""

    delta: float = 1e-12

    def __post_init__(self):
        if not (np.isfinite(self.delta) and self.delta > 0):
            raise ValueError("delta must be a positive finite real")


@dataclass(frozen=True)
class InlierProbabilities:
    p_inlier: np.ndarray
    n_reference: int

    def __post_init__(self):
        p = np.array(self.p_inlier, dtype=np.float64)
        if np.any(p <= 0) or np.any(p >= 1):
            raise ValueError("inlier probabilities must be strictly inside (0, 1)")
        p.flags.writeable = False
        object.__setattr__(self, "p_inlier", p)


def inlier_probability(scores: ScoreVector, reference: ScoreVector) -> InlierProbabilities:
    """Rank each score against the reference sample; higher anomaly score
    means lower inlier probability.

    Both vectors are expressed anomaly-high before counting. With
    t = #{r in reference : r <= s} (ties count, and a score that belongs to
    the reference counts itself), n = |reference|:
    p_inlier = 1 - (1 + t) / (2 + n), always in [1/(2+n), (1+n)/(2+n)].
    """
    if len(reference) == 0:
        raise ValueError("reference sample is empty")
    s = reorient(scores, Orientation.ANOMALY_HIGH).values
    ref = np.sort(reorient(reference, Orientation.ANOMALY_HIGH).values)
    n = ref.shape[0]
    t = np.searchsorted(ref, s, side="right")
    p_inlier = 1.0 - (1.0 + t) / (2.0 + n)
    return InlierProbabilities(p_inlier, n)


def binary_entropy_sum(probs: InlierProbabilities) -> float:
    """Sum over samples of the two-class entropy (natural log)."""
    p = probs.p_inlier
    q = 1.0 - p
    return float(-np.sum(p * np.log(p) + q * np.log(q)))


def beta_ada(
    base_scores: ScoreVector,
    evidence_scores: ScoreVector,
    config: AdaConfig = AdaConfig(),
) -> float:
    """Unsupervised temperature: evidence entropy over base entropy.

    Each score vector is calibrated against itself as the reference
    sample. The result depends only on ranks, so it is invariant to any
    strictly increasing rescaling of either input.
    """
    if len(base_scores) != len(evidence_scores):
        raise ValueError("base and evidence score vectors differ in length")
    if len(base_scores) == 0:
        raise ValueError("cannot adapt the temperature on empty inputs")
    h_base = binary_entropy_sum(inlier_probability(base_scores, base_scores))
    h_evidence = binary_entropy_sum(inlier_probability(evidence_scores, evidence_scores))
    return h_evidence / (h_base + config.delta)


@dataclass(frozen=True)
class AdaFusionResult:
    scores: ScoreVector
    beta_used: float


def fuse_ada(
    base: ScoreVector,
    evidence: ScoreVector,
    normalization: str = "zscore",
    ada: AdaConfig = AdaConfig(),
) -> AdaFusionResult:
    """Pick the temperature adaptively, then fuse.

    Exactly equivalent to ``fuse_scores`` called with ``beta_ada(...)``;
    the chosen temperature is returned for reporting.
    """
    beta = beta_ada(base, evidence, ada)
    fused = fuse_scores(base, evidence, FusionConfig(beta=beta, normalization=normalization))
    return AdaFusionResult(fused, beta)
