"""Score fusion by exponential tilting, plus the discrete-density machinery
used to verify the tilting theory numerically.

Two parallel tracks live here:

* the score track (``fuse_scores``, ``revised_detector``) that production
  runs use. It works on the proportional form, where the revised inlier
  score is ``s_in + T/beta`` and normalizing constants never materialize;
* the density track (``tilt_density``, ``kl_divergence``,
  ``tilt_condition_report``, ``kl_objective``) on discretized grids, which
  checks that tilting reduces the divergence to the inlier density exactly
  when the sign condition holds, and that the tilted density maximizes the
  KL-regularized objective.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .data import Label, Orientation, ScoreVector, reorient, standardize


@dataclass(frozen=True)
class FusionConfig:
    """All fusion knobs: temperature, normalization, working orientation.

    ``beta`` trades the base model (large beta) against the evidence
    (small beta). Both inputs are standardized with ``normalization``
    after being expressed in ``evidence_orientation_expected`` (inlier-high),
    so a single beta is comparable across detectors with different scales.
    """

    beta: float
    normalization: str = "zscore"
    evidence_orientation_expected: Orientation = Orientation.INLIER_HIGH

    def __post_init__(self):
        if not (np.isfinite(self.beta) and self.beta > 0):
            raise ValueError(f"beta must be a positive finite real, got {self.beta}")
        if self.normalization not in ("none", "zscore", "minmax"):
            raise ValueError(f"unknown normalization {self.normalization!r}")
        if self.evidence_orientation_expected is not Orientation.INLIER_HIGH:
            raise ValueError("fusion operates on inlier-high scores")


@dataclass(frozen=True)
class DetectorThreshold:
    """Decision threshold on the (revised) inlier score."""

    lam: float

    def __post_init__(self):
        if not np.isfinite(self.lam):
            raise ValueError("threshold must be finite")


def fuse_scores(base: ScoreVector, evidence: ScoreVector, config: FusionConfig) -> ScoreVector:
    """Revised inlier score: norm(s_in) + norm(T)/beta, elementwise.

    Inputs may arrive in either orientation; both are reoriented to
    inlier-high first, then standardized per ``config.normalization``.
    """
    if len(base) != len(evidence):
        raise ValueError(f"length mismatch: base {len(base)} vs evidence {len(evidence)}")
    target = config.evidence_orientation_expected
    s_in = standardize(reorient(base, target), config.normalization).values
    t_in = standardize(reorient(evidence, target), config.normalization).values
    fused = s_in + t_in / config.beta
    return ScoreVector(fused, target, source=f"fused({base.source},{evidence.source})")


def revised_detector(scores: ScoreVector, threshold: DetectorThreshold) -> np.ndarray:
    """Classify each sample: normal iff the inlier score is >= the threshold."""
    values = reorient(scores, Orientation.INLIER_HIGH).values
    labels = np.where(values >= threshold.lam, Label.NORMAL, Label.ANOMALOUS)
    return labels.astype(np.int8)


# ---------------------------------------------------------------------------
# discrete densities
# ---------------------------------------------------------------------------

_SUM_TOL = 1e-12


@dataclass(frozen=True)
class DiscreteDensity:
    """Probability mass on K grid points (1-d or 2-d supports)."""

    support: np.ndarray
    probabilities: np.ndarray

    def __post_init__(self):
        support = np.array(self.support, dtype=np.float64)
        probs = np.array(self.probabilities, dtype=np.float64)
        if probs.ndim != 1:
            raise ValueError("probabilities must be a flat vector")
        if support.shape[0] != probs.shape[0]:
            raise ValueError("support and probabilities differ in length")
        if np.any(probs < 0):
            raise ValueError("negative probability mass")
        if abs(probs.sum() - 1.0) > _SUM_TOL:
            raise ValueError(f"probabilities sum to {probs.sum()!r}, not 1")
        support.flags.writeable = False
        probs.flags.writeable = False
        object.__setattr__(self, "support", support)
        object.__setattr__(self, "probabilities", probs)

    @classmethod
    def from_weights(cls, support, weights) -> "DiscreteDensity":
        w = np.asarray(weights, dtype=np.float64)
        total = w.sum()
        if not (np.isfinite(total) and total > 0):
            raise ValueError("weights must have positive finite total mass")
        return cls(support, w / total)

    def __len__(self) -> int:
        return self.probabilities.shape[0]


def midpoint_grid(lo: float, hi: float, cells: int) -> np.ndarray:
    """Cell midpoints of a uniform grid on [lo, hi]."""
    edges = np.linspace(lo, hi, cells + 1)
    return 0.5 * (edges[:-1] + edges[1:])


def discretize_pdf(pdf, lo: float, hi: float, cells: int = 2000) -> DiscreteDensity:
    """Midpoint-quadrature discretization of a 1-d pdf, renormalized to 1."""
    x = midpoint_grid(lo, hi, cells)
    return DiscreteDensity.from_weights(x, pdf(x))


def discretize_pdf_2d(pdf, lo: float, hi: float, cells: int = 200) -> DiscreteDensity:
    """Same on a square [lo, hi]^2 grid; ``pdf`` maps an (K, 2) array to weights."""
    axis = midpoint_grid(lo, hi, cells)
    xx, yy = np.meshgrid(axis, axis)
    support = np.column_stack([xx.ravel(), yy.ravel()])
    return DiscreteDensity.from_weights(support, pdf(support))


def tilt_density(base: DiscreteDensity, evidence_values, beta: float) -> DiscreteDensity:
    """Reweight a density by exp(T/beta) and renormalize.

    The maximum of T/beta is subtracted before exponentiation so large
    evidence never overflows.
    """
    if not (np.isfinite(beta) and beta > 0):
        raise ValueError(f"beta must be a positive finite real, got {beta}")
    t = np.asarray(evidence_values, dtype=np.float64)
    if t.shape[0] != len(base):
        raise ValueError("evidence values do not align with the density support")
    scaled = t / beta
    weights = base.probabilities * np.exp(scaled - scaled.max())
    total = weights.sum()
    if not (np.isfinite(total) and total > 0):
        raise ValueError("tilted density has no mass; cannot normalize")
    return DiscreteDensity(base.support, weights / total)


def kl_divergence(p: DiscreteDensity, q: DiscreteDensity) -> float:
    """KL(p || q) with the 0 log 0 = 0 convention; requires q > 0 wherever p > 0."""
    if len(p) != len(q):
        raise ValueError("densities differ in support size")
    pp, qq = p.probabilities, q.probabilities
    mask = pp > 0
    if np.any(qq[mask] == 0):
        raise ValueError("absolute continuity violated: p > 0 where q = 0")
    return float(np.sum(pp[mask] * np.log(pp[mask] / qq[mask])))


def log_normalizer(base: DiscreteDensity, evidence_values, beta: float) -> float:
    """log of sum_k p_k exp(T_k/beta), computed with a max shift."""
    scaled = np.asarray(evidence_values, dtype=np.float64) / beta
    m = scaled.max()
    return float(m + np.log(np.sum(base.probabilities * np.exp(scaled - m))))


@dataclass(frozen=True)
class TiltConditionReport:
    """Numeric check of the tilting improvement condition on one instance.

    ``condition_value`` is the expectation, under the inlier density, of
    T/beta - log Z. The identity
    ``kl_before - kl_after == condition_value`` holds exactly on discrete
    supports, so the divergence to the inlier density shrinks iff the
    condition value is positive.
    """

    condition_value: float
    kl_before: float
    kl_after: float


def tilt_condition_report(
    f_plus: DiscreteDensity,
    f_mix: DiscreteDensity,
    evidence_values,
    beta: float,
) -> TiltConditionReport:
    t = np.asarray(evidence_values, dtype=np.float64)
    if len(f_plus) != len(f_mix) or t.shape[0] != len(f_plus):
        raise ValueError("inlier density, mixture density and evidence must share a support")
    log_z = log_normalizer(f_mix, t, beta)
    condition = float(np.sum(f_plus.probabilities * (t / beta - log_z)))
    kl_before = kl_divergence(f_plus, f_mix)
    kl_after = kl_divergence(f_plus, tilt_density(f_mix, t, beta))
    return TiltConditionReport(condition, kl_before, kl_after)


def kl_objective(candidate: DiscreteDensity, base: DiscreteDensity, evidence_values, beta: float) -> float:
    """Evidence alignment minus beta times the divergence from the base:
    sum_k q_k T_k - beta * KL(q || p). The tilted density is its maximizer."""
    t = np.asarray(evidence_values, dtype=np.float64)
    if t.shape[0] != len(candidate):
        raise ValueError("evidence values do not align with the candidate support")
    return float(np.sum(candidate.probabilities * t) - beta * kl_divergence(candidate, base))
