"""Threshold-free evaluation: AUROC with midrank tie handling, Kendall tau,
and mean +/- standard-error aggregation of experiment cells."""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from .data import Label, Orientation, ScoreVector, reorient


def _midranks(values: np.ndarray) -> np.ndarray:
    """Ranks 1..n; tied values share the mean rank of their tie group."""
    order = np.argsort(values, kind="mergesort")
    ranks = np.empty(len(values), dtype=np.float64)
    sorted_vals = values[order]
    i = 0
    while i < len(values):
        j = i
        while j + 1 < len(values) and sorted_vals[j + 1] == sorted_vals[i]:
            j += 1
        ranks[order[i : j + 1]] = 0.5 * (i + j) + 1.0
        i = j + 1
    return ranks


def auroc(scores: ScoreVector, labels) -> float:
    """Probability that a random anomalous sample outranks a random normal one.

    Ties count one half (Mann-Whitney midranks). ``scores`` may carry either
    orientation; they are expressed anomaly-high before ranking.
    """
    labels = np.asarray(labels, dtype=np.int8)
    values = reorient(scores, Orientation.ANOMALY_HIGH).values
    if labels.shape[0] != values.shape[0]:
        raise ValueError("scores and labels differ in length")
    anom = labels == Label.ANOMALOUS
    n_anom = int(anom.sum())
    n_norm = labels.shape[0] - n_anom
    if n_anom == 0 or n_norm == 0:
        raise ValueError("AUROC needs at least one normal and one anomalous sample")
    ranks = _midranks(values)
    u = ranks[anom].sum() - n_anom * (n_anom + 1) / 2.0
    return float(u / (n_anom * n_norm))


def kendall_tau(a: ScoreVector, b: ScoreVector) -> float:
    """Kendall tau-a: (concordant - discordant) / all pairs; tied pairs add 0."""
    if len(a) != len(b):
        raise ValueError("score vectors differ in length")
    n = len(a)
    if n < 2:
        raise ValueError("kendall_tau needs at least 2 samples")
    av, bv = a.values, b.values
    sa = np.sign(av[:, None] - av[None, :])
    sb = np.sign(bv[:, None] - bv[None, :])
    upper = np.triu_indices(n, k=1)
    total = n * (n - 1) // 2
    return float((sa[upper] * sb[upper]).sum() / total)


@dataclass(frozen=True)
class ReportCell:
    """One experiment measurement: a single AUROC for a single seed."""

    dataset: str
    detector: str
    evidence: str
    method: str
    beta: float | None  # configured temperature; None when not applicable
    beta_used: float | None  # realized temperature (adaptive runs fill this)
    epsilon: float
    test_anomaly_fraction: float | None
    seed: int
    auroc: float


@dataclass(frozen=True)
class AggregateRow:
    dataset: str
    detector: str
    evidence: str
    method: str
    beta: float | None
    epsilon: float
    test_anomaly_fraction: float | None
    mean_auroc: float
    se_auroc: float
    n_seeds: int
    se_defined: bool


@dataclass(frozen=True)
class ExperimentReport:
    cells: tuple[ReportCell, ...]
    aggregates: tuple[AggregateRow, ...] = field(default=())

    def with_aggregates(self) -> "ExperimentReport":
        return replace(self, aggregates=tuple(aggregate(self.cells)))


def _group_key(cell: ReportCell):
    return (
        cell.dataset,
        cell.detector,
        cell.evidence,
        cell.method,
        -np.inf if cell.beta is None else cell.beta,
        cell.epsilon,
        -np.inf if cell.test_anomaly_fraction is None else cell.test_anomaly_fraction,
    )


def aggregate(cells) -> list[AggregateRow]:
    """Mean and standard error of AUROC per group of seeds.

    Groups over every cell field except the seed. SE uses the sample
    standard deviation (n-1); a single seed yields SE 0 with the
    ``se_defined`` flag cleared. Output order is deterministic.
    """
    groups: dict[tuple, list[ReportCell]] = {}
    for cell in cells:
        groups.setdefault(_group_key(cell), []).append(cell)
    rows = []
    for key in sorted(groups):
        members = groups[key]
        values = np.array([c.auroc for c in members], dtype=np.float64)
        k = len(values)
        se_defined = k > 1
        se = float(values.std(ddof=1) / np.sqrt(k)) if se_defined else 0.0
        first = members[0]
        rows.append(
            AggregateRow(
                dataset=first.dataset,
                detector=first.detector,
                evidence=first.evidence,
                method=first.method,
                beta=first.beta,
                epsilon=first.epsilon,
                test_anomaly_fraction=first.test_anomaly_fraction,
                mean_auroc=float(values.mean()),
                se_auroc=se,
                n_seeds=k,
                se_defined=se_defined,
            )
        )
    return rows
