"""Deterministic report files: cells.csv, aggregates.csv, run_meta.json,
grid.csv. Numeric output uses 6 significant digits everywhere, so two runs
with the same master seed are byte-identical."""

from __future__ import annotations

import csv
import json
from pathlib import Path

import numpy as np

from . import __version__
from .config import ExperimentConfig, config_to_dict
from .evaluation import ExperimentReport


def fmt6(value) -> str:
    """6-significant-digit rendering; empty string for missing values."""
    if value is None:
        return ""
    return format(float(value), ".6g")


CELL_FIELDS = (
    "dataset",
    "detector",
    "evidence",
    "method",
    "beta",
    "beta_used",
    "epsilon",
    "test_anomaly_fraction",
    "seed",
    "auroc",
)


def write_report(out_dir, report: ExperimentReport) -> None:
    out_dir = Path(out_dir)
    write_cells_csv(out_dir / "cells.csv", report.cells)
    write_aggregates_csv(out_dir / "aggregates.csv", report.aggregates)


def write_cells_csv(path, cells) -> None:
    with Path(path).open("w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle)
        writer.writerow(CELL_FIELDS)
        for c in cells:
            writer.writerow(
                [
                    c.dataset,
                    c.detector,
                    c.evidence,
                    c.method,
                    fmt6(c.beta),
                    fmt6(c.beta_used),
                    fmt6(c.epsilon),
                    fmt6(c.test_anomaly_fraction),
                    c.seed,
                    fmt6(c.auroc),
                ]
            )


AGGREGATE_FIELDS = (
    "dataset",
    "detector",
    "evidence",
    "method",
    "beta",
    "epsilon",
    "test_anomaly_fraction",
    "mean_auroc",
    "se_auroc",
    "n_seeds",
    "se_defined",
)


def write_aggregates_csv(path, rows) -> None:
    with Path(path).open("w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle)
        writer.writerow(AGGREGATE_FIELDS)
        for row in rows:
            writer.writerow(
                [
                    row.dataset,
                    row.detector,
                    row.evidence,
                    row.method,
                    fmt6(row.beta),
                    fmt6(row.epsilon),
                    fmt6(row.test_anomaly_fraction),
                    fmt6(row.mean_auroc),
                    fmt6(row.se_auroc),
                    row.n_seeds,
                    int(row.se_defined),
                ]
            )


def write_run_meta(path, config: ExperimentConfig, realized_epsilon: dict, command: str) -> None:
    meta = {
        "command": command,
        "config": config_to_dict(config),
        "realized_epsilon": {
            f"{name}@epsilon={fmt6(eps)}": float(fmt6(value))
            for (name, eps), value in sorted(realized_epsilon.items())
        },
        "versions": {"tiltfuse": __version__, "numpy": np.__version__},
    }
    Path(path).write_text(json.dumps(meta, indent=2, sort_keys=True) + "\n", encoding="utf-8")


def write_grid_csv(path, rows) -> None:
    with Path(path).open("w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle)
        writer.writerow(["x", "y", "blind_score", "fused_score"])
        for x, y, blind, fused in rows:
            writer.writerow([fmt6(x), fmt6(y), fmt6(blind), fmt6(fused)])


def write_fused_scores_csv(path, fused_values, beta_used: float) -> None:
    with Path(path).open("w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle)
        writer.writerow(["index", "fused_score", "beta_used"])
        for i, value in enumerate(fused_values):
            writer.writerow([i, fmt6(value), fmt6(beta_used)])
