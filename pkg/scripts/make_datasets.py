#!/usr/bin/env python3
"""Regenerate the bundled anomaly-detection CSVs under src/tiltfuse/datasets/.

Each dataset is derived deterministically from a scikit-learn built-in:

* wine: cultivars 2 and 3 of the UCI wine data are the normal class
  (119 rows); 10 rows of cultivar 1 (fixed subsample) are the anomalies.
* breast: benign WDBC cases are normal (357 rows); 21 malignant rows
  (fixed subsample, ~5.6% anomaly ratio) are the anomalies.

Run from the repository root:  python scripts/make_datasets.py
Requires scikit-learn (generation only; the package itself never needs it).
"""

import csv
from pathlib import Path

import numpy as np
from sklearn.datasets import load_breast_cancer, load_wine

OUT_DIR = Path(__file__).resolve().parent.parent / "src" / "tiltfuse" / "datasets"


def write_csv(path, features, labels, feature_names):
    names = [n.replace(" ", "_").replace("/", "_") for n in feature_names]
    with path.open("w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle)
        writer.writerow(names + ["label"])
        for row, label in zip(features, labels):
            writer.writerow([format(v, ".10g") for v in row] + [int(label)])
    print(f"wrote {path} ({features.shape[0]} rows, {features.shape[1]} features, "
          f"{int(labels.sum())} anomalies)")


def make_wine(rng):
    raw = load_wine()
    normal = raw.data[raw.target != 0]
    outlier_pool = raw.data[raw.target == 0]
    picked = rng.choice(outlier_pool.shape[0], size=10, replace=False)
    features = np.vstack([normal, outlier_pool[np.sort(picked)]])
    labels = np.concatenate([np.zeros(normal.shape[0]), np.ones(10)])
    write_csv(OUT_DIR / "wine.csv", features, labels, list(raw.feature_names))


def make_breast(rng):
    raw = load_breast_cancer()
    normal = raw.data[raw.target == 1]  # benign
    outlier_pool = raw.data[raw.target == 0]  # malignant
    picked = rng.choice(outlier_pool.shape[0], size=21, replace=False)
    features = np.vstack([normal, outlier_pool[np.sort(picked)]])
    labels = np.concatenate([np.zeros(normal.shape[0]), np.ones(21)])
    write_csv(OUT_DIR / "breast.csv", features, labels, list(raw.feature_names))


if __name__ == "__main__":
    rng = np.random.default_rng(20240101)
    make_wine(rng)
    make_breast(rng)
