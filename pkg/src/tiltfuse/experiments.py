"""Config-driven experiment engine behind the CLI.

One experiment cell = (dataset, epsilon, test anomaly fraction, seed).
Each cell prepares its data, fits the base detector on the contaminated
training set, computes the evidence transductively on the test set (or
slices an external score file), and then derives every requested method
from those two cached score vectors: blind, evidence_only, refine, and
the fused variants across the temperature grid. Cells draw all randomness
from seed streams keyed by their grid position, so results are identical
regardless of execution order or thread count.
"""

from __future__ import annotations

import concurrent.futures
import csv
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .calibration import AdaConfig, fuse_ada
from .config import DatasetConfig, DetectorConfig, EvidenceConfig, ExperimentConfig
from .contamination import (
    ContaminationSpec,
    Protocol,
    contaminate_train,
    required_injection_count,
    sample_toy,
    split_tabular,
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
)
from .datasets import BUNDLED, load_bundled
from .detectors import (
    iforest_fit,
    iforest_score,
    knn_fit,
    knn_distance_score,
    lof_fit,
    lof_score,
    rbf_svdd_fit,
    rbf_svdd_score,
)
from .errors import ConfigError, DataError
from .evaluation import ReportCell, auroc
from .fusion import FusionConfig, fuse_scores

# sub-stream indices within one cell
_SPLIT, _CONTAMINATE, _FIT, _EVIDENCE, _COMPOSE = range(5)


def _load_dataset(spec: DatasetConfig) -> TabularDataset:
    if spec.path is not None:
        return load_csv(spec.path, label_column=spec.label_column, name=spec.name)
    if spec.name in BUNDLED:
        return load_bundled(spec.name)
    raise DataError(f"dataset {spec.name!r} is neither bundled ({', '.join(BUNDLED)}) nor a path")


def _fit_and_score(detector: DetectorConfig, train: TabularDataset, queries, stream: SeedStream) -> ScoreVector:
    if detector.name == "iforest":
        size = min(detector.subsample_size, train.n_samples)
        model = iforest_fit(train, detector.tree_count, max(size, 2), stream)
        return iforest_score(model, queries)
    if detector.name == "lof":
        k = min(detector.k, train.n_samples - 1)
        return lof_score(lof_fit(train, k), queries)
    if detector.name == "knn":
        k = min(detector.k, train.n_samples)
        return knn_distance_score(knn_fit(train, k), queries)
    if detector.name == "rbf_svdd":
        model = rbf_svdd_fit(train, epochs=detector.epochs, batch=detector.batch, lr=detector.lr, seed=stream)
        return rbf_svdd_score(model, queries)
    raise ConfigError(f"unknown detector {detector.name!r}")


def _evidence_scores(
    evidence: EvidenceConfig,
    test: TabularDataset,
    test_original_indices: np.ndarray | None,
    stream: SeedStream,
) -> ScoreVector:
    """Transductive evidence on the test batch, or a slice of an external file."""
    if evidence.name == "external":
        full = load_scores(evidence.path, Orientation.parse(evidence.orientation))
        if test_original_indices is None:
            raise DataError("external evidence requires a file-backed dataset with stable row order")
        if len(full) <= int(test_original_indices.max()):
            raise DataError(
                f"external score file {evidence.path} has {len(full)} rows but the "
                f"dataset needs index {int(test_original_indices.max())}"
            )
        return ScoreVector(full.values[test_original_indices], full.orientation, full.source)
    spec = DetectorConfig(
        name=evidence.name,
        k=evidence.k,
        tree_count=evidence.tree_count,
        subsample_size=evidence.subsample_size,
    )
    return _fit_and_score(spec, test.without_labels(), test.features, stream)


@dataclass(frozen=True)
class CellData:
    train: TabularDataset  # unlabeled, possibly contaminated
    test: TabularDataset  # labeled
    test_original_indices: np.ndarray | None
    realized_epsilon: float


def _compose_test(test: TabularDataset, indices: np.ndarray, fraction: float, stream: SeedStream):
    """Resample the test set to the requested anomaly fraction, size preserved."""
    labels = test.labels
    normal_rows = np.flatnonzero(labels == Label.NORMAL)
    anomaly_rows = np.flatnonzero(labels == Label.ANOMALOUS)
    n = test.n_samples
    n_anom = int(round(fraction * n))
    n_norm = n - n_anom
    if n_anom < 1 or n_norm < 1:
        raise DataError(f"test anomaly fraction {fraction} leaves an empty class for n={n}")
    if n_anom > anomaly_rows.size or n_norm > normal_rows.size:
        raise DataError(
            f"cannot realize test anomaly fraction {fraction}: have "
            f"{normal_rows.size} normals / {anomaly_rows.size} anomalies for n={n}"
        )
    rng = stream.generator()
    keep_n = normal_rows[rng.permutation(normal_rows.size)[:n_norm]]
    keep_a = anomaly_rows[rng.permutation(anomaly_rows.size)[:n_anom]]
    keep = np.concatenate([keep_n, keep_a])
    return test.select(keep), indices[keep]


def _prepare_toy(config: ExperimentConfig, epsilon: float, fraction: float | None, cell_stream: SeedStream) -> CellData:
    toy = config.toy
    # total train size is fixed; the anomaly share realizes epsilon up to rounding
    a = int(np.floor(epsilon * toy.n_train + 0.5))
    m = toy.n_train - a
    train = sample_toy(m, a, cell_stream.child(_SPLIT)).without_labels()
    frac = 0.1 if fraction is None else fraction
    n_anom = int(round(frac * toy.n_test))
    if not 0 < n_anom < toy.n_test:
        raise DataError(f"toy test needs both classes; fraction {frac} with n={toy.n_test} fails")
    test = sample_toy(toy.n_test - n_anom, n_anom, cell_stream.child(_CONTAMINATE))
    return CellData(train, test, None, a / toy.n_train)


def _prepare_tabular(
    dataset: TabularDataset,
    config: ExperimentConfig,
    epsilon: float,
    fraction: float | None,
    cell_stream: SeedStream,
) -> CellData:
    split = split_tabular(dataset, cell_stream.child(_SPLIT))
    test, indices = split.test, split.test_original_indices
    if fraction is not None:
        test, indices = _compose_test(test, indices, fraction, cell_stream.child(_COMPOSE))
    pool = test.select(np.flatnonzero(test.labels == Label.ANOMALOUS))
    if pool.n_samples == 0:
        raise DataError(f"dataset {dataset.name!r} has no anomalies to drive contamination")
    spec = ContaminationSpec(epsilon, Protocol.SYNTHETIC_NOISE)
    if required_injection_count(split.train_normals.n_samples, epsilon) > 0:
        result = contaminate_train(split.train_normals, pool, spec, cell_stream.child(_CONTAMINATE))
        train, realized = result.train, result.realized_epsilon
    else:
        train, realized = split.train_normals, 0.0
    if config.input_standardize:
        mu = train.features.mean(axis=0)
        sd = np.maximum(train.features.std(axis=0), 1e-12)
        train = TabularDataset((train.features - mu) / sd, None, train.name)
        test = TabularDataset((test.features - mu) / sd, test.labels, test.name)
    return CellData(train, test, indices, realized)


@dataclass(frozen=True)
class CellKey:
    dataset_index: int
    epsilon_index: int
    fraction_index: int
    seed: int


def _cell_stream(config: ExperimentConfig, key: CellKey) -> SeedStream:
    grid_index = key.epsilon_index * len(config.test_anomaly_fraction_grid) + key.fraction_index
    return SeedStream(config.master_seed).child(key.dataset_index, key.seed, grid_index)


def _refine_scores(config: ExperimentConfig, data: CellData, cell_stream: SeedStream, epsilon: float) -> ScoreVector:
    """Iterative filtering baseline: fit, drop the top-epsilon fraction of the
    current training set by anomaly score, refit; final fit after the rounds."""
    current = data.train
    for round_index in range(config.toy.refine_rounds):
        stream = cell_stream.child(_FIT, 1 + round_index)
        scores = _fit_and_score(config.detector, current, current.features, stream)
        n_drop = int(np.floor(epsilon * current.n_samples + 0.5))
        if n_drop == 0:
            break
        if current.n_samples - n_drop < 2:
            break
        keep = np.argsort(scores.values, kind="mergesort")[: current.n_samples - n_drop]
        current = current.select(np.sort(keep))
    final_stream = cell_stream.child(_FIT, 1 + config.toy.refine_rounds)
    return _fit_and_score(config.detector, current, data.test.features, final_stream)


def run_cell(config: ExperimentConfig, key: CellKey) -> tuple[list[ReportCell], float]:
    dataset_cfg = config.datasets[key.dataset_index]
    epsilon = config.epsilon_grid[key.epsilon_index]
    fraction = config.test_anomaly_fraction_grid[key.fraction_index]
    cell_stream = _cell_stream(config, key)
    if dataset_cfg.is_toy:
        if config.evidence.name == "external":
            raise ConfigError("external evidence cannot be aligned with generated toy data")
        data = _prepare_toy(config, epsilon, fraction, cell_stream)
    else:
        data = _prepare_tabular(_load_dataset(dataset_cfg), config, epsilon, fraction, cell_stream)

    base = _fit_and_score(config.detector, data.train, data.test.features, cell_stream.child(_FIT, 0))
    evidence = _evidence_scores(config.evidence, data.test, data.test_original_indices, cell_stream.child(_EVIDENCE))
    labels = data.test.labels

    def cell(method: str, beta, beta_used, value: float) -> ReportCell:
        return ReportCell(
            dataset=dataset_cfg.name,
            detector=config.detector.name,
            evidence=config.evidence.name,
            method=method,
            beta=beta,
            beta_used=beta_used,
            epsilon=epsilon,
            test_anomaly_fraction=fraction,
            seed=key.seed,
            auroc=value,
        )

    out = []
    for method in config.methods:
        if method == "blind":
            out.append(cell(method, None, None, auroc(base, labels)))
        elif method == "evidence_only":
            out.append(cell(method, None, None, auroc(evidence, labels)))
        elif method == "refine":
            refined = _refine_scores(config, data, cell_stream, epsilon)
            out.append(cell(method, None, None, auroc(refined, labels)))
        elif method == "ephad":
            for beta in config.beta_grid:
                fused = fuse_scores(base, evidence, FusionConfig(beta=beta, normalization=config.normalization))
                out.append(cell(method, beta, beta, auroc(fused, labels)))
        elif method == "ephad_ada":
            result = fuse_ada(base, evidence, normalization=config.normalization, ada=AdaConfig(config.delta))
            out.append(cell(method, None, result.beta_used, auroc(result.scores, labels)))
    return out, data.realized_epsilon


def enumerate_cells(config: ExperimentConfig) -> list[CellKey]:
    keys = []
    for d in range(len(config.datasets)):
        for e in range(len(config.epsilon_grid)):
            for f in range(len(config.test_anomaly_fraction_grid)):
                for seed in config.seeds:
                    keys.append(CellKey(d, e, f, seed))
    return keys


def run_experiment(config: ExperimentConfig):
    """Run every cell (optionally in parallel) and return (cells, realized epsilons).

    Output order and values are independent of thread count.
    """
    keys = enumerate_cells(config)
    if config.threads > 1:
        with concurrent.futures.ThreadPoolExecutor(max_workers=config.threads) as pool:
            results = list(pool.map(lambda k: run_cell(config, k), keys))
    else:
        results = [run_cell(config, k) for k in keys]
    cells: list[ReportCell] = []
    realized: dict[tuple[str, float], float] = {}
    for key, (cell_rows, realized_eps) in zip(keys, results):
        cells.extend(cell_rows)
        label = (config.datasets[key.dataset_index].name, config.epsilon_grid[key.epsilon_index])
        realized.setdefault(label, realized_eps)
    return cells, realized


# ---------------------------------------------------------------------------
# toy grid emission (for plotting decision surfaces)
# ---------------------------------------------------------------------------


def toy_score_grid(config: ExperimentConfig) -> list[tuple[float, float, float, float]]:
    """(x, y, blind score, fused score) over a square grid, anomaly-high.

    Uses the first seed's blind model and the first temperature; evidence at
    grid points comes from the transductive model fitted on that cell's test
    batch.
    """
    toy = config.toy
    first = CellKey(0, 0, 0, config.seeds[0])
    cell_stream = _cell_stream(config, first)
    data = _prepare_toy(config, config.epsilon_grid[0], config.test_anomaly_fraction_grid[0], cell_stream)
    model = rbf_svdd_fit(
        data.train,
        epochs=config.detector.epochs,
        batch=config.detector.batch,
        lr=config.detector.lr,
        seed=cell_stream.child(_FIT, 0),
    )
    axis = np.linspace(toy.grid_lo, toy.grid_hi, toy.grid_cells)
    xx, yy = np.meshgrid(axis, axis)
    points = np.column_stack([xx.ravel(), yy.ravel()])
    blind = rbf_svdd_score(model, points)
    lof_model = lof_fit(data.test.without_labels(), min(toy.lof_k, data.test.n_samples - 1))
    evidence = lof_score(lof_model, points)
    fused = fuse_scores(blind, evidence, FusionConfig(beta=config.beta_grid[0], normalization=config.normalization))
    fused_anomaly = -fused.values  # emit anomaly-high surfaces for both columns
    return [
        (float(p[0]), float(p[1]), float(b), float(f))
        for p, b, f in zip(points, blind.values, fused_anomaly)
    ]


# ---------------------------------------------------------------------------
# standalone score-file fusion
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class FileFusionResult:
    fused: ScoreVector  # anomaly-high, ready to rank
    beta_used: float
    auroc: float | None


def fuse_score_files(
    base_path,
    evidence_path,
    labels_path=None,
    beta: float | None = 0.5,
    use_ada: bool = False,
    base_orientation: Orientation = Orientation.ANOMALY_HIGH,
    evidence_orientation: Orientation = Orientation.ANOMALY_HIGH,
    normalization: str = "zscore",
    delta: float = 1e-12,
) -> FileFusionResult:
    base = load_scores(base_path, base_orientation)
    evidence = load_scores(evidence_path, evidence_orientation)
    if len(base) != len(evidence):
        raise DataError(f"score files differ in length: {len(base)} vs {len(evidence)}")
    if use_ada:
        result = fuse_ada(base, evidence, normalization=normalization, ada=AdaConfig(delta))
        fused, beta_used = result.scores, result.beta_used
    else:
        if beta is None or beta <= 0:
            raise ConfigError("fusion needs a positive temperature or the adaptive flag")
        fused = fuse_scores(base, evidence, FusionConfig(beta=beta, normalization=normalization))
        beta_used = beta
    fused_anomaly = reorient(fused, Orientation.ANOMALY_HIGH)
    value = None
    if labels_path is not None:
        labels = _load_label_file(labels_path, len(base))
        value = auroc(fused_anomaly, labels)
    return FileFusionResult(fused_anomaly, beta_used, value)


def _load_label_file(path, expected_length: int) -> np.ndarray:
    path = Path(path)
    if not path.is_file():
        raise DataError(f"label file not found: {path}")
    with path.open(newline="", encoding="utf-8") as handle:
        reader = csv.reader(handle)
        header = next(reader, None)
        if header is None or [h.strip() for h in header[:2]] != ["index", "label"]:
            raise DataError(f"{path}: expected header 'index,label'")
        labels = []
        expected = 0
        for row_num, row in enumerate(reader, start=2):
            if int(row[0]) != expected:
                raise DataError(f"{path}: missing or out-of-order index {expected}")
            if row[1].strip() not in ("0", "1"):
                raise DataError(f"{path}: row {row_num}: label must be 0 or 1")
            labels.append(int(row[1]))
            expected += 1
    if len(labels) != expected_length:
        raise DataError(f"{path}: {len(labels)} labels for {expected_length} scores")
    return np.asarray(labels, dtype=np.int8)
