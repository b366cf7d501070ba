import numpy as np
import pytest

import tiltfuse as tf
from tiltfuse.config import (
    DatasetConfig,
    DetectorConfig,
    EvidenceConfig,
    ExperimentConfig,
    ToyConfig,
)
from tiltfuse.errors import ConfigError, DataError
from tiltfuse.experiments import enumerate_cells, run_experiment, toy_score_grid


def toy_config(**overrides):
    base = dict(
        datasets=(DatasetConfig(name="toy"),),
        detector=DetectorConfig(name="rbf_svdd", epochs=40),
        evidence=EvidenceConfig(name="lof", k=10),
        methods=("blind", "evidence_only", "ephad"),
        beta_grid=(0.5,),
        seeds=(0, 1),
        master_seed=77,
        toy=ToyConfig(n_train=60, n_test=80),
    )
    base.update(overrides)
    return ExperimentConfig(**base)


def by_method(cells, method):
    return [c for c in cells if c.method == method]


class TestEngine:
    def test_cell_enumeration_covers_grid(self):
        config = toy_config(epsilon_grid=(0.0, 0.1), seeds=(0, 1, 2))
        keys = enumerate_cells(config)
        assert len(keys) == 2 * 3

    def test_rerun_is_identical(self):
        config = toy_config()
        first, _ = run_experiment(config)
        second, _ = run_experiment(config)
        assert first == second

    def test_threads_do_not_change_results(self):
        serial, _ = run_experiment(toy_config(epsilon_grid=(0.05, 0.1), seeds=(0, 1, 2)))
        threaded, _ = run_experiment(
            toy_config(epsilon_grid=(0.05, 0.1), seeds=(0, 1, 2), threads=4)
        )
        assert serial == threaded

    def test_blind_and_evidence_rows_bracket_the_fused_family(self):
        config = toy_config(beta_grid=(1e-6, 0.1, 0.5, 2.0, 1e6), seeds=(0, 1, 2))
        cells, _ = run_experiment(config)
        for seed in (0, 1, 2):
            blind = next(c.auroc for c in by_method(cells, "blind") if c.seed == seed)
            evid = next(c.auroc for c in by_method(cells, "evidence_only") if c.seed == seed)
            fused = [c.auroc for c in by_method(cells, "ephad") if c.seed == seed]
            assert min(blind, evid) <= max(fused) + 0.01

    def test_beta_endpoints_recover_blind_and_evidence(self):
        config = toy_config(beta_grid=(1e-6, 1e6), seeds=(0, 1, 2, 3))
        cells, _ = run_experiment(config)
        for seed in config.seeds:
            blind = next(c.auroc for c in by_method(cells, "blind") if c.seed == seed)
            evid = next(c.auroc for c in by_method(cells, "evidence_only") if c.seed == seed)
            high = next(c.auroc for c in by_method(cells, "ephad") if c.seed == seed and c.beta == 1e6)
            low = next(c.auroc for c in by_method(cells, "ephad") if c.seed == seed and c.beta == 1e-6)
            assert high == pytest.approx(blind, abs=0.005)
            assert low == pytest.approx(evid, abs=0.005)

    def test_realized_epsilon_reported(self):
        config = toy_config(epsilon_grid=(0.0, 0.1))
        _, realized = run_experiment(config)
        assert realized[("toy", 0.0)] == 0.0
        assert realized[("toy", 0.1)] == pytest.approx(0.1)

    def test_ada_rows_carry_beta_used(self):
        config = toy_config(methods=("ephad_ada",))
        cells, _ = run_experiment(config)
        assert all(c.beta is None and c.beta_used > 0 for c in cells)

    def test_refine_method_runs_on_toy(self):
        config = toy_config(methods=("blind", "refine"), seeds=(0,))
        cells, _ = run_experiment(config)
        refine = by_method(cells, "refine")
        assert len(refine) == 1 and 0.0 <= refine[0].auroc <= 1.0

    def test_test_fraction_grid_controls_composition(self):
        config = toy_config(test_anomaly_fraction_grid=(0.05, 0.2), methods=("evidence_only",))
        cells, _ = run_experiment(config)
        assert {c.test_anomaly_fraction for c in cells} == {0.05, 0.2}

    def test_external_evidence_on_toy_rejected(self):
        config = toy_config(evidence=EvidenceConfig(name="external", path="x.csv"))
        with pytest.raises(ConfigError):
            run_experiment(config)

    def test_scores_computed_once_per_cell(self, monkeypatch):
        # every method row must reuse the cached base/evidence vectors
        import tiltfuse.experiments as exp

        calls = {"evidence": 0, "base": 0}
        real_lof_fit = exp.lof_fit
        real_rbf_fit = exp.rbf_svdd_fit

        def counting_lof_fit(*args, **kwargs):
            calls["evidence"] += 1
            return real_lof_fit(*args, **kwargs)

        def counting_rbf_fit(*args, **kwargs):
            calls["base"] += 1
            return real_rbf_fit(*args, **kwargs)

        monkeypatch.setattr(exp, "lof_fit", counting_lof_fit)
        monkeypatch.setattr(exp, "rbf_svdd_fit", counting_rbf_fit)
        config = toy_config(
            methods=("blind", "evidence_only", "ephad", "ephad_ada"),
            beta_grid=(0.1, 0.5, 2.0),
            seeds=(0,),
        )
        cells, _ = run_experiment(config)
        assert len(cells) == 3 + 3  # blind, evidence_only, ada + three betas
        assert calls == {"evidence": 1, "base": 1}


class TestTabularEngine:
    def test_wine_runs_and_uses_all_rows(self):
        config = toy_config(
            datasets=(DatasetConfig(name="wine"),),
            detector=DetectorConfig(name="iforest", tree_count=20),
            evidence=EvidenceConfig(name="lof", k=10),
            seeds=(0,),
        )
        cells, realized = run_experiment(config)
        assert {c.dataset for c in cells} == {"wine"}
        assert ("wine", 0.1) in realized

    def test_external_evidence_slices_dataset_rows(self, tmp_path):
        wine = tf.load_csv("src/tiltfuse/datasets/wine.csv", label_column="label", name="wine")
        # a file over all dataset rows whose score is the row's true label
        scores = tf.ScoreVector(wine.labels.astype(float), tf.Orientation.ANOMALY_HIGH)
        tf.save_scores(tmp_path / "oracle.csv", scores)
        config = toy_config(
            datasets=(DatasetConfig(name="wine"),),
            detector=DetectorConfig(name="iforest", tree_count=20),
            evidence=EvidenceConfig(name="external", path=str(tmp_path / "oracle.csv")),
            methods=("evidence_only",),
            seeds=(0, 1),
        )
        cells, _ = run_experiment(config)
        # label-valued evidence ranks the test set perfectly
        assert all(c.auroc == 1.0 for c in cells)

    def test_short_external_file_is_a_data_error(self, tmp_path):
        short = tf.ScoreVector(np.zeros(5), tf.Orientation.ANOMALY_HIGH)
        tf.save_scores(tmp_path / "short.csv", short)
        config = toy_config(
            datasets=(DatasetConfig(name="wine"),),
            detector=DetectorConfig(name="iforest", tree_count=10),
            evidence=EvidenceConfig(name="external", path=str(tmp_path / "short.csv")),
            methods=("evidence_only",),
            seeds=(0,),
        )
        with pytest.raises(DataError):
            run_experiment(config)

    def test_unknown_dataset_name(self):
        config = toy_config(datasets=(DatasetConfig(name="nope"),))
        with pytest.raises(DataError):
            run_experiment(config)


class TestToyGrid:
    def test_grid_shape_and_window(self):
        config = toy_config(toy=ToyConfig(n_train=60, n_test=80, grid_cells=20))
        rows = toy_score_grid(config)
        assert len(rows) == 400
        xs = {r[0] for r in rows}
        assert min(xs) == -2.0 and max(xs) == 3.0
        assert all(np.isfinite(r[2]) and np.isfinite(r[3]) for r in rows)
