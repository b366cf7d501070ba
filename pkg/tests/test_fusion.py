import numpy as np
import pytest

from tiltfuse import (
    DetectorThreshold,
    DiscreteDensity,
    FusionConfig,
    Label,
    Orientation,
    ScoreVector,
    discretize_pdf,
    fuse_scores,
    kendall_tau,
    kl_divergence,
    kl_objective,
    midpoint_grid,
    revised_detector,
    reorient,
    tilt_condition_report,
    tilt_density,
)


def sv(values, orientation=Orientation.INLIER_HIGH):
    return ScoreVector(np.asarray(values, dtype=float), orientation)


def normal_pdf(mu, var):
    return lambda x: np.exp(-0.5 * (x - mu) ** 2 / var) / np.sqrt(2 * np.pi * var)


def gaussian_instance(cells=2000, lo=-5.0, hi=10.0):
    """Inlier N(0,1) against the 10%-contaminated mixture, on a midpoint grid."""
    x = midpoint_grid(lo, hi, cells)
    inlier = discretize_pdf(normal_pdf(0.0, 1.0), lo, hi, cells)
    mix_pdf = lambda t: 0.9 * normal_pdf(0.0, 1.0)(t) + 0.1 * normal_pdf(5.0, 1.0)(t)
    mixture = discretize_pdf(mix_pdf, lo, hi, cells)
    return x, inlier, mixture


class TestFuseScores:
    def test_single_pair_arithmetic(self):
        fused = fuse_scores(sv([1.0, 0.0]), sv([2.0, 0.0]), FusionConfig(beta=0.5, normalization="none"))
        assert fused.values[0] == pytest.approx(5.0)  # 1 + 2/0.5

    def test_constant_evidence_is_identity(self):
        base = sv([0.3, -1.2, 4.0])
        fused = fuse_scores(base, sv([7.0, 7.0, 7.0]), FusionConfig(beta=2.0, normalization="none"))
        np.testing.assert_allclose(fused.values, base.values + 3.5)

    def test_reorients_anomaly_high_inputs(self):
        base = ScoreVector(np.array([1.0, 2.0]), Orientation.ANOMALY_HIGH)
        fused = fuse_scores(base, sv([0.0, 0.0]), FusionConfig(beta=1.0, normalization="none"))
        assert fused.orientation is Orientation.INLIER_HIGH
        np.testing.assert_allclose(fused.values, [-1.0, -2.0])

    def test_length_mismatch(self):
        with pytest.raises(ValueError):
            fuse_scores(sv([1.0]), sv([1.0, 2.0]), FusionConfig(beta=1.0))

    def test_bad_beta(self):
        with pytest.raises(ValueError):
            FusionConfig(beta=0.0)
        with pytest.raises(ValueError):
            FusionConfig(beta=-2.0)

    def test_large_beta_keeps_base_ranking(self):
        rng = np.random.default_rng(21)
        for _ in range(20):
            base, evid = sv(rng.normal(size=50)), sv(rng.normal(size=50))
            fused = fuse_scores(base, evid, FusionConfig(beta=1e6))
            assert kendall_tau(fused, base) == 1.0

    def test_small_beta_follows_evidence_ranking(self):
        rng = np.random.default_rng(22)
        for _ in range(20):
            base, evid = sv(rng.normal(size=50)), sv(rng.normal(size=50))
            fused = fuse_scores(base, evid, FusionConfig(beta=1e-6))
            assert kendall_tau(fused, evid) == 1.0

    def test_strictly_increasing_in_each_input(self):
        rng = np.random.default_rng(23)
        base = rng.normal(size=30)
        evid = rng.normal(size=30)
        config = FusionConfig(beta=0.7, normalization="none")
        fused = fuse_scores(sv(base), sv(evid), config).values
        bumped = fuse_scores(sv(base + np.eye(30)[4] * 0.5), sv(evid), config).values
        assert bumped[4] > fused[4]
        bumped = fuse_scores(sv(base), sv(evid + np.eye(30)[4] * 0.5), config).values
        assert bumped[4] > fused[4]


class TestRevisedDetector:
    def test_sign_split(self):
        labels = revised_detector(sv([2.0, -1.0]), DetectorThreshold(0.0))
        assert labels.tolist() == [Label.NORMAL, Label.ANOMALOUS]

    def test_boundary_is_normal(self):
        assert revised_detector(sv([0.7]), DetectorThreshold(0.7)).tolist() == [Label.NORMAL]

    def test_threshold_below_min_accepts_all(self):
        values = np.array([0.5, 1.5, -3.0])
        labels = revised_detector(sv(values), DetectorThreshold(values.min() - 1.0))
        assert (labels == Label.NORMAL).all()


class TestTiltDensity:
    def test_constant_evidence_identity(self):
        density = DiscreteDensity(np.arange(4.0), [0.1, 0.2, 0.3, 0.4])
        tilted = tilt_density(density, [5.0, 5.0, 5.0, 5.0], beta=1.0)
        np.testing.assert_allclose(tilted.probabilities, density.probabilities)

    def test_two_state_hand_value(self):
        density = DiscreteDensity(np.arange(2.0), [0.5, 0.5])
        tilted = tilt_density(density, [np.log(2.0), 0.0], beta=1.0)
        np.testing.assert_allclose(tilted.probabilities, [2 / 3, 1 / 3], atol=1e-15)

    def test_huge_beta_is_identity_in_total_variation(self):
        rng = np.random.default_rng(31)
        density = DiscreteDensity.from_weights(np.arange(50.0), rng.random(50))
        tilted = tilt_density(density, rng.normal(size=50), beta=1e9)
        assert 0.5 * np.abs(tilted.probabilities - density.probabilities).sum() < 1e-6

    def test_extreme_evidence_is_stable(self):
        density = DiscreteDensity(np.arange(3.0), [0.2, 0.3, 0.5])
        tilted = tilt_density(density, [5000.0, 0.0, -5000.0], beta=1.0)
        assert np.isfinite(tilted.probabilities).all()
        assert tilted.probabilities[0] == pytest.approx(1.0)

    def test_sums_to_one(self):
        rng = np.random.default_rng(32)
        for _ in range(100):
            density = DiscreteDensity.from_weights(np.arange(10.0), rng.random(10))
            tilted = tilt_density(density, rng.normal(size=10), beta=float(rng.uniform(0.1, 5)))
            assert abs(tilted.probabilities.sum() - 1.0) <= 1e-12


class TestKlDivergence:
    def test_zero_iff_equal(self):
        density = DiscreteDensity(np.arange(3.0), [0.2, 0.3, 0.5])
        assert kl_divergence(density, density) == 0.0

    def test_hand_value(self):
        p = DiscreteDensity(np.arange(2.0), [1.0, 0.0])
        q = DiscreteDensity(np.arange(2.0), [0.5, 0.5])
        assert kl_divergence(p, q) == pytest.approx(np.log(2.0))

    def test_non_negative_on_random_pairs(self):
        rng = np.random.default_rng(33)
        for _ in range(1000):
            p = DiscreteDensity.from_weights(np.arange(6.0), rng.random(6) + 1e-3)
            q = DiscreteDensity.from_weights(np.arange(6.0), rng.random(6) + 1e-3)
            assert kl_divergence(p, q) >= 0.0

    def test_absolute_continuity_enforced(self):
        p = DiscreteDensity(np.arange(2.0), [0.5, 0.5])
        q = DiscreteDensity(np.arange(2.0), [1.0, 0.0])
        with pytest.raises(ValueError, match="continuity"):
            kl_divergence(p, q)


class TestTiltCondition:
    def test_zero_evidence_changes_nothing(self):
        _, inlier, mixture = gaussian_instance(cells=400)
        report = tilt_condition_report(inlier, mixture, np.zeros(400), beta=1.0)
        assert report.condition_value == pytest.approx(0.0, abs=1e-12)
        assert report.kl_after == pytest.approx(report.kl_before, abs=1e-12)

    def test_log_density_evidence_at_unit_temperature_overshoots(self):
        # Tilting the 10% mixture by the full inlier log-density squares the
        # inlier part, which over-concentrates the result: the divergence to
        # the inlier density grows. Frozen values from the midpoint-quadrature
        # oracle (analytically: E[log f+] = -1.418939, log Z = -1.370667).
        x, inlier, mixture = gaussian_instance()
        evidence = np.log(normal_pdf(0.0, 1.0)(x))
        report = tilt_condition_report(inlier, mixture, evidence, beta=1.0)
        assert report.condition_value == pytest.approx(-0.048277, abs=1e-5)
        assert report.kl_before == pytest.approx(0.100566, abs=1e-5)
        assert report.kl_after == pytest.approx(0.148843, abs=1e-5)
        assert report.kl_after > report.kl_before

    def test_log_density_evidence_at_higher_temperature_helps(self):
        x, inlier, mixture = gaussian_instance()
        evidence = np.log(normal_pdf(0.0, 1.0)(x))
        report = tilt_condition_report(inlier, mixture, evidence, beta=2.5)
        assert report.condition_value > 0
        assert report.kl_after < report.kl_before

    def test_likelihood_ratio_evidence_recovers_inlier_density(self):
        x, inlier, mixture = gaussian_instance()
        evidence = np.log(inlier.probabilities) - np.log(mixture.probabilities)
        report = tilt_condition_report(inlier, mixture, evidence, beta=1.0)
        assert report.condition_value == pytest.approx(report.kl_before, rel=1e-9)
        assert report.kl_after == pytest.approx(0.0, abs=1e-12)

    def test_anomaly_favoring_evidence_hurts(self):
        x, inlier, mixture = gaussian_instance()
        evidence = np.log(normal_pdf(5.0, 1.0)(x) + 1e-300)
        report = tilt_condition_report(inlier, mixture, evidence, beta=1.0)
        assert report.condition_value < 0
        assert report.kl_after > report.kl_before

    def test_sign_identity_on_random_instances(self):
        rng = np.random.default_rng(34)
        matched = 0
        for _ in range(100):
            k = int(rng.integers(3, 12))
            inlier = DiscreteDensity.from_weights(np.arange(float(k)), rng.random(k) + 1e-3)
            mixture = DiscreteDensity.from_weights(np.arange(float(k)), rng.random(k) + 1e-3)
            evidence = rng.normal(size=k) * rng.uniform(0.1, 5.0)
            beta = float(rng.uniform(0.05, 10.0))
            report = tilt_condition_report(inlier, mixture, evidence, beta)
            reduction = report.kl_before - report.kl_after
            # exact identity: the reduction *is* the condition value
            assert reduction == pytest.approx(report.condition_value, rel=1e-9, abs=1e-12)
            if abs(report.condition_value) > 1e-9:
                assert np.sign(reduction) == np.sign(report.condition_value)
                matched += 1
        assert matched > 90  # the degenerate band should be rare


class TestTwoDimensionalSupports:
    def test_toy_mixture_tilted_by_likelihood_ratio_recovers_inliers(self):
        from tiltfuse import TOY_ANOMALOUS, TOY_NORMAL, discretize_pdf_2d

        inlier = discretize_pdf_2d(TOY_NORMAL.pdf, -2.0, 3.0, cells=120)
        mix_pdf = lambda pts: 0.9 * TOY_NORMAL.pdf(pts) + 0.1 * TOY_ANOMALOUS.pdf(pts)
        mixture = discretize_pdf_2d(mix_pdf, -2.0, 3.0, cells=120)
        evidence = np.log(inlier.probabilities) - np.log(mixture.probabilities)
        report = tilt_condition_report(inlier, mixture, evidence, beta=1.0)
        assert report.condition_value > 0
        assert report.kl_after == pytest.approx(0.0, abs=1e-10)
        assert report.kl_before > 0.01


class TestKlObjective:
    def test_zero_at_base_with_zero_evidence(self):
        density = DiscreteDensity(np.arange(3.0), [0.2, 0.5, 0.3])
        assert kl_objective(density, density, np.zeros(3), beta=1.0) == 0.0

    def test_candidate_equal_base_reduces_to_mean_evidence(self):
        density = DiscreteDensity(np.arange(3.0), [0.2, 0.5, 0.3])
        t = np.array([1.0, -2.0, 0.25])
        expected = float(np.dot(density.probabilities, t))
        assert kl_objective(density, density, t, beta=3.0) == pytest.approx(expected)

    def test_tilted_density_dominates_random_candidates(self):
        rng = np.random.default_rng(35)
        for _ in range(20):
            base = DiscreteDensity.from_weights(np.arange(5.0), rng.random(5) + 1e-3)
            t = rng.normal(size=5)
            beta = float(rng.uniform(0.2, 5.0))
            tilted = tilt_density(base, t, beta)
            best = kl_objective(tilted, base, t, beta)
            for _ in range(500):
                candidate = DiscreteDensity.from_weights(np.arange(5.0), rng.random(5) + 1e-6)
                assert best - kl_objective(candidate, base, t, beta) >= -1e-12

    def test_local_perturbations_do_not_improve(self):
        rng = np.random.default_rng(36)
        base = DiscreteDensity.from_weights(np.arange(5.0), rng.random(5) + 0.1)
        t = rng.normal(size=5)
        tilted = tilt_density(base, t, beta=1.0)
        best = kl_objective(tilted, base, t, 1.0)
        for _ in range(200):
            step = rng.normal(size=5)
            step -= step.mean()  # stay on the simplex
            probs = tilted.probabilities + 1e-3 * step / np.abs(step).max()
            if probs.min() <= 0:
                continue
            candidate = DiscreteDensity.from_weights(np.arange(5.0), probs)
            assert kl_objective(candidate, base, t, 1.0) <= best + 1e-9
