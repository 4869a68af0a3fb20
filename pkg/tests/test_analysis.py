"""Correlation metrics, retention curves, and the method-comparison helpers."""

from __future__ import annotations

import numpy as np
import pytest
import scipy.stats

from shapreuse import (METHODS, CostLadder, Dataset, Instance, SamplerConfig,
                       SupportMap, TrainingPoint, UndefinedCorrelationError,
                       ValidationError, cost_ladder, make_family, pearson,
                       rank_by_value, run_method, scaling_study,
                       selection_curve, spearman)
from shapreuse import TestPoint as Point
from conftest import blob_instance


def separated_pairs():
    """Two tight clusters: ids 0,1 label 0 at x=0; ids 2,3 label 1 at x=10."""
    points = [TrainingPoint(0, np.array([0.0, 0.0]), 0),
              TrainingPoint(1, np.array([0.0, 1.0]), 0),
              TrainingPoint(2, np.array([10.0, 0.0]), 1),
              TrainingPoint(3, np.array([10.0, 1.0]), 1)]
    ds = Dataset(points, num_classes=2)
    tests = [Point(0, np.array([0.0, 0.5]), 0),
             Point(1, np.array([10.0, 0.5]), 1)]
    return ds, tests


class TestPearson:
    def test_frozen_small_example(self):
        assert pearson((1, 2, 3), (2, 4, 7)) == pytest.approx(0.9934, abs=1e-4)

    def test_matches_scipy_on_random_vectors(self):
        rng = np.random.default_rng(11)
        for _ in range(5):
            x = rng.normal(size=12)
            y = rng.normal(size=12)
            expected = scipy.stats.pearsonr(x, y).statistic
            assert pearson(x, y) == pytest.approx(expected, abs=1e-12)

    def test_perfect_and_inverse_correlation(self):
        assert pearson((1, 2, 3), (10, 20, 30)) == pytest.approx(1.0)
        assert pearson((1, 2, 3), (3, 2, 1)) == pytest.approx(-1.0)

    def test_undefined_cases(self):
        with pytest.raises(UndefinedCorrelationError):
            pearson([1.0], [2.0])
        with pytest.raises(UndefinedCorrelationError):
            pearson([1.0, 1.0, 1.0], [1.0, 2.0, 3.0])

    def test_shape_mismatch(self):
        with pytest.raises(ValidationError):
            pearson([1.0, 2.0], [1.0, 2.0, 3.0])


class TestSpearman:
    def test_matches_scipy_with_ties(self):
        x = np.array([1.0, 2.0, 2.0, 3.0, 5.0, 5.0, 5.0])
        y = np.array([3.0, 1.0, 4.0, 4.0, 2.0, 6.0, 5.0])
        expected = scipy.stats.spearmanr(x, y).statistic
        assert spearman(x, y) == pytest.approx(expected, abs=1e-12)

    def test_monotone_transform_gives_one(self):
        x = np.array([0.1, 0.7, 2.0, 9.0])
        assert spearman(x, np.exp(x)) == pytest.approx(1.0)

    def test_matches_scipy_on_random_vectors(self):
        rng = np.random.default_rng(13)
        for _ in range(5):
            x = rng.integers(0, 5, size=15).astype(float)
            y = rng.integers(0, 5, size=15).astype(float)
            expected = scipy.stats.spearmanr(x, y).statistic
            assert spearman(x, y) == pytest.approx(expected, abs=1e-12)


class TestRanking:
    def test_descending_with_id_tiebreak(self):
        values = {0: 1.0, 1: 2.0, 2: 1.0, 3: -0.5}
        assert rank_by_value(values) == [1, 0, 2, 3]

    def test_all_tied_is_id_order(self):
        assert rank_by_value({2: 0.0, 0: 0.0, 1: 0.0}) == [0, 1, 2]


class TestSelectionCurve:
    def test_frozen_accuracy_staircase(self):
        # ranked [0,1,2,3]: until a neighbor of the second test survives,
        # its vote is empty and falls to class 0, which is wrong for it
        ds, tests = separated_pairs()
        family = make_family("wknn", k=1)
        values = {0: 4.0, 1: 3.0, 2: 2.0, 3: 1.0}
        curve = selection_curve(ds, tests, family, values,
                                fractions=(0.25, 0.5, 0.75, 1.0))
        assert curve.sizes == [1, 2, 3, 4]
        assert curve.accuracies == [0.5, 0.5, 1.0, 1.0]

    def test_rows_zip_the_columns(self):
        ds, tests = separated_pairs()
        family = make_family("wknn", k=1)
        values = {z: float(-z) for z in range(4)}
        curve = selection_curve(ds, tests, family, values, fractions=(1.0,))
        assert curve.rows() == [(1.0, 4, curve.accuracies[0])]

    def test_kernel_family_full_fraction_is_perfect(self):
        ds, tests = separated_pairs()
        family = make_family("kernel", gamma=0.1, tau=0.5)
        values = {z: 1.0 for z in range(4)}
        curve = selection_curve(ds, tests, family, values, fractions=(1.0,))
        assert curve.accuracies == [1.0]

    def test_tree_family_runs(self):
        ds, tests = separated_pairs()
        family = make_family("tree", max_depth=3)
        curve = selection_curve(ds, tests, family, {z: 1.0 for z in range(4)},
                                fractions=(0.5, 1.0))
        assert curve.accuracies[-1] == 1.0

    def test_values_must_cover_training_ids(self):
        ds, tests = separated_pairs()
        family = make_family("wknn", k=1)
        with pytest.raises(ValidationError):
            selection_curve(ds, tests, family, {0: 1.0, 1: 1.0})
        with pytest.raises(ValidationError):
            selection_curve(ds, tests, family,
                            {z: 1.0 for z in range(5)})

    def test_bad_fraction_rejected(self):
        ds, tests = separated_pairs()
        family = make_family("wknn", k=1)
        values = {z: 1.0 for z in range(4)}
        for bad in (0.0, 1.5, -0.2):
            with pytest.raises(ValidationError):
                selection_curve(ds, tests, family, values, fractions=(bad,))


class TestRunMethod:
    def make_instance(self):
        ds, tests, supports, family = blob_instance(
            seed=3, family_kind="wknn", per_class=3, test_per_class=1, k=1)
        return Instance(ds, tests, supports, family)

    def test_unknown_method(self):
        with pytest.raises(ValidationError):
            run_method("magic", self.make_instance())

    def test_oracle_and_reuse_schedule_agree(self):
        instance = self.make_instance()
        brute = run_method("oracle", instance)
        reuse = run_method("lsmr", instance)
        np.testing.assert_allclose(reuse.values_array(), brute.values_array(),
                                   atol=1e-9)
        assert reuse.trainings <= brute.trainings

    def test_sampler_config_reaches_the_samplers(self):
        instance = self.make_instance()
        cfg = SamplerConfig(samples=7, tau=1e-12, check_every=10 ** 6, seed=5)
        result = run_method("local-mc", instance, config=cfg)
        assert result.method == "local-mc"
        assert result.samples_used == 7 * len(instance.tests)
        sampled = run_method("lsmr-a", instance, config=cfg)
        assert sampled.method == "lsmr-a"
        assert sampled.seed == 5

    def test_reuse_flag_cuts_baseline_fits(self):
        instance = self.make_instance()
        nominal = run_method("local-baseline", instance)
        shared = run_method("local-baseline", instance, reuse=True)
        assert shared.trainings < nominal.trainings
        assert shared.values == nominal.values


class TestCostLadder:
    def test_rows_carry_the_accounting_fields(self):
        ds, tests, supports, family = blob_instance(
            seed=9, family_kind="wknn", per_class=3, test_per_class=1, k=1)
        instance = Instance(ds, tests, supports, family)
        cfg = SamplerConfig(samples=5, tau=1e-12, check_every=10 ** 6, seed=1)
        ladder = cost_ladder(instance, methods=("lsmr", "local-mc", "lsmr-a"),
                             config=cfg)
        assert [r["method"] for r in ladder.rows] == ["lsmr", "local-mc", "lsmr-a"]
        for row in ladder.rows:
            assert set(row) == {"method", "fits", "evaluations", "samples",
                                "seconds"}
            assert row["fits"] > 0
            assert row["seconds"] >= 0.0

    def test_methods_tuple_lists_every_runner(self):
        assert METHODS == ("oracle", "local-baseline", "subset-centric",
                           "lsmr", "global-mc", "local-mc", "tmc", "comple-s",
                           "lsmr-a")


class TestScalingStudy:
    def test_rows_record_each_size(self):
        def make(size):
            ds, tests, supports, family = blob_instance(
                seed=size, family_kind="wknn", per_class=size // 2,
                test_per_class=1, k=1)
            return Instance(ds, tests, supports, family)

        study = scaling_study(make, (4, 8), method="lsmr")
        assert [r["size"] for r in study.rows] == [4, 8]
        for row in study.rows:
            assert set(row) == {"size", "tests", "method", "fits",
                                "evaluations", "samples", "seconds"}
            assert row["method"] == "lsmr"
            assert row["tests"] == 2
