"""Tests for distribution and single-label metrics."""

import statistics

import numpy as np
import pytest
from scipy.spatial import distance as scipy_distance
from sklearn.metrics import confusion_matrix as sk_confusion
from sklearn.metrics import f1_score as sk_f1

from sensedist.distributions import LabelDistribution
from sensedist.errors import DataError, NumericError
from sensedist.hierarchy import default_hierarchy
from sensedist.metrics import (
    aggregate_mean_std,
    confusion_matrix,
    evaluate_level,
    js_distance,
    mean_js,
    per_sense_f1,
    weighted_f1,
)

H = default_hierarchy()


class TestJsDistance:
    def test_identical_is_zero(self):
        p = np.full(4, 0.25)
        assert js_distance(p, p) == 0.0

    def test_disjoint_is_one(self):
        p = np.array([1.0, 0.0, 0.0, 0.0])
        q = np.array([0.0, 0.0, 0.0, 1.0])
        np.testing.assert_allclose(js_distance(p, q), 1.0, rtol=1e-12)

    def test_symmetry(self):
        rng = np.random.default_rng(2)
        p = rng.dirichlet(np.ones(14))
        q = rng.dirichlet(np.ones(14))
        np.testing.assert_allclose(js_distance(p, q), js_distance(q, p), rtol=1e-14)

    def test_matches_scipy(self):
        """Random pairs agree with scipy's base-2 Jensen-Shannon distance."""
        rng = np.random.default_rng(42)
        for size in (4, 14, 24):
            for _ in range(40):
                p = rng.dirichlet(np.full(size, 0.4))
                q = rng.dirichlet(np.full(size, 0.4))
                expected = float(scipy_distance.jensenshannon(p, q, base=2))
                np.testing.assert_allclose(
                    js_distance(p, q), expected, rtol=1e-9, atol=1e-12
                )

    def test_zero_entries_contribute_nothing(self):
        p = np.array([0.5, 0.5, 0.0, 0.0])
        q = np.array([0.5, 0.25, 0.25, 0.0])
        expected = float(scipy_distance.jensenshannon(p, q, base=2))
        np.testing.assert_allclose(js_distance(p, q), expected, rtol=1e-12)

    def test_bounded_by_one(self):
        rng = np.random.default_rng(5)
        for _ in range(200):
            p = rng.dirichlet(np.full(24, 0.2))
            q = rng.dirichlet(np.full(24, 0.2))
            assert 0.0 <= js_distance(p, q) <= 1.0

    def test_label_distribution_inputs(self):
        p = LabelDistribution(1, (0.7, 0.1, 0.1, 0.1))
        q = LabelDistribution(1, (0.25, 0.25, 0.25, 0.25))
        expected = float(
            scipy_distance.jensenshannon(np.asarray(p.values), np.asarray(q.values), base=2)
        )
        np.testing.assert_allclose(js_distance(p, q), expected, rtol=1e-12)

    def test_level_mismatch(self):
        p = LabelDistribution(1, (0.7, 0.1, 0.1, 0.1))
        q = LabelDistribution(2, tuple([1.0] + [0.0] * 13))
        with pytest.raises(DataError, match="level"):
            js_distance(p, q)

    def test_length_mismatch(self):
        with pytest.raises(DataError):
            js_distance(np.full(4, 0.25), np.full(5, 0.2))

    def test_invalid_distribution(self):
        with pytest.raises(NumericError):
            js_distance(np.array([0.9, 0.3]), np.array([0.5, 0.5]))


class TestMeanJs:
    def test_average_over_ids(self):
        preds = {"a": np.array([1.0, 0.0]), "b": np.array([0.5, 0.5])}
        targs = {"a": np.array([0.0, 1.0]), "b": np.array([0.5, 0.5])}
        np.testing.assert_allclose(mean_js(preds, targs), 0.5, rtol=1e-12)

    def test_id_mismatch(self):
        with pytest.raises(DataError, match="ids"):
            mean_js({"a": np.array([1.0, 0.0])}, {"b": np.array([1.0, 0.0])})

    def test_empty(self):
        with pytest.raises(DataError):
            mean_js({}, {})


def random_labels(rng, space, n):
    return [space[i] for i in rng.integers(0, len(space), size=n)]


class TestF1:
    def test_matches_sklearn_weighted(self):
        rng = np.random.default_rng(7)
        space = list(H.names(2))
        for _ in range(30):
            n = int(rng.integers(5, 80))
            gold = random_labels(rng, space, n)
            pred = random_labels(rng, space, n)
            expected = 100.0 * sk_f1(
                gold, pred, labels=space, average="weighted", zero_division=0
            )
            np.testing.assert_allclose(
                weighted_f1(pred, gold, space), expected, rtol=1e-9
            )

    def test_brute_force_route(self):
        """Second oracle: explicit per-sense precision/recall arithmetic."""
        space = ["A", "B", "C"]
        gold = ["A", "A", "B", "B", "B", "C"]
        pred = ["A", "B", "B", "B", "C", "C"]
        # A: tp=1 pred=1 gold=2 -> p=1, r=.5, f1=2/3
        # B: tp=2 pred=3 gold=3 -> p=2/3, r=2/3, f1=2/3
        # C: tp=1 pred=2 gold=1 -> p=.5, r=1, f1=2/3
        expected = 100.0 * (2 * (2 / 3) + 3 * (2 / 3) + 1 * (2 / 3)) / 6
        np.testing.assert_allclose(weighted_f1(pred, gold, space), expected, rtol=1e-12)

    def test_perfect_prediction(self):
        space = list(H.names(1))
        gold = ["Temporal", "Expansion", "Contingency"]
        np.testing.assert_allclose(weighted_f1(gold, gold, space), 100.0, rtol=1e-12)

    def test_per_sense_none_for_zero_gold_support(self):
        scores = per_sense_f1(["A", "A"], ["A", "A"], ["A", "B"])
        assert scores["A"].f1 == 100.0
        assert scores["B"].f1 is None
        assert scores["B"].gold_support == 0

    def test_per_sense_zero_when_supported_but_never_correct(self):
        scores = per_sense_f1(["A", "A"], ["B", "B"], ["A", "B"])
        assert scores["B"].f1 == 0.0
        assert scores["B"].predicted == 0

    def test_unknown_label_rejected(self):
        with pytest.raises(DataError, match="Bogus"):
            weighted_f1(["Bogus"], ["A"], ["A", "B"])

    def test_length_mismatch(self):
        with pytest.raises(DataError):
            weighted_f1(["A"], ["A", "B"], ["A", "B"])


class TestConfusion:
    def test_matches_sklearn(self):
        rng = np.random.default_rng(9)
        space = list(H.names(1))
        gold = random_labels(rng, space, 60)
        pred = random_labels(rng, space, 60)
        got = confusion_matrix(pred, gold, space)
        expected = sk_confusion(gold, pred, labels=space)
        np.testing.assert_array_equal(got, expected)

    def test_rows_are_gold(self):
        m = confusion_matrix(["B"], ["A"], ["A", "B"])
        assert m[0, 1] == 1
        assert m.sum() == 1


class TestEvaluateLevel:
    def test_single_label_gold_has_no_js(self):
        report = evaluate_level(
            1,
            H,
            pred_dists=None,
            pred_labels={"x": "Temporal"},
            gold_dists=None,
            gold_labels={"x": "Temporal"},
        )
        assert report.js_mean is None
        assert report.f1_weighted == 100.0
        assert report.n_instances == 1

    def test_distribution_gold_reports_js(self):
        p = np.array([0.7, 0.1, 0.1, 0.1])
        g = np.array([0.25, 0.25, 0.25, 0.25])
        report = evaluate_level(
            1,
            H,
            pred_dists={"x": p},
            pred_labels={"x": "Temporal"},
            gold_dists={"x": g},
            gold_labels={"x": "Contingency"},
        )
        np.testing.assert_allclose(report.js_mean, js_distance(p, g), rtol=1e-12)
        assert report.confusion.shape == (4, 4)

    def test_id_mismatch(self):
        with pytest.raises(DataError):
            evaluate_level(
                1,
                H,
                pred_dists=None,
                pred_labels={"x": "Temporal"},
                gold_dists=None,
                gold_labels={"y": "Temporal"},
            )


class TestAggregate:
    def test_mean_and_sample_std(self):
        values = [54.2, 56.1, 55.0]
        got = aggregate_mean_std(values)
        np.testing.assert_allclose(got["mean"], statistics.mean(values), rtol=1e-12)
        np.testing.assert_allclose(got["std"], statistics.stdev(values), rtol=1e-12)
        assert got["std_undefined"] is False
        assert got["n"] == 3

    def test_single_value_flags_undefined_std(self):
        got = aggregate_mean_std([42.0])
        assert got["std"] == 0.0
        assert got["std_undefined"] is True

    def test_empty_rejected(self):
        with pytest.raises(DataError):
            aggregate_mean_std([])
