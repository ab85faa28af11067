"""Evaluation metrics.

Distribution quality is measured by Jensen-Shannon distance (the square
root of the divergence, base-2 logarithm, so values live in [0, 1]).
Single-label quality is support-weighted F1, reported on a 0-100 scale.
Per-sense tables distinguish two kinds of absence: a sense with no gold
support has no defined F1 (rendered "-"), and a sense the model never
predicted is tracked separately so reports can say "n/a" instead of a
misleading 0.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from .distributions import SUM_TOL
from .errors import DataError, NumericError
from .hierarchy import SenseHierarchy


def _check_distribution(arr: np.ndarray, name: str) -> None:
    if not np.all(np.isfinite(arr)):
        raise NumericError(f"{name} has non-finite entries")
    if arr.min() < -SUM_TOL:
        raise NumericError(f"{name} has negative entries")
    if abs(arr.sum() - 1.0) > 1e-6:
        raise NumericError(f"{name} sums to {arr.sum()!r}, expected 1")


def js_distance(p, q) -> float:
    """Jensen-Shannon distance between two distributions over one space.

    Base-2 logarithm; zero-probability entries contribute nothing. The
    result is 0 for identical inputs and 1 for disjoint ones.
    """
    p_arr = np.asarray(getattr(p, "values", p), dtype=np.float64)
    q_arr = np.asarray(getattr(q, "values", q), dtype=np.float64)
    p_level = getattr(p, "level", None)
    q_level = getattr(q, "level", None)
    if p_level is not None and q_level is not None and p_level != q_level:
        raise DataError(f"cannot compare level {p_level} with level {q_level}")
    if p_arr.shape != q_arr.shape:
        raise DataError(
            f"distribution lengths differ: {p_arr.size} vs {q_arr.size}"
        )
    _check_distribution(p_arr, "p")
    _check_distribution(q_arr, "q")
    p_arr = np.clip(p_arr, 0.0, None)
    q_arr = np.clip(q_arr, 0.0, None)
    m = 0.5 * (p_arr + q_arr)
    with np.errstate(divide="ignore", invalid="ignore"):
        left = np.where(p_arr > 0, p_arr * (np.log2(p_arr) - np.log2(m)), 0.0)
        right = np.where(q_arr > 0, q_arr * (np.log2(q_arr) - np.log2(m)), 0.0)
    divergence = 0.5 * float(left.sum()) + 0.5 * float(right.sum())
    # Tiny negatives can appear for near-identical inputs.
    return float(np.sqrt(max(divergence, 0.0)))


def mean_js(
    predictions: Mapping[str, np.ndarray], targets: Mapping[str, np.ndarray]
) -> float:
    """Mean JS distance over instances, aligned by id."""
    if set(predictions) != set(targets):
        missing = set(targets) ^ set(predictions)
        raise DataError(
            f"prediction/target ids differ; {len(missing)} unmatched, "
            f"first: {sorted(missing)[0]!r}"
        )
    if not predictions:
        raise DataError("cannot average over zero instances")
    return float(
        np.mean([js_distance(predictions[i], targets[i]) for i in predictions])
    )


def _check_labels(labels: Sequence[str], space: Sequence[str], what: str) -> None:
    known = set(space)
    for lab in labels:
        if lab not in known:
            raise DataError(f"{what} label {lab!r} is not in the label space")


@dataclass(frozen=True)
class SenseScore:
    """Per-sense classification outcome."""

    f1: float | None  # None when the sense has no gold support
    gold_support: int
    predicted: int


def per_sense_f1(
    pred_labels: Sequence[str],
    gold_labels: Sequence[str],
    space: Sequence[str],
) -> dict[str, SenseScore]:
    """F1 per sense; senses with zero gold support get f1=None."""
    if len(pred_labels) != len(gold_labels):
        raise DataError(
            f"got {len(pred_labels)} predictions for {len(gold_labels)} gold labels"
        )
    _check_labels(pred_labels, space, "predicted")
    _check_labels(gold_labels, space, "gold")
    scores: dict[str, SenseScore] = {}
    for sense in space:
        tp = sum(1 for p, g in zip(pred_labels, gold_labels) if p == g == sense)
        pred = sum(1 for p in pred_labels if p == sense)
        gold = sum(1 for g in gold_labels if g == sense)
        if gold == 0:
            scores[sense] = SenseScore(None, 0, pred)
            continue
        precision = tp / pred if pred else 0.0
        recall = tp / gold
        f1 = (
            2 * precision * recall / (precision + recall)
            if precision + recall > 0
            else 0.0
        )
        scores[sense] = SenseScore(100.0 * f1, gold, pred)
    return scores


def weighted_f1(
    pred_labels: Sequence[str],
    gold_labels: Sequence[str],
    space: Sequence[str],
) -> float:
    """Gold-support-weighted mean of per-sense F1, on a 0-100 scale."""
    if not gold_labels:
        raise DataError("cannot score zero instances")
    scores = per_sense_f1(pred_labels, gold_labels, space)
    total = len(gold_labels)
    return float(
        sum(
            s.gold_support * s.f1
            for s in scores.values()
            if s.f1 is not None
        )
        / total
    )


def confusion_matrix(
    pred_labels: Sequence[str],
    gold_labels: Sequence[str],
    space: Sequence[str],
) -> np.ndarray:
    """Counts with rows = gold sense, columns = predicted sense."""
    if len(pred_labels) != len(gold_labels):
        raise DataError(
            f"got {len(pred_labels)} predictions for {len(gold_labels)} gold labels"
        )
    _check_labels(pred_labels, space, "predicted")
    _check_labels(gold_labels, space, "gold")
    index = {name: i for i, name in enumerate(space)}
    matrix = np.zeros((len(space), len(space)), dtype=np.int64)
    for p, g in zip(pred_labels, gold_labels):
        matrix[index[g], index[p]] += 1
    return matrix


@dataclass(frozen=True)
class LevelReport:
    """All metrics for one sense level on one evaluation set."""

    level: int
    n_instances: int
    js_mean: float | None  # None for single-label gold (no gold distribution)
    f1_weighted: float
    per_sense: dict[str, SenseScore]
    confusion: np.ndarray

    def to_dict(self) -> dict:
        return {
            "level": self.level,
            "n_instances": self.n_instances,
            "js_mean": self.js_mean,
            "f1_weighted": self.f1_weighted,
            "per_sense_f1": {
                name: score.f1 for name, score in self.per_sense.items()
            },
            "gold_support": {
                name: score.gold_support for name, score in self.per_sense.items()
            },
            "predicted_counts": {
                name: score.predicted for name, score in self.per_sense.items()
            },
        }


def evaluate_level(
    level: int,
    hierarchy: SenseHierarchy,
    pred_dists: Mapping[str, np.ndarray] | None,
    pred_labels: Mapping[str, str],
    gold_dists: Mapping[str, np.ndarray] | None,
    gold_labels: Mapping[str, str],
) -> LevelReport:
    """Score one level; distribution metrics only where gold distributions exist."""
    space = hierarchy.names(level)
    ids = sorted(gold_labels)
    if sorted(pred_labels) != ids:
        raise DataError("prediction ids do not match gold ids")
    preds = [pred_labels[i] for i in ids]
    golds = [gold_labels[i] for i in ids]
    js = None
    if gold_dists is not None and pred_dists is not None:
        js = mean_js(
            {i: pred_dists[i] for i in ids}, {i: gold_dists[i] for i in ids}
        )
    return LevelReport(
        level=level,
        n_instances=len(ids),
        js_mean=js,
        f1_weighted=weighted_f1(preds, golds, space),
        per_sense=per_sense_f1(preds, golds, space),
        confusion=confusion_matrix(preds, golds, space),
    )


def aggregate_mean_std(values: Sequence[float]) -> dict:
    """Mean and sample standard deviation across seeds (or folds).

    A single value has no sample deviation; that case is flagged instead
    of reported as 0.
    """
    if not values:
        raise DataError("nothing to aggregate")
    arr = np.asarray(values, dtype=np.float64)
    out = {"mean": float(arr.mean()), "n": int(arr.size)}
    if arr.size >= 2:
        out["std"] = float(arr.std(ddof=1))
        out["std_undefined"] = False
    else:
        out["std"] = 0.0
        out["std_undefined"] = True
    return out
