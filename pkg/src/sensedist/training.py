"""Training runs: the optimization loop, prediction files, seed aggregation.

One run = Adam over the summed three-head loss for a fixed number of
epochs, with the learning rate recomputed from the schedule before every
optimizer step (at the fractional epoch completed so far). There is no
early stopping and no model selection: the final-epoch model is the
run's checkpoint. Runs are deterministic given (config, seed, data);
repeating one reproduces the prediction file byte for byte.

Multi-seed experiments train once per seed and aggregate every metric as
mean plus sample standard deviation.
"""

from __future__ import annotations

import dataclasses
import json
import math
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np
import torch

from .corpus import RelationInstance
from .distributions import LabelDistribution
from .errors import ConfigError, DataError, NumericError, SensedistError
from .hierarchy import SenseHierarchy
from .losses import LOSS_KINDS, head_loss, total_loss
from .metrics import LevelReport, aggregate_mean_std, evaluate_level
from .model import (
    ModelConfig,
    MultiLevelClassifier,
    pool_single_label,
    save_checkpoint,
)
from .pdtb import SingleLabelTestSet
from .schedules import SCHEDULE_KINDS, make_schedule

TARGET_MODES = ("distribution", "majority")


class TrainingRunError(SensedistError):
    """A seed's training run failed; the message names the seed."""


@dataclass(frozen=True)
class TrainingSettings:
    """Optimization hyperparameters for one experiment."""

    loss: str = "mae"
    target_mode: str = ""  # empty: majority for ce, distribution otherwise
    base_lr: float = 1e-5
    schedule: str = "cosine_annealing"
    epochs: int = 10
    batch_size: int = 16
    grad_clip: float = 0.0  # disabled when 0

    def __post_init__(self):
        if self.loss not in LOSS_KINDS:
            raise ConfigError(
                f"unknown loss: {self.loss!r}; choose from {LOSS_KINDS}"
            )
        if self.schedule not in SCHEDULE_KINDS:
            raise ConfigError(
                f"unknown schedule: {self.schedule!r}; choose from {SCHEDULE_KINDS}"
            )
        if self.target_mode not in ("",) + TARGET_MODES:
            raise ConfigError(
                f"unknown target_mode: {self.target_mode!r}; choose from {TARGET_MODES}"
            )
        if self.epochs < 1:
            raise ConfigError(f"epochs must be >= 1, got {self.epochs}")
        if self.batch_size < 1:
            raise ConfigError(f"batch_size must be >= 1, got {self.batch_size}")
        if self.base_lr <= 0:
            raise ConfigError(f"base_lr must be positive, got {self.base_lr!r}")
        if self.grad_clip < 0:
            raise ConfigError(f"grad_clip must be >= 0, got {self.grad_clip!r}")

    def resolved_target_mode(self) -> str:
        """Cross-entropy trains on one-hot majorities; the rest on distributions."""
        if self.target_mode:
            return self.target_mode
        return "majority" if self.loss == "ce" else "distribution"


@dataclass(frozen=True)
class EpochRecord:
    epoch: int
    train_loss: float
    val_js: dict[int, float] | None
    val_f1: dict[int, float] | None
    seconds: float


@dataclass
class TrainingLog:
    seed: int
    loss: str
    target_mode: str
    records: list[EpochRecord] = field(default_factory=list)
    lr_trace: list[float] = field(default_factory=list)
    wall_clock_seconds: float = 0.0

    def to_dict(self) -> dict:
        return {
            "seed": self.seed,
            "loss": self.loss,
            "target_mode": self.target_mode,
            "wall_clock_seconds": self.wall_clock_seconds,
            "lr_trace": self.lr_trace,
            "epochs": [
                {
                    "epoch": r.epoch,
                    "train_loss": r.train_loss,
                    "val_js": r.val_js,
                    "val_f1": r.val_f1,
                    "seconds": r.seconds,
                }
                for r in self.records
            ],
        }


def render_log_text(log: TrainingLog) -> str:
    """Human-readable per-epoch training log."""
    lines = [
        f"seed={log.seed} loss={log.loss} target_mode={log.target_mode}",
        f"wall_clock_seconds={log.wall_clock_seconds:.3f}",
        f"optimizer_steps={len(log.lr_trace)}",
    ]
    for r in log.records:
        parts = [f"epoch {r.epoch:3d}", f"train_loss {r.train_loss:.6f}"]
        if r.val_js is not None:
            js = " ".join(f"L{lv}={v:.4f}" for lv, v in sorted(r.val_js.items()))
            parts.append(f"val_js {js}")
        if r.val_f1 is not None:
            f1 = " ".join(f"L{lv}={v:.2f}" for lv, v in sorted(r.val_f1.items()))
            parts.append(f"val_f1 {f1}")
        parts.append(f"{r.seconds:.2f}s")
        lines.append("  ".join(parts))
    return "\n".join(lines) + "\n"


def level_targets(
    instances: Sequence[RelationInstance],
    level: int,
    mode: str,
    hierarchy: SenseHierarchy,
) -> np.ndarray:
    """Target matrix [N, C] for one level: distributions or one-hot majorities."""
    size = len(hierarchy.space(level))
    if mode == "distribution":
        return np.stack([inst.dist(level).as_array() for inst in instances])
    if mode == "majority":
        out = np.zeros((len(instances), size))
        for row, inst in enumerate(instances):
            out[row, hierarchy.index(level, inst.majority(level))] = 1.0
        return out
    raise ConfigError(f"unknown target_mode: {mode!r}")


def train(
    model_config: ModelConfig,
    settings: TrainingSettings,
    train_instances: Sequence[RelationInstance],
    val_instances: Sequence[RelationInstance],
    hierarchy: SenseHierarchy,
    seed: int,
) -> tuple[MultiLevelClassifier, TrainingLog]:
    """One deterministic training run; returns the final-epoch model."""
    if not train_instances:
        raise DataError("empty train split")
    started = time.monotonic()
    torch.manual_seed(seed)
    model = MultiLevelClassifier(
        dataclasses.replace(model_config, init_seed=seed), hierarchy
    )
    mode = settings.resolved_target_mode()
    targets = {
        level: torch.tensor(
            level_targets(train_instances, level, mode, hierarchy),
            dtype=torch.float32,
        )
        for level in (1, 2, 3)
    }
    arg1s = [inst.arg1 for inst in train_instances]
    arg2s = [inst.arg2 for inst in train_instances]
    ids = [inst.id for inst in train_instances]

    optimizer = torch.optim.Adam(model.parameters(), lr=settings.base_lr)
    schedule = make_schedule(settings.schedule, settings.base_lr, settings.epochs)
    n = len(train_instances)
    steps_per_epoch = math.ceil(n / settings.batch_size)
    log = TrainingLog(seed=seed, loss=settings.loss, target_mode=mode)

    step = 0
    for epoch in range(settings.epochs):
        epoch_started = time.monotonic()
        model.train()
        perm = np.random.default_rng([seed, epoch]).permutation(n)
        epoch_losses = []
        for start in range(0, n, settings.batch_size):
            batch = perm[start : start + settings.batch_size]
            lr = schedule(step / steps_per_epoch)
            for group in optimizer.param_groups:
                group["lr"] = lr
            outputs = model(
                [arg1s[i] for i in batch], [arg2s[i] for i in batch]
            )
            losses = [
                head_loss(
                    settings.loss, outputs.scores(level), targets[level][batch]
                )
                for level in (1, 2, 3)
            ]
            try:
                loss = total_loss(*losses)
            except NumericError as exc:
                batch_ids = ", ".join(ids[i] for i in batch[:8])
                raise NumericError(
                    f"epoch {epoch} step {step}: {exc} (batch ids: {batch_ids})"
                ) from exc
            optimizer.zero_grad()
            loss.backward()
            if settings.grad_clip > 0:
                torch.nn.utils.clip_grad_norm_(model.parameters(), settings.grad_clip)
            optimizer.step()
            log.lr_trace.append(lr)
            epoch_losses.append(float(loss.item()))
            step += 1
        val_js = val_f1 = None
        if val_instances:
            reports = evaluate_on_distributions(model, val_instances, hierarchy)
            val_js = {level: reports[level].js_mean for level in (1, 2, 3)}
            val_f1 = {level: reports[level].f1_weighted for level in (1, 2, 3)}
        log.records.append(
            EpochRecord(
                epoch=epoch,
                train_loss=float(np.mean(epoch_losses)),
                val_js=val_js,
                val_f1=val_f1,
                seconds=time.monotonic() - epoch_started,
            )
        )
    log.wall_clock_seconds = time.monotonic() - started
    model.eval()
    return model, log


@dataclass(frozen=True)
class PredictionRecord:
    """Model output for one instance: per-level distribution and label."""

    id: str
    dists: dict[int, np.ndarray]
    labels: dict[int, str]

    def to_json(self) -> str:
        payload = {
            "id": self.id,
            "dist1": [float(v) for v in self.dists[1]],
            "dist2": [float(v) for v in self.dists[2]],
            "dist3": [float(v) for v in self.dists[3]],
            "label1": self.labels[1],
            "label2": self.labels[2],
            "label3": self.labels[3],
        }
        return json.dumps(payload, sort_keys=True)


def predict(
    model: MultiLevelClassifier,
    instances: Sequence,
    hierarchy: SenseHierarchy,
    batch_size: int = 64,
) -> list[PredictionRecord]:
    """Eval-mode predictions for anything with id/arg1/arg2 fields."""
    records: list[PredictionRecord] = []
    for start in range(0, len(instances), batch_size):
        chunk = instances[start : start + batch_size]
        dists = model.predict_distributions(
            [inst.arg1 for inst in chunk], [inst.arg2 for inst in chunk]
        )
        for row, inst in enumerate(chunk):
            per_level = {level: dists[level][row] for level in (1, 2, 3)}
            labels = {
                level: pool_single_label(
                    LabelDistribution(level, tuple(per_level[level].tolist())),
                    hierarchy,
                )
                for level in (1, 2, 3)
            }
            records.append(PredictionRecord(inst.id, per_level, labels))
    return records


def predictions_to_jsonl(records: Sequence[PredictionRecord]) -> str:
    return "".join(r.to_json() + "\n" for r in records)


def load_predictions(path: str | Path) -> list[PredictionRecord]:
    records = []
    for line in Path(path).read_text(encoding="utf-8").splitlines():
        if not line.strip():
            continue
        payload = json.loads(line)
        records.append(
            PredictionRecord(
                id=payload["id"],
                dists={
                    level: np.asarray(payload[f"dist{level}"], dtype=np.float64)
                    for level in (1, 2, 3)
                },
                labels={level: payload[f"label{level}"] for level in (1, 2, 3)},
            )
        )
    return records


def evaluate_on_distributions(
    model: MultiLevelClassifier,
    instances: Sequence[RelationInstance],
    hierarchy: SenseHierarchy,
    batch_size: int = 64,
) -> dict[int, LevelReport]:
    """Score against distribution-labeled gold at all three levels."""
    records = predict(model, instances, hierarchy, batch_size)
    return score_predictions(records, instances, hierarchy)


def score_predictions(
    records: Sequence[PredictionRecord],
    instances: Sequence[RelationInstance],
    hierarchy: SenseHierarchy,
) -> dict[int, LevelReport]:
    reports = {}
    for level in (1, 2, 3):
        reports[level] = evaluate_level(
            level,
            hierarchy,
            pred_dists={r.id: r.dists[level] for r in records},
            pred_labels={r.id: r.labels[level] for r in records},
            gold_dists={i.id: i.dist(level).as_array() for i in instances},
            gold_labels={i.id: i.majority(level) for i in instances},
        )
    return reports


def score_single_label_predictions(
    records: Sequence[PredictionRecord],
    test_set: SingleLabelTestSet,
    hierarchy: SenseHierarchy,
) -> dict[int, LevelReport]:
    """Score predictions against single-label gold; levels 1 and 2 only."""
    if not test_set.instances:
        raise DataError(f"test set {test_set.name!r} is empty")
    by_id = {r.id: r for r in records}
    reports = {}
    for level in (1, 2):
        gold = {
            rel.id: (rel.label1 if level == 1 else rel.label2)
            for rel in test_set.instances
        }
        missing = [rid for rid in gold if rid not in by_id]
        if missing:
            raise DataError(
                f"predictions missing for {len(missing)} instances of "
                f"{test_set.name!r} (first: {missing[0]!r})"
            )
        reports[level] = evaluate_level(
            level,
            hierarchy,
            pred_dists=None,
            pred_labels={rid: by_id[rid].labels[level] for rid in gold},
            gold_dists=None,
            gold_labels=gold,
        )
    return reports


def evaluate_on_single_labels(
    model: MultiLevelClassifier,
    test_set: SingleLabelTestSet,
    hierarchy: SenseHierarchy,
    batch_size: int = 64,
) -> dict[int, LevelReport]:
    """Score against single-label gold; levels 1 and 2 only."""
    records = predict(model, list(test_set.instances), hierarchy, batch_size)
    return score_single_label_predictions(records, test_set, hierarchy)


@dataclass
class SeedRun:
    seed: int
    log: TrainingLog
    reports: dict[int, LevelReport]
    predictions: list[PredictionRecord]


@dataclass
class SeedAggregate:
    """Per-seed results plus mean/std aggregation of every metric."""

    runs: list[SeedRun]
    summary: dict  # level -> metric -> {mean, std, n, std_undefined}

    def seeds(self) -> list[int]:
        return [run.seed for run in self.runs]


def aggregate_reports(per_seed_reports: Sequence[dict[int, LevelReport]]) -> dict:
    summary: dict = {}
    for level in sorted(per_seed_reports[0]):
        level_summary: dict = {}
        js_values = [r[level].js_mean for r in per_seed_reports]
        if all(v is not None for v in js_values):
            level_summary["js_mean"] = aggregate_mean_std(js_values)
        level_summary["f1_weighted"] = aggregate_mean_std(
            [r[level].f1_weighted for r in per_seed_reports]
        )
        summary[level] = level_summary
    return summary


def run_seeds(
    model_config: ModelConfig,
    settings: TrainingSettings,
    seeds: Sequence[int],
    train_instances: Sequence[RelationInstance],
    val_instances: Sequence[RelationInstance],
    test_instances: Sequence[RelationInstance],
    hierarchy: SenseHierarchy,
    out_dir: str | Path | None = None,
    run_config_hash: str = "",
) -> SeedAggregate:
    """Train and evaluate once per seed; aggregate mean and std per metric."""
    if not seeds:
        raise ConfigError("need at least one seed")
    runs: list[SeedRun] = []
    for seed in seeds:
        try:
            model, log = train(
                model_config, settings, train_instances, val_instances, hierarchy, seed
            )
            predictions = (
                predict(model, test_instances, hierarchy) if test_instances else []
            )
            reports = (
                score_predictions(predictions, test_instances, hierarchy)
                if test_instances
                else {}
            )
        except SensedistError as exc:
            raise TrainingRunError(f"seed {seed} failed: {exc}") from exc
        if out_dir is not None:
            seed_dir = Path(out_dir) / f"seed_{seed}"
            seed_dir.mkdir(parents=True, exist_ok=True)
            save_checkpoint(seed_dir / "checkpoint", model, run_config_hash)
            (seed_dir / "predictions.jsonl").write_text(
                predictions_to_jsonl(predictions), encoding="utf-8"
            )
            (seed_dir / "log.txt").write_text(
                render_log_text(log), encoding="utf-8"
            )
        runs.append(SeedRun(seed, log, reports, predictions))
    summary = (
        aggregate_reports([run.reports for run in runs]) if test_instances else {}
    )
    return SeedAggregate(runs=runs, summary=summary)
