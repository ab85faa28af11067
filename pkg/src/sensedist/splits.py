"""Deterministic stratified train/validation/test splitting.

Instances are stratified by their level-2 majority label. Within each
class the split sizes come from largest-remainder rounding of the target
ratios, so per-class counts never deviate from the exact proportion by
more than one. Classes with fewer than three members are placed train
first, then test, then validation; remainder ties break in that same
order. Shuffling is seeded per class, making assignments reproducible
across platforms.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping, Sequence

import numpy as np

from .corpus import RelationInstance
from .errors import ConfigError, DataError

SPLIT_NAMES = ("train", "validation", "test")

# Order used for remainder ties and for tiny classes.
_PRIORITY = {"train": 0, "test": 1, "validation": 2}

DEFAULT_RATIOS = (0.7, 0.1, 0.2)


def largest_remainder_counts(
    n: int, ratios: Sequence[float] = DEFAULT_RATIOS
) -> dict[str, int]:
    """Split n into train/validation/test counts by largest remainder."""
    _check_ratios(ratios)
    if n < 0:
        raise ConfigError(f"negative class size: {n}")
    ideals = {name: n * r for name, r in zip(SPLIT_NAMES, ratios)}
    counts = {name: int(np.floor(v)) for name, v in ideals.items()}
    leftover = n - sum(counts.values())
    # Remainders are rounded so float noise cannot defeat the documented
    # train -> test -> validation tie order.
    order = sorted(
        SPLIT_NAMES,
        key=lambda name: (-round(ideals[name] - counts[name], 9), _PRIORITY[name]),
    )
    for name in order[:leftover]:
        counts[name] += 1
    return counts


def _check_ratios(ratios: Sequence[float]) -> None:
    if len(ratios) != 3:
        raise ConfigError(f"expected 3 split ratios, got {len(ratios)}")
    if any(r < 0 for r in ratios):
        raise ConfigError(f"split ratios must be nonnegative: {ratios}")
    if abs(sum(ratios) - 1.0) > 1e-9:
        raise ConfigError(f"split ratios must sum to 1: {ratios}")


@dataclass(frozen=True)
class SplitAssignment:
    """Mapping of instance id to split name, plus how it was produced."""

    assignment: Mapping[str, str]
    seed: int
    ratios: tuple[float, float, float] = DEFAULT_RATIOS

    def ids(self, split: str) -> list[str]:
        if split not in SPLIT_NAMES:
            raise ConfigError(f"unknown split name: {split!r}")
        return [i for i, s in self.assignment.items() if s == split]

    def select(
        self, instances: Sequence[RelationInstance], split: str
    ) -> list[RelationInstance]:
        if split not in SPLIT_NAMES:
            raise ConfigError(f"unknown split name: {split!r}")
        missing = [inst.id for inst in instances if inst.id not in self.assignment]
        if missing:
            raise DataError(
                f"{len(missing)} instance(s) missing from split assignment, "
                f"first: {missing[0]!r}"
            )
        return [inst for inst in instances if self.assignment[inst.id] == split]

    def counts(self) -> dict[str, int]:
        out = {name: 0 for name in SPLIT_NAMES}
        for split in self.assignment.values():
            out[split] += 1
        return out

    def to_json(self) -> str:
        payload = {
            "seed": self.seed,
            "ratios": list(self.ratios),
            "assignment": dict(sorted(self.assignment.items())),
        }
        return json.dumps(payload, sort_keys=True, indent=2) + "\n"

    def save(self, path: str | Path) -> None:
        Path(path).write_text(self.to_json(), encoding="utf-8")

    @classmethod
    def from_json(cls, text: str) -> "SplitAssignment":
        payload = json.loads(text)
        assignment = payload["assignment"]
        bad = sorted(set(assignment.values()) - set(SPLIT_NAMES))
        if bad:
            raise DataError(f"unknown split name(s) in assignment file: {bad}")
        return cls(
            assignment=assignment,
            seed=int(payload["seed"]),
            ratios=tuple(float(r) for r in payload["ratios"]),
        )

    @classmethod
    def load(cls, path: str | Path) -> "SplitAssignment":
        return cls.from_json(Path(path).read_text(encoding="utf-8"))


def stratified_split(
    instances: Sequence[RelationInstance],
    ratios: Sequence[float] = DEFAULT_RATIOS,
    seed: int = 13,
) -> SplitAssignment:
    """Assign every instance to train/validation/test, stratified by maj2."""
    _check_ratios(ratios)
    if not instances:
        raise DataError("cannot split an empty instance list")
    ids = [inst.id for inst in instances]
    if len(set(ids)) != len(ids):
        raise DataError("duplicate instance ids; split assignment would be ambiguous")

    by_class: dict[str, list[str]] = {}
    for inst in instances:
        by_class.setdefault(inst.maj2, []).append(inst.id)

    assignment: dict[str, str] = {}
    for class_index, label in enumerate(sorted(by_class)):
        members = by_class[label]
        rng = np.random.default_rng([seed, class_index])
        order = rng.permutation(len(members))
        shuffled = [members[i] for i in order]
        if len(shuffled) < 3:
            for name, inst_id in zip(("train", "test", "validation"), shuffled):
                assignment[inst_id] = name
            continue
        counts = largest_remainder_counts(len(shuffled), ratios)
        cursor = 0
        for name in SPLIT_NAMES:
            for inst_id in shuffled[cursor : cursor + counts[name]]:
                assignment[inst_id] = name
            cursor += counts[name]
    return SplitAssignment(assignment=assignment, seed=seed, ratios=tuple(ratios))
