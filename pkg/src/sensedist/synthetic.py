"""Synthetic corpora for fast end-to-end checks.

`make_separable_corpus` builds a small distribution-labeled corpus whose
classes are trivially separable from token identity: each class owns
signature tokens that appear in every one of its instances and nowhere
else. A linear model over a hashed bag-of-words can drive its training
error to zero on it within a few epochs, which is what the desk-scale
training checks rely on.
"""

from __future__ import annotations

import csv
from pathlib import Path
from typing import Sequence

from .corpus import (
    ANNOTATION_LABELS,
    ORIGINAL_INVENTORY,
    RawRelation,
    RelationInstance,
    adapt_relation,
)
from .errors import ConfigError
from .hierarchy import SenseHierarchy, default_hierarchy

# Learning rate for desk-scale runs on this corpus: the encoder here is
# frozen, so the trainable part is a plain linear model that needs much
# larger steps than encoder fine-tuning does.
DESK_SCALE_LR = 0.05

# Eight most-specific senses: two per level-1 class, each under its own
# level-2 parent.
SEPARABLE_SENSES = (
    "Synchronous",
    "Precedence",
    "Reason",
    "Arg2-as-Cond",
    "Contrast",
    "Similarity",
    "Conjunction",
    "Arg2-as-Instance",
)

_FILLERS = ("today", "again", "meanwhile", "indeed")


def make_separable_raws(
    n_per_class: int = 8,
    senses: Sequence[str] = SEPARABLE_SENSES,
) -> list[RawRelation]:
    """One-hot raw relations whose classes are token-separable."""
    if n_per_class < 1:
        raise ConfigError(f"n_per_class must be >= 1, got {n_per_class}")
    raws = []
    genres = ("political", "literary", "encyclopedic", "pdtb-extracted")
    for class_idx, sense in enumerate(senses):
        if sense not in ORIGINAL_INVENTORY:
            raise ConfigError(f"unknown sense for synthetic corpus: {sense!r}")
        tag = f"class{class_idx}"
        for i in range(n_per_class):
            filler = _FILLERS[i % len(_FILLERS)]
            raws.append(
                RawRelation(
                    id=f"syn-{class_idx}-{i}",
                    arg1=f"{tag}left {tag}cue {filler} item{i}",
                    arg2=f"{tag}right {tag}mark {filler} thing{i}",
                    genre=genres[i % len(genres)],
                    raw={sense: 1.0},
                    source="synthetic",
                )
            )
    return raws


def make_separable_corpus(
    n_per_class: int = 8,
    hierarchy: SenseHierarchy | None = None,
    senses: Sequence[str] = SEPARABLE_SENSES,
) -> list[RelationInstance]:
    """A one-hot-labeled corpus with token-separable classes."""
    hierarchy = hierarchy or default_hierarchy()
    raws = make_separable_raws(n_per_class=n_per_class, senses=senses)
    return [adapt_relation(raw, hierarchy) for raw in raws]


def write_discogem_csv(raws: Sequence[RawRelation], path: str | Path) -> None:
    """Write raw relations in the corpus file layout (one column per sense)."""
    sense_columns = list(ANNOTATION_LABELS)
    path = Path(path)
    with path.open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["itemid", "arg1", "arg2", "genre"] + sense_columns)
        for raw in raws:
            cells = [raw.raw.get(name, 0.0) for name in sense_columns]
            writer.writerow(
                [raw.id, raw.arg1, raw.arg2, raw.genre]
                + [format(c, ".17g") for c in cells]
            )
