"""Ingestion of the distribution-labeled crowd corpus.

The corpus annotates each implicit relation with averaged annotator mass
over 29 fine-grained senses. Adaptation to the 14-sense level-2 set drops
the senses whose level-2 parent is outside that set (Disjunction,
Exception, Neg-Condition and their children), renormalizes the kept mass
once per instance, and derives the level-1/2/3 target distributions from
that single renormalized mass so the three levels stay mutually
consistent: a level-1 entry is the sum of its children, and a fallback
level-3 entry equals its level-2 entry.
"""

from __future__ import annotations

import csv
import json
import logging
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Mapping, Sequence

import numpy as np

from .distributions import LabelDistribution, majority_label
from .errors import (
    DegenerateInstanceError,
    LabelSpaceError,
    RowParseError,
    SchemaError,
)
from .hierarchy import LEVEL2_PARENTS, LEVEL3_CHILDREN, SenseHierarchy

log = logging.getLogger(__name__)

GENRES = ("political", "literary", "encyclopedic", "pdtb-extracted")

# Built-in genre label normalization; run configs may extend it.
GENRE_ALIASES = {
    "political": "political",
    "europarl": "political",
    "literary": "literary",
    "literature": "literary",
    "novel": "literary",
    "encyclopedic": "encyclopedic",
    "wikipedia": "encyclopedic",
    "wiki": "encyclopedic",
    "pdtb-extracted": "pdtb-extracted",
    "pdtb": "pdtb-extracted",
}

# Original level-2 senses outside the adapted 14-sense set. Their mass
# (and their children's) is dropped during adaptation.
DROPPED_LEVEL2 = {
    "Neg-Condition": ("Arg1-as-NegCond", "Arg2-as-NegCond"),
    "Disjunction": (),
    "Exception": ("Arg1-as-Exception", "Arg2-as-Exception"),
}


def _build_original_inventory() -> dict[str, tuple[str | None, str | None]]:
    """Map every original sense name -> (level-2 ancestor, level-3 name or None).

    A level-2 ancestor of None marks a dropped sense. Covers the 29
    fine-grained annotation labels plus bare level-2 names.
    """
    inv: dict[str, tuple[str | None, str | None]] = {}
    for l2 in LEVEL2_PARENTS:
        children = LEVEL3_CHILDREN.get(l2, ())
        inv[l2] = (l2, None if children else l2)
        for child in children:
            inv[child] = (l2, child)
    for l2, children in DROPPED_LEVEL2.items():
        inv[l2] = (None, None)
        for child in children:
            inv[child] = (None, None)
    return inv

ORIGINAL_INVENTORY = _build_original_inventory()

# The corpus's own annotation labels: every most-specific sense, i.e. the
# fine-grained children plus the level-2 senses that have none (29 names).
ANNOTATION_LABELS = tuple(
    name
    for name in ORIGINAL_INVENTORY
    if name not in LEVEL3_CHILDREN
    and not DROPPED_LEVEL2.get(name)
)

_NORMALIZE_RE = re.compile(r"[^a-z0-9]+")


def _normalize(name: str) -> str:
    return _NORMALIZE_RE.sub("", name.lower())

_CANONICAL_BY_NORMALIZED = {_normalize(n): n for n in ORIGINAL_INVENTORY}


def canonical_sense_name(name: str) -> str:
    """Resolve a raw sense string (any casing/punctuation) to its canonical name."""
    canon = _CANONICAL_BY_NORMALIZED.get(_normalize(name))
    if canon is None:
        raise LabelSpaceError(f"unknown sense name: {name!r}")
    return canon


@dataclass(frozen=True)
class RawRelation:
    """One corpus row before label-space adaptation."""

    id: str
    arg1: str
    arg2: str
    genre: str
    raw: Mapping[str, float]
    source: str = "discogem"


@dataclass(frozen=True)
class RelationInstance:
    """One implicit discourse relation with adapted per-level targets."""

    id: str
    arg1: str
    arg2: str
    genre: str
    dist1: LabelDistribution
    dist2: LabelDistribution
    dist3: LabelDistribution
    maj1: str
    maj2: str
    maj3: str
    source: str = "discogem"

    def dist(self, level: int) -> LabelDistribution:
        return {1: self.dist1, 2: self.dist2, 3: self.dist3}[level]

    def majority(self, level: int) -> str:
        return {1: self.maj1, 2: self.maj2, 3: self.maj3}[level]


@dataclass
class ColumnMap:
    """Names the corpus file's columns.

    `senses` maps canonical sense names to column names; senses left
    unmapped fall back to matching column headers case-insensitively
    against the original inventory. `genre_aliases` extends the built-in
    genre normalization.
    """

    id: str = "itemid"
    arg1: str = "arg1"
    arg2: str = "arg2"
    genre: str = "genre"
    senses: dict[str, str] = field(default_factory=dict)
    genre_aliases: dict[str, str] = field(default_factory=dict)


def _resolve_sense_columns(
    header: Sequence[str], column_map: ColumnMap
) -> dict[str, str]:
    """Canonical sense name -> column name, explicit mappings first."""
    mapping: dict[str, str] = {}
    for raw_name, col in column_map.senses.items():
        if col not in header:
            raise SchemaError(f"mapped sense column missing from file: {col!r}")
        mapping[canonical_sense_name(raw_name)] = col
    claimed = set(mapping.values())
    fixed = {column_map.id, column_map.arg1, column_map.arg2, column_map.genre}
    for col in header:
        if col in claimed or col in fixed:
            continue
        canon = _CANONICAL_BY_NORMALIZED.get(_normalize(col))
        if canon is not None and canon not in mapping:
            mapping[canon] = col
    if not mapping:
        raise SchemaError("no probability columns found; map them explicitly")
    return mapping


def load_discogem(
    path: str | Path,
    column_map: ColumnMap | None = None,
    delimiter: str = ",",
    source: str = "discogem",
) -> list[RawRelation]:
    """Parse the corpus file into raw relations (pre-adaptation).

    One relation per row, with the raw per-sense annotation mass attached.
    Missing mapped columns raise SchemaError naming them; a blank or
    non-numeric probability cell raises RowParseError with the row id.
    """
    column_map = column_map or ColumnMap()
    path = Path(path)
    with path.open(newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh, delimiter=delimiter)
        header = reader.fieldnames or []
        missing = [
            c
            for c in (column_map.id, column_map.arg1, column_map.arg2, column_map.genre)
            if c not in header
        ]
        if missing:
            raise SchemaError(f"missing column(s): {', '.join(missing)}")
        sense_cols = _resolve_sense_columns(header, column_map)
        aliases = {**GENRE_ALIASES, **column_map.genre_aliases}

        relations: list[RawRelation] = []
        for lineno, row in enumerate(reader, start=2):
            row_id = (row.get(column_map.id) or "").strip() or f"line-{lineno}"
            arg1 = (row.get(column_map.arg1) or "").strip()
            arg2 = (row.get(column_map.arg2) or "").strip()
            if not arg1 or not arg2:
                raise RowParseError(row_id, "empty argument text")
            genre_raw = (row.get(column_map.genre) or "").strip()
            genre = aliases.get(genre_raw.lower())
            if genre is None:
                raise RowParseError(
                    row_id,
                    f"unknown genre {genre_raw!r}; extend genre_aliases in the config",
                )
            raw: dict[str, float] = {}
            for canon, col in sense_cols.items():
                cell = (row.get(col) or "").strip()
                if not cell:
                    raise RowParseError(row_id, f"blank probability cell in {col!r}")
                try:
                    value = float(cell)
                except ValueError:
                    raise RowParseError(
                        row_id, f"non-numeric probability {cell!r} in {col!r}"
                    ) from None
                if not np.isfinite(value) or value < 0:
                    raise RowParseError(row_id, f"invalid probability {value!r} in {col!r}")
                raw[canon] = value
            relations.append(RawRelation(row_id, arg1, arg2, genre, raw, source))
    return relations


def adapt_label_space(
    raw: Mapping[str, float], hierarchy: SenseHierarchy
) -> tuple[LabelDistribution, LabelDistribution, LabelDistribution]:
    """Drop out-of-set senses and renormalize into per-level distributions.

    The kept raw mass is renormalized once (divided by its sum); each unit
    of it lands in exactly one bucket per level, so every level sums to 1,
    a level-1 entry is the sum of its children's entries, and a fallback
    level-3 entry equals its level-2 entry. Mass given against a bare
    level-2 name that has fine-grained children (which the corpus's own
    annotation labels never do) is spread uniformly over those children at
    level 3.

    Raises DegenerateInstanceError if adaptation removes all mass.
    """
    sizes = hierarchy.sizes()
    vec1 = np.zeros(sizes[0])
    vec2 = np.zeros(sizes[1])
    vec3 = np.zeros(sizes[2])

    kept: list[tuple[str, str | None, float]] = []  # (level2, level3-or-None, mass)
    total = 0.0
    for name, mass in raw.items():
        l2, l3 = ORIGINAL_INVENTORY.get(name, ("__unknown__", None))
        if l2 == "__unknown__":
            raise LabelSpaceError(f"unknown sense name: {name!r}")
        if l2 is None:  # dropped sense
            continue
        if mass < 0:
            raise LabelSpaceError(f"negative mass {mass!r} for sense {name!r}")
        kept.append((l2, l3, mass))
        total += mass

    if total <= 0.0:
        raise DegenerateInstanceError("adaptation removed all annotation mass")

    l3_index = {s.name: s.index for s in hierarchy.level3}
    for l2_name, l3_name, mass in kept:
        share = mass / total
        l2_sense = hierarchy.sense(2, l2_name)
        vec2[l2_sense.index] += share
        vec1[l2_sense.parent.index] += share
        if l3_name is not None:
            vec3[l3_index[l3_name]] += share
        else:
            children = hierarchy.children(3, l2_name)
            for child in children:
                vec3[child.index] += share / len(children)

    return (
        LabelDistribution(1, tuple(vec1.tolist())),
        LabelDistribution(2, tuple(vec2.tolist())),
        LabelDistribution(3, tuple(vec3.tolist())),
    )


def adapt_relation(raw: RawRelation, hierarchy: SenseHierarchy) -> RelationInstance:
    dist1, dist2, dist3 = adapt_label_space(raw.raw, hierarchy)
    return RelationInstance(
        id=raw.id,
        arg1=raw.arg1,
        arg2=raw.arg2,
        genre=raw.genre,
        dist1=dist1,
        dist2=dist2,
        dist3=dist3,
        maj1=majority_label(dist1, hierarchy),
        maj2=majority_label(dist2, hierarchy),
        maj3=majority_label(dist3, hierarchy),
        source=raw.source,
    )


def adapt_corpus(
    raws: Iterable[RawRelation], hierarchy: SenseHierarchy
) -> tuple[list[RelationInstance], list[str]]:
    """Adapt every raw relation; degenerate ones are excluded and logged."""
    instances: list[RelationInstance] = []
    degenerate: list[str] = []
    for raw in raws:
        try:
            instances.append(adapt_relation(raw, hierarchy))
        except DegenerateInstanceError:
            log.warning("excluding degenerate instance %s (no adapted mass)", raw.id)
            degenerate.append(raw.id)
    return instances, degenerate


def adapted_mass_sums(
    instances: Sequence[RelationInstance], hierarchy: SenseHierarchy
) -> dict[int, dict[str, float]]:
    """Per-level sums of adapted sense mass across instances.

    Comparable to the corpus statistics table: each value is the summed
    probability of that sense over all instances.
    """
    sums: dict[int, dict[str, float]] = {}
    for level in (1, 2, 3):
        names = hierarchy.names(level)
        acc = np.zeros(len(names))
        for inst in instances:
            acc += inst.dist(level).as_array()
        sums[level] = {name: float(v) for name, v in zip(names, acc)}
    return sums


def instances_to_jsonl(instances: Sequence[RelationInstance]) -> str:
    """Serialize adapted instances, one JSON object per line."""
    lines = []
    for inst in instances:
        record = {
            "id": inst.id,
            "arg1": inst.arg1,
            "arg2": inst.arg2,
            "genre": inst.genre,
            "source": inst.source,
            "dist1": list(inst.dist1.values),
            "dist2": list(inst.dist2.values),
            "dist3": list(inst.dist3.values),
            "maj1": inst.maj1,
            "maj2": inst.maj2,
            "maj3": inst.maj3,
        }
        lines.append(json.dumps(record, sort_keys=True))
    return "\n".join(lines) + ("\n" if lines else "")


def load_instances(path: str | Path) -> list[RelationInstance]:
    """Read instances written by instances_to_jsonl."""
    instances = []
    text = Path(path).read_text(encoding="utf-8")
    for lineno, line in enumerate(text.splitlines(), start=1):
        if not line.strip():
            continue
        try:
            record = json.loads(line)
            instances.append(
                RelationInstance(
                    id=record["id"],
                    arg1=record["arg1"],
                    arg2=record["arg2"],
                    genre=record["genre"],
                    dist1=LabelDistribution(1, tuple(record["dist1"])),
                    dist2=LabelDistribution(2, tuple(record["dist2"])),
                    dist3=LabelDistribution(3, tuple(record["dist3"])),
                    maj1=record["maj1"],
                    maj2=record["maj2"],
                    maj3=record["maj3"],
                    source=record.get("source", "discogem"),
                )
            )
        except (json.JSONDecodeError, KeyError) as exc:
            raise RowParseError(f"line-{lineno}", f"bad instance record: {exc}")
    return instances
