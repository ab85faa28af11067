"""Single-label test sets drawn from section-organized treebank files.

The input is a delimited file of implicit relations with a section
number, both arguments, and gold level-1/level-2 senses. Three test-set
schemes are supported:

  lin    test = section 23
  ji     test = sections 21 and 22
  cross  12 folds; fold k tests sections {2k, 2k+1} over sections 0..23

A cell listing several senses contributes only the first. Relations whose
level-2 sense falls outside the adapted 14-sense set are dropped (the
count is reported), since the label spaces would otherwise disagree.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

from .corpus import _CANONICAL_BY_NORMALIZED, _normalize
from .errors import DataError, SchemaError
from .hierarchy import SenseHierarchy, default_hierarchy

SCHEMES = ("lin", "ji", "cross")

_MULTI_SENSE_SEPARATORS = (";", "|")


@dataclass(frozen=True)
class LabeledRelation:
    """One test relation with single gold senses at levels 1 and 2."""

    id: str
    arg1: str
    arg2: str
    section: int
    label1: str
    label2: str


@dataclass(frozen=True)
class SingleLabelTestSet:
    name: str
    instances: tuple[LabeledRelation, ...]
    sections: tuple[int, ...]
    fold: int | None = None


@dataclass
class PdtbColumnMap:
    section: str = "section"
    arg1: str = "arg1"
    arg2: str = "arg2"
    level1: str = "sense_l1"
    level2: str = "sense_l2"


def _first_sense(cell: str) -> str:
    for sep in _MULTI_SENSE_SEPARATORS:
        if sep in cell:
            cell = cell.split(sep, 1)[0]
    return cell.strip()


def _parse_rows(
    path: Path,
    column_map: PdtbColumnMap,
    delimiter: str,
    hierarchy: SenseHierarchy,
) -> tuple[list[LabeledRelation], int]:
    level2_names = set(hierarchy.names(2))
    relations: list[LabeledRelation] = []
    dropped = 0
    with path.open(newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh, delimiter=delimiter)
        header = reader.fieldnames or []
        missing = [
            c
            for c in (
                column_map.section,
                column_map.arg1,
                column_map.arg2,
                column_map.level1,
                column_map.level2,
            )
            if c not in header
        ]
        if missing:
            raise SchemaError(f"missing column(s): {', '.join(missing)}")
        for lineno, row in enumerate(reader, start=2):
            section_cell = (row.get(column_map.section) or "").strip()
            try:
                section = int(section_cell)
            except ValueError:
                raise DataError(
                    f"line {lineno}: section field missing or non-numeric: "
                    f"{section_cell!r}"
                ) from None
            raw2 = _first_sense(row.get(column_map.level2) or "")
            canon2 = _CANONICAL_BY_NORMALIZED.get(_normalize(raw2)) if raw2 else None
            if canon2 not in level2_names:
                dropped += 1
                continue
            raw1 = _first_sense(row.get(column_map.level1) or "")
            parent = hierarchy.sense(2, canon2).parent.name
            if _normalize(raw1) != _normalize(parent):
                raise DataError(
                    f"line {lineno}: level-1 sense {raw1!r} does not match "
                    f"the parent of {canon2!r} ({parent})"
                )
            relations.append(
                LabeledRelation(
                    id=f"line-{lineno}",
                    arg1=(row.get(column_map.arg1) or "").strip(),
                    arg2=(row.get(column_map.arg2) or "").strip(),
                    section=section,
                    label1=parent,
                    label2=canon2,
                )
            )
    return relations, dropped


def load_pdtb_splits(
    path: str | Path,
    scheme: str,
    column_map: PdtbColumnMap | None = None,
    delimiter: str = "\t",
    hierarchy: SenseHierarchy | None = None,
) -> tuple[list[SingleLabelTestSet], int]:
    """Build the scheme's test set(s); returns (test sets, dropped-row count)."""
    if scheme not in SCHEMES:
        raise DataError(f"unknown test-set scheme: {scheme!r}")
    hierarchy = hierarchy or default_hierarchy()
    relations, dropped = _parse_rows(
        Path(path), column_map or PdtbColumnMap(), delimiter, hierarchy
    )
    if not relations:
        raise DataError("no usable relations in file; cannot build test sets")

    by_section: dict[int, list[LabeledRelation]] = {}
    for rel in relations:
        by_section.setdefault(rel.section, []).append(rel)

    def gather(sections: Sequence[int]) -> tuple[LabeledRelation, ...]:
        out: list[LabeledRelation] = []
        for s in sections:
            out.extend(by_section.get(s, []))
        return tuple(out)

    if scheme == "lin":
        sets = [SingleLabelTestSet("lin", gather([23]), (23,))]
    elif scheme == "ji":
        sets = [SingleLabelTestSet("ji", gather([21, 22]), (21, 22))]
    else:
        sets = []
        for fold in range(12):
            sections = (2 * fold, 2 * fold + 1)
            sets.append(
                SingleLabelTestSet(
                    f"cross-{fold:02d}", gather(sections), sections, fold=fold
                )
            )
    empty = [ts.name for ts in sets if not ts.instances]
    if len(empty) == len(sets):
        raise DataError(
            f"scheme {scheme!r} found no relations in its test sections"
        )
    return sets, dropped


def label_counts(
    test_set: SingleLabelTestSet, level: int, hierarchy: SenseHierarchy | None = None
) -> dict[str, int]:
    """Gold-label counts over one test set, in canonical sense order."""
    hierarchy = hierarchy or default_hierarchy()
    if level not in (1, 2):
        raise DataError(f"single-label test sets carry levels 1 and 2, not {level}")
    counts = {name: 0 for name in hierarchy.names(level)}
    for rel in test_set.instances:
        counts[rel.label1 if level == 1 else rel.label2] += 1
    return counts
