#!/usr/bin/env python3
"""Regenerate the 50-row synthetic corpus fixture and its expected sums.

Every row's kept annotation mass is a power of two and every cell is a
dyadic rational, so renormalization and per-level aggregation are exact
in binary floating point. The expected per-level mass sums are computed
here with Fraction arithmetic, independently of the package's
adaptation code, and written alongside the CSV for exact-match tests.

Usage: python3 scripts/make_discogem_fixture.py
"""

from __future__ import annotations

import json
import random
import sys
from fractions import Fraction
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parent.parent / "src"))

from sensedist.corpus import ANNOTATION_LABELS, ORIGINAL_INVENTORY, RawRelation
from sensedist.hierarchy import LEVEL2_PARENTS, LEVEL3_CHILDREN, default_hierarchy
from sensedist.synthetic import write_discogem_csv

FIXTURE_DIR = Path(__file__).resolve().parent.parent / "tests" / "fixtures"
CSV_PATH = FIXTURE_DIR / "discogem_synthetic_50.csv"
EXPECTED_PATH = FIXTURE_DIR / "discogem_synthetic_50_expected.json"

N_ROWS = 50
HALF = Fraction(1, 2)
QUARTER = Fraction(1, 4)

# Dyadic partitions of 1: multiplied by a power-of-two kept total they
# stay exactly representable.
PARTITIONS = (
    (Fraction(1),),
    (HALF, HALF),
    (Fraction(3, 4), QUARTER),
    (HALF, QUARTER, QUARTER),
    (Fraction(5, 8), QUARTER, Fraction(1, 8)),
    (QUARTER, QUARTER, QUARTER, QUARTER),
    (HALF, QUARTER, Fraction(1, 8), Fraction(1, 8)),
)

GENRE_CYCLE = (
    "political",
    "europarl",
    "literary",
    "literature",
    "encyclopedic",
    "wikipedia",
    "pdtb-extracted",
    "pdtb",
)

ARG1_TEXTS = (
    "the committee postponed its vote",
    "she closed the shutters before dusk",
    "the survey covered four regions",
    "prices rose through the quarter",
    "he had rehearsed the speech twice",
)
ARG2_TEXTS = (
    "the ballots were still being counted",
    "a storm was forecast for the evening",
    "two of them declined to answer",
    "suppliers had warned about shortages",
    "the hall was nearly empty",
)


def kept_and_dropped_names() -> tuple[list[str], list[str]]:
    kept, dropped = [], []
    for name in ANNOTATION_LABELS:
        level2, _ = ORIGINAL_INVENTORY[name]
        (kept if level2 is not None else dropped).append(name)
    return kept, dropped


def build_rows() -> tuple[list[RawRelation], list[dict[str, Fraction]]]:
    rng = random.Random(20240817)
    kept_names, dropped_names = kept_and_dropped_names()
    raws, kept_rows = [], []
    for i in range(N_ROWS):
        kept_total = rng.choice((Fraction(1), Fraction(1), HALF, QUARTER))
        partition = rng.choice(PARTITIONS)
        senses = rng.sample(kept_names, len(partition))
        kept = {s: p * kept_total for s, p in zip(senses, partition)}

        cells = dict(kept)
        remainder = 1 - kept_total
        if remainder > 0:
            drops = rng.sample(dropped_names, rng.choice((1, 2)))
            share = remainder / len(drops)
            for name in drops:
                cells[name] = cells.get(name, 0) + share

        raws.append(
            RawRelation(
                id=f"fx-{i:03d}",
                arg1=ARG1_TEXTS[i % len(ARG1_TEXTS)],
                arg2=ARG2_TEXTS[(i * 3 + 1) % len(ARG2_TEXTS)],
                genre=GENRE_CYCLE[i % len(GENRE_CYCLE)],
                raw={name: float(value) for name, value in cells.items()},
            )
        )
        kept_rows.append(kept)
    return raws, kept_rows


def expected_sums(kept_rows: list[dict[str, Fraction]]) -> dict:
    """Exact per-level adapted mass sums, by Fraction arithmetic."""
    hierarchy = default_hierarchy()
    sums = {
        1: {name: Fraction(0) for name in hierarchy.names(1)},
        2: {name: Fraction(0) for name in hierarchy.names(2)},
        3: {name: Fraction(0) for name in hierarchy.names(3)},
    }
    for kept in kept_rows:
        total = sum(kept.values())
        assert total > 0
        for name, mass in kept.items():
            share = mass / total
            level2, level3 = ORIGINAL_INVENTORY[name]
            assert level2 is not None
            # Most-specific kept names always resolve a level-3 slot:
            # either a true child or the childless level-2 fallback.
            assert level3 is not None or not LEVEL3_CHILDREN.get(level2)
            sums[1][LEVEL2_PARENTS[level2]] += share
            sums[2][level2] += share
            sums[3][level3 if level3 is not None else level2] += share
    return {
        "n_instances": N_ROWS,
        "level1": {k: float(v) for k, v in sums[1].items()},
        "level2": {k: float(v) for k, v in sums[2].items()},
        "level3": {k: float(v) for k, v in sums[3].items()},
    }


def main() -> None:
    FIXTURE_DIR.mkdir(parents=True, exist_ok=True)
    raws, kept_rows = build_rows()
    write_discogem_csv(raws, CSV_PATH)
    expected = expected_sums(kept_rows)
    EXPECTED_PATH.write_text(
        json.dumps(expected, indent=2, sort_keys=True) + "\n", encoding="utf-8"
    )
    print(f"wrote {CSV_PATH.name} and {EXPECTED_PATH.name} to {FIXTURE_DIR}")


if __name__ == "__main__":
    main()
