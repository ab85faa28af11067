"""The three-level PDTB 3.0 sense inventory used throughout the toolkit.

Level 1 holds the four broad senses. Level 2 is the adapted 14-sense set
(Similarity standing in for Cause+Belief, which the training corpus never
annotates). Level 3 keeps every fine-grained sense with annotated mass in
the adapted corpus plus, for each level-2 sense without fine-grained
children, one fallback member reusing the level-2 name.

Canonical index order at every level is fixed here once and shared by all
label vectors, model heads, and serialized files. The checked-in schema
file ``data/hierarchy_v1.tsv`` is the single source of truth; the
programmatic builders exist so tests can prove the file matches them.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass
from importlib import resources
from pathlib import Path
from typing import Iterable, Mapping, Sequence

from .errors import LabelSpaceError

SCHEMA_VERSION = "sense-hierarchy v1"

LEVEL1_NAMES = ("Temporal", "Contingency", "Comparison", "Expansion")

# name -> level-1 parent, in canonical row order
LEVEL2_PARENTS = {
    "Synchronous": "Temporal",
    "Asynchronous": "Temporal",
    "Cause": "Contingency",
    "Condition": "Contingency",
    "Purpose": "Contingency",
    "Concession": "Comparison",
    "Contrast": "Comparison",
    "Similarity": "Comparison",
    "Conjunction": "Expansion",
    "Equivalence": "Expansion",
    "Instantiation": "Expansion",
    "Level-of-Detail": "Expansion",
    "Manner": "Expansion",
    "Substitution": "Expansion",
}

# Annotated level-3 children per level-2 sense, canonical order. A level-2
# sense absent here contributes one fallback member instead. Zero-mass
# children (NegResult, Arg1-as-Substitution) stay in the space so head
# dimensions depend on the hierarchy alone, never on the data.
LEVEL3_CHILDREN = {
    "Asynchronous": ("Precedence", "Succession"),
    "Cause": ("Reason", "Result", "NegResult"),
    "Condition": ("Arg1-as-Cond", "Arg2-as-Cond"),
    "Purpose": ("Arg1-as-Goal", "Arg2-as-Goal"),
    "Concession": ("Arg1-as-Denier", "Arg2-as-Denier"),
    "Instantiation": ("Arg1-as-Instance", "Arg2-as-Instance"),
    "Level-of-Detail": ("Arg1-as-Detail", "Arg2-as-Detail"),
    "Manner": ("Arg1-as-Manner", "Arg2-as-Manner"),
    "Substitution": ("Arg1-as-Substitution", "Arg2-as-Substitution"),
}


@dataclass(frozen=True)
class Level1Sense:
    name: str
    index: int


@dataclass(frozen=True)
class Level2Sense:
    name: str
    index: int
    parent: Level1Sense


@dataclass(frozen=True)
class Level3Sense:
    name: str
    index: int
    parent: Level2Sense
    is_fallback: bool


class SenseHierarchy:
    """Immutable label spaces plus the parent maps between them.

    Safe to share across threads and worker processes once constructed.
    """

    def __init__(
        self,
        level1: Sequence[Level1Sense],
        level2: Sequence[Level2Sense],
        level3: Sequence[Level3Sense],
    ):
        self.level1 = tuple(level1)
        self.level2 = tuple(level2)
        self.level3 = tuple(level3)
        if len(self.level1) != 4:
            raise LabelSpaceError(f"level 1 must have 4 senses, got {len(self.level1)}")
        if len(self.level2) != 14:
            raise LabelSpaceError(f"level 2 must have 14 senses, got {len(self.level2)}")
        self._by_name = {
            1: {s.name: s for s in self.level1},
            2: {s.name: s for s in self.level2},
            3: {s.name: s for s in self.level3},
        }

    def sizes(self) -> tuple[int, int, int]:
        return (len(self.level1), len(self.level2), len(self.level3))

    def names(self, level: int) -> tuple[str, ...]:
        return tuple(s.name for s in self.space(level))

    def space(self, level: int):
        if level == 1:
            return self.level1
        if level == 2:
            return self.level2
        if level == 3:
            return self.level3
        raise LabelSpaceError(f"no such sense level: {level}")

    def sense(self, level: int, name: str):
        try:
            return self._by_name[level][name]
        except KeyError:
            raise LabelSpaceError(f"unknown level-{level} sense name: {name!r}") from None

    def index(self, level: int, name: str) -> int:
        return self.sense(level, name).index

    def parent_of(self, sense: Level2Sense | str) -> Level1Sense:
        """Level-1 ancestor of a level-2 sense (accepts the sense or its name)."""
        if isinstance(sense, str):
            sense = self.sense(2, sense)
        return sense.parent

    def is_coherent(self, l1: Level1Sense | str, l2: Level2Sense | str) -> bool:
        """True iff l1 is the level-1 ancestor of l2."""
        if isinstance(l1, str):
            l1 = self.sense(1, l1)
        return self.parent_of(l2).name == l1.name

    def level1_of_level3(self, sense: Level3Sense | str) -> Level1Sense:
        if isinstance(sense, str):
            sense = self.sense(3, sense)
        return sense.parent.parent

    def children(self, level: int, parent_name: str):
        """Members of `level` whose parent is the named sense one level up."""
        if level == 2:
            return tuple(s for s in self.level2 if s.parent.name == parent_name)
        if level == 3:
            return tuple(s for s in self.level3 if s.parent.name == parent_name)
        raise LabelSpaceError(f"level {level} has no parents one level up")

    # -- serialization ---------------------------------------------------

    def to_schema_text(self) -> str:
        lines = [f"# {SCHEMA_VERSION}", "# level\tname\tparent\tis_fallback"]
        for s in self.level1:
            lines.append(f"1\t{s.name}\t-\t0")
        for s in self.level2:
            lines.append(f"2\t{s.name}\t{s.parent.name}\t0")
        for s in self.level3:
            lines.append(f"3\t{s.name}\t{s.parent.name}\t{int(s.is_fallback)}")
        return "\n".join(lines) + "\n"

    def schema_hash(self) -> str:
        return hashlib.sha256(self.to_schema_text().encode("utf-8")).hexdigest()

    @classmethod
    def from_schema_text(cls, text: str) -> "SenseHierarchy":
        lines = [ln for ln in text.splitlines() if ln.strip()]
        if not lines or lines[0] != f"# {SCHEMA_VERSION}":
            raise LabelSpaceError(
                f"schema file does not start with '# {SCHEMA_VERSION}'"
            )
        level1: list[Level1Sense] = []
        level2: list[Level2Sense] = []
        level3: list[Level3Sense] = []
        by_name: dict[tuple[int, str], object] = {}
        for ln in lines[1:]:
            if ln.startswith("#"):
                continue
            parts = ln.split("\t")
            if len(parts) != 4:
                raise LabelSpaceError(f"malformed schema line: {ln!r}")
            level, name, parent, fallback = parts
            if level == "1":
                s1 = Level1Sense(name, len(level1))
                level1.append(s1)
                by_name[(1, name)] = s1
            elif level == "2":
                p1 = by_name.get((1, parent))
                if p1 is None:
                    raise LabelSpaceError(f"level-2 sense {name!r} has unknown parent {parent!r}")
                s2 = Level2Sense(name, len(level2), p1)
                level2.append(s2)
                by_name[(2, name)] = s2
            elif level == "3":
                p2 = by_name.get((2, parent))
                if p2 is None:
                    raise LabelSpaceError(f"level-3 sense {name!r} has unknown parent {parent!r}")
                level3.append(Level3Sense(name, len(level3), p2, fallback == "1"))
            else:
                raise LabelSpaceError(f"unknown sense level in schema: {level!r}")
        return cls(level1, level2, level3)

    @classmethod
    def load(cls, path: str | Path | None = None) -> "SenseHierarchy":
        """Load the hierarchy from a schema file (default: the packaged one)."""
        if path is None:
            text = resources.files("sensedist.data").joinpath("hierarchy_v1.tsv").read_text("utf-8")
        else:
            text = Path(path).read_text("utf-8")
        return cls.from_schema_text(text)

    @classmethod
    def build_default(cls) -> "SenseHierarchy":
        """Construct the canonical hierarchy from the inventory tables above."""
        level3_names = set()
        for children in LEVEL3_CHILDREN.values():
            level3_names.update(children)
        return cls.build(level3_names)

    @classmethod
    def build(cls, adapted_corpus_senses: Iterable[str]) -> "SenseHierarchy":
        """Construct the hierarchy for a given set of level-3 sense names.

        `adapted_corpus_senses` holds the level-3 names with annotated mass;
        level-2 names may be included and are ignored (they are always
        present). Every level-2 sense either contributes its annotated
        children, in canonical order, or one fallback member reusing its
        own name.
        """
        level1 = [Level1Sense(name, i) for i, name in enumerate(LEVEL1_NAMES)]
        l1_by_name = {s.name: s for s in level1}
        level2 = [
            Level2Sense(name, i, l1_by_name[parent])
            for i, (name, parent) in enumerate(LEVEL2_PARENTS.items())
        ]
        l2_names = set(LEVEL2_PARENTS)

        parent_of_l3 = {
            child: l2 for l2, children in LEVEL3_CHILDREN.items() for child in children
        }
        requested = set(adapted_corpus_senses) - l2_names
        unknown = requested - set(parent_of_l3)
        if unknown:
            raise LabelSpaceError(
                "level-3 sense(s) with no parent in the 14-sense set: "
                + ", ".join(sorted(unknown))
            )

        level3: list[Level3Sense] = []
        for l2 in level2:
            children = [
                c for c in LEVEL3_CHILDREN.get(l2.name, ()) if c in requested
            ]
            if children:
                for child in children:
                    level3.append(Level3Sense(child, len(level3), l2, False))
            else:
                level3.append(Level3Sense(l2.name, len(level3), l2, True))
        return cls(level1, level2, level3)


def build_level3_space(adapted_corpus_senses: Iterable[str]) -> tuple[Level3Sense, ...]:
    """Level-3 space for a set of annotated level-3 names (plus fallbacks)."""
    return SenseHierarchy.build(adapted_corpus_senses).level3


def default_hierarchy() -> SenseHierarchy:
    """The packaged canonical hierarchy (cached)."""
    global _DEFAULT
    if _DEFAULT is None:
        _DEFAULT = SenseHierarchy.load()
    return _DEFAULT


_DEFAULT: SenseHierarchy | None = None
