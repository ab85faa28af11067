"""Tests for the three-level sense hierarchy."""

import pytest

from sensedist.errors import LabelSpaceError
from sensedist.hierarchy import (
    LEVEL1_NAMES,
    SenseHierarchy,
    default_hierarchy,
)

EXPECTED_LEVEL2 = (
    "Synchronous",
    "Asynchronous",
    "Cause",
    "Condition",
    "Purpose",
    "Concession",
    "Contrast",
    "Similarity",
    "Conjunction",
    "Equivalence",
    "Instantiation",
    "Level-of-Detail",
    "Manner",
    "Substitution",
)

FALLBACK_SENSES = {"Synchronous", "Contrast", "Similarity", "Conjunction", "Equivalence"}


class TestShape:
    def test_sizes(self):
        assert default_hierarchy().sizes() == (4, 14, 24)

    def test_level1_names(self):
        assert LEVEL1_NAMES == ("Temporal", "Contingency", "Comparison", "Expansion")

    def test_level2_canonical_order(self):
        assert default_hierarchy().names(2) == EXPECTED_LEVEL2

    def test_level3_ordered_by_parent(self):
        """Level-3 senses appear grouped under their level-2 parent, in parent order."""
        h = default_hierarchy()
        parent_indices = [h.sense(2, s.parent.name).index for s in h.level3]
        assert parent_indices == sorted(parent_indices)

    def test_fallback_senses(self):
        h = default_hierarchy()
        assert {s.name for s in h.level3 if s.is_fallback} == FALLBACK_SENSES

    def test_fallback_names_shared_with_level2(self):
        h = default_hierarchy()
        level2 = set(h.names(2))
        for sense in h.level3:
            assert (sense.name in level2) == sense.is_fallback

    def test_every_parent_is_member_of_level_above(self):
        h = default_hierarchy()
        assert all(s.parent.name in LEVEL1_NAMES for s in h.level2)
        assert all(s.parent.name in h.names(2) for s in h.level3)


class TestLookup:
    def test_parent_of(self):
        h = default_hierarchy()
        assert h.parent_of(h.sense(2, "Cause")).name == "Contingency"
        assert h.parent_of(h.sense(3, "Arg2-as-Detail")).name == "Level-of-Detail"

    def test_unknown_sense_named_in_error(self):
        with pytest.raises(LabelSpaceError, match="Volitional-Cause"):
            default_hierarchy().sense(2, "Volitional-Cause")

    def test_coherence(self):
        h = default_hierarchy()
        assert h.is_coherent("Contingency", "Cause")
        assert not h.is_coherent("Temporal", "Cause")

    def test_indices_match_canonical_order(self):
        h = default_hierarchy()
        for level in (1, 2, 3):
            for i, name in enumerate(h.names(level)):
                assert h.index(level, name) == i


class TestSchemaFile:
    def test_round_trip(self):
        h = SenseHierarchy.build_default()
        clone = SenseHierarchy.from_schema_text(h.to_schema_text())
        assert clone.names(2) == h.names(2)
        assert clone.names(3) == h.names(3)
        assert clone.schema_hash() == h.schema_hash()

    def test_packaged_schema_matches_built_default(self):
        assert default_hierarchy().schema_hash() == SenseHierarchy.build_default().schema_hash()

    def test_malformed_schema_rejected(self):
        with pytest.raises(LabelSpaceError):
            SenseHierarchy.from_schema_text("level\tname\n9\tBogus\n")

    def test_build_rejects_parentless_level3(self):
        with pytest.raises(LabelSpaceError, match="Weird-Sense"):
            SenseHierarchy.build(["Reason", "Weird-Sense"])
