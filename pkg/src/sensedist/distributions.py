"""Probability vectors over one level's sense labels."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import NumericError
from .hierarchy import SenseHierarchy

SUM_TOL = 1e-9


@dataclass(frozen=True)
class LabelDistribution:
    """A probability distribution over the canonical labels of one level.

    `values` is indexed by the canonical label order of `level`; entries are
    in [0, 1] and sum to 1 within 1e-9.
    """

    level: int
    values: tuple[float, ...]

    def __post_init__(self):
        arr = np.asarray(self.values, dtype=np.float64)
        if not np.all(np.isfinite(arr)):
            raise NumericError(f"level-{self.level} distribution has non-finite entries")
        if arr.size == 0:
            raise NumericError("empty distribution")
        if arr.min() < -SUM_TOL:
            raise NumericError(
                f"level-{self.level} distribution has negative entry {arr.min()!r}"
            )
        total = float(arr.sum())
        if abs(total - 1.0) > SUM_TOL:
            raise NumericError(
                f"level-{self.level} distribution sums to {total!r}, expected 1"
            )

    def as_array(self) -> np.ndarray:
        return np.asarray(self.values, dtype=np.float64)

    def majority_index(self) -> int:
        return majority_index(self.as_array())

    def check_level_size(self, hierarchy: SenseHierarchy) -> None:
        expected = len(hierarchy.space(self.level))
        if len(self.values) != expected:
            raise NumericError(
                f"level-{self.level} distribution has {len(self.values)} entries, "
                f"label space has {expected}"
            )


def majority_index(values: np.ndarray) -> int:
    """Index of the maximal probability; ties go to the lowest canonical index.

    np.argmax already returns the first maximal index, which is exactly the
    tie-break rule every majority-label consumer shares.
    """
    return int(np.argmax(values))


def majority_label(dist: LabelDistribution, hierarchy: SenseHierarchy) -> str:
    """Name of the highest-probability sense of `dist` under the shared tie-break."""
    dist.check_level_size(hierarchy)
    return hierarchy.names(dist.level)[dist.majority_index()]
