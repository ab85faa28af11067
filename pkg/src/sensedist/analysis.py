"""Analysis utilities: random baseline, top-k agreement, coherence.

The random baseline replaces the model with draws from the training
split's label frequencies: for each instance, several label draws from
the per-level mean distribution are averaged into a frequency vector,
which is then scored exactly like a model prediction.

Top-k agreement asks whether a reference sense appears among the k most
probable senses of a predicted distribution, ranking by descending
probability with ties broken by canonical index.

The coherence report checks whether the independently predicted level-1
and level-2 senses of each instance sit on the same hierarchy branch.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from .corpus import RelationInstance
from .distributions import LabelDistribution
from .errors import ConfigError, DataError
from .hierarchy import SenseHierarchy

DEFAULT_BASELINE_DRAWS = 10
AGREEMENT_KS = (1, 3, 5, 10)


def mean_marginals(
    instances: Sequence[RelationInstance], hierarchy: SenseHierarchy
) -> dict[int, np.ndarray]:
    """Per-level mean of the instances' target distributions."""
    if not instances:
        raise DataError("cannot compute marginals over zero instances")
    out: dict[int, np.ndarray] = {}
    for level in (1, 2, 3):
        stack = np.stack([inst.dist(level).as_array() for inst in instances])
        out[level] = stack.mean(axis=0)
    return out


def random_baseline(
    marginals: Mapping[int, np.ndarray],
    n_instances: int,
    n_draws: int = DEFAULT_BASELINE_DRAWS,
    seed: int = 0,
) -> dict[int, np.ndarray]:
    """Frequency-vector predictions from label draws, one row per instance.

    Each instance receives `n_draws` independent label draws from the
    level's marginal distribution; the prediction is the frequency vector
    of those draws. Rows therefore sum to 1 and take values in multiples
    of 1/n_draws.
    """
    if n_instances <= 0:
        raise DataError(f"need a positive instance count, got {n_instances}")
    if n_draws <= 0:
        raise ConfigError(f"need a positive draw count, got {n_draws}")
    rng = np.random.default_rng(seed)
    out: dict[int, np.ndarray] = {}
    for level in sorted(marginals):
        probs = np.asarray(marginals[level], dtype=np.float64)
        if abs(probs.sum() - 1.0) > 1e-6 or probs.min() < 0:
            raise DataError(f"level-{level} marginal is not a distribution")
        probs = probs / probs.sum()
        c = probs.size
        draws = rng.choice(c, size=(n_instances, n_draws), p=probs)
        freq = np.zeros((n_instances, c), dtype=np.float64)
        for label in range(c):
            freq[:, label] = (draws == label).sum(axis=1)
        out[level] = freq / n_draws
    return out


def top_k_senses(dist: LabelDistribution, k: int, hierarchy: SenseHierarchy) -> list[str]:
    """The k most probable senses, ranked by (probability desc, canonical index)."""
    if k <= 0:
        raise ConfigError(f"k must be positive, got {k}")
    dist.check_level_size(hierarchy)
    names = hierarchy.names(dist.level)
    order = sorted(range(len(names)), key=lambda i: (-dist.values[i], i))
    return [names[i] for i in order[:k]]


def topk_agreement(
    reference: str, dist: LabelDistribution, k: int, hierarchy: SenseHierarchy
) -> bool:
    """True iff the reference sense is among the top k predicted senses."""
    hierarchy.sense(dist.level, reference)  # validates membership
    return reference in top_k_senses(dist, k, hierarchy)


@dataclass(frozen=True)
class AgreementReport:
    """How often a reference sense appears in the predictions' top k."""

    level: int
    total: int
    counts: dict[int, int]  # k -> matches

    def percentage(self, k: int) -> float:
        return 100.0 * self.counts[k] / self.total

    def to_dict(self) -> dict:
        return {
            "level": self.level,
            "total": self.total,
            "counts": dict(self.counts),
            "percentages": {k: self.percentage(k) for k in self.counts},
        }


def agreement_report(
    references: Sequence[str],
    dists: Sequence[LabelDistribution],
    hierarchy: SenseHierarchy,
    ks: Sequence[int] = AGREEMENT_KS,
) -> AgreementReport:
    if len(references) != len(dists):
        raise DataError(
            f"{len(references)} references for {len(dists)} distributions"
        )
    if not references:
        raise DataError("cannot report agreement over zero instances")
    levels = {d.level for d in dists}
    if len(levels) != 1:
        raise DataError(f"distributions mix levels: {sorted(levels)}")
    counts = {
        k: sum(
            topk_agreement(ref, dist, k, hierarchy)
            for ref, dist in zip(references, dists)
        )
        for k in ks
    }
    return AgreementReport(level=levels.pop(), total=len(references), counts=counts)


@dataclass(frozen=True)
class CoherenceCell:
    """Coherence outcome for one sense."""

    predicted: int  # times the sense was predicted
    coherent: int  # times its pair sat on the same branch

    @property
    def percentage(self) -> float | None:
        """None when the sense was never predicted (rendered n/a, not 0)."""
        if self.predicted == 0:
            return None
        return 100.0 * self.coherent / self.predicted


@dataclass(frozen=True)
class CoherenceReport:
    """Branch agreement between paired level-1 and level-2 predictions."""

    level1: dict[str, CoherenceCell]
    level2: dict[str, CoherenceCell]
    total: int
    total_coherent: int

    @property
    def overall_percentage(self) -> float:
        return 100.0 * self.total_coherent / self.total

    def to_dict(self) -> dict:
        def cells(d):
            return {
                name: {
                    "predicted": cell.predicted,
                    "coherent": cell.coherent,
                    "percentage": cell.percentage,
                }
                for name, cell in d.items()
            }

        return {
            "total": self.total,
            "total_coherent": self.total_coherent,
            "overall_percentage": self.overall_percentage,
            "level1": cells(self.level1),
            "level2": cells(self.level2),
        }


def coherence_report(
    pred1: Sequence[str], pred2: Sequence[str], hierarchy: SenseHierarchy
) -> CoherenceReport:
    """Tabulate, per sense, how often the paired prediction is on-branch."""
    if len(pred1) != len(pred2):
        raise DataError(
            f"{len(pred1)} level-1 predictions for {len(pred2)} level-2 predictions"
        )
    if not pred1:
        raise DataError("cannot report coherence over zero instances")
    counts1 = {name: [0, 0] for name in hierarchy.names(1)}  # predicted, coherent
    counts2 = {name: [0, 0] for name in hierarchy.names(2)}
    total_coherent = 0
    for l1, l2 in zip(pred1, pred2):
        coherent = hierarchy.is_coherent(l1, l2)  # validates both names
        counts1[l1][0] += 1
        counts2[l2][0] += 1
        if coherent:
            counts1[l1][1] += 1
            counts2[l2][1] += 1
            total_coherent += 1
    return CoherenceReport(
        level1={n: CoherenceCell(p, c) for n, (p, c) in counts1.items()},
        level2={n: CoherenceCell(p, c) for n, (p, c) in counts2.items()},
        total=len(pred1),
        total_coherent=total_coherent,
    )
