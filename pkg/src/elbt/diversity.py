"""Committee disagreement measures and max-utility input selection.

Numeric committees score an input by the mean absolute deviation of member
predictions around their unweighted mean; label committees score it by the
fraction of members that disagree with the combined prediction. Selection
takes an argmax with seeded uniform tie-breaking, which also covers the
all-equal case.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from typing import Iterable, Sequence

from elbt.rng import derive_seed


class EmptyCandidatesError(Exception):
    """Every candidate was excluded before selection."""


@dataclass(frozen=True)
class UtilityScore:
    input: tuple[int, ...]
    d: float
    provenance: str = ""

    def __post_init__(self):
        if self.d < 0:
            raise ValueError("diversity must be nonnegative")


def mad_diversity(member_preds: Sequence[float]) -> float:
    """Mean absolute deviation of member predictions from their mean.

    The deviations are taken in absolute value; signed deviations would sum
    to zero identically and carry no signal.
    """
    n = len(member_preds)
    if n < 2:
        raise ValueError("diversity needs at least 2 member predictions")
    mu = sum(member_preds) / n
    return sum(abs(p - mu) for p in member_preds) / n


def vote_diversity(member_preds: Sequence, combined) -> float:
    """Fraction of members whose prediction differs from the combined one."""
    n = len(member_preds)
    if n < 2:
        raise ValueError("diversity needs at least 2 member predictions")
    disagreements = sum(1 for p in member_preds if p != combined)
    return disagreements / n


def select_max_utility(
    scores: Sequence[UtilityScore], exclude: Iterable[tuple[int, ...]], seed: int
) -> tuple[int, ...]:
    """An input attaining maximal diversity among non-excluded candidates.

    Ties (including the everything-equal case) break uniformly at random
    under the given seed; excluded inputs are never returned.
    """
    excluded = set(exclude)
    candidates = [s for s in scores if s.input not in excluded]
    if not candidates:
        raise EmptyCandidatesError("no candidates remain after exclusion")
    best = max(s.d for s in candidates)
    ties = [s.input for s in candidates if s.d == best]
    rng = random.Random(derive_seed(seed, "tie-break"))
    return ties[rng.randrange(len(ties))]
