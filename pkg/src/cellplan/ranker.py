"""Weighted aggregation of score reports and best-candidate selection."""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Sequence, Union

from .metrics import ScoreReport
from .model import Layout


@dataclass(frozen=True)
class WeightProfile:
    """Per-aspect weights. Directional aspects split their weight over h and v."""

    fullness: float = 1.0
    compat_h: float = 0.5
    compat_v: float = 0.5
    align_h: float = 0.5
    align_v: float = 0.5
    t_align_h: float = 0.5
    t_align_v: float = 0.5
    r_align_h: float = 0.5
    r_align_v: float = 0.5
    balance_h: float = 0.5
    balance_v: float = 0.5
    overlap: float = 1.0

    def __post_init__(self) -> None:
        for name, value in self.items():
            if value < 0:
                raise ValueError(f"weight {name} must be >= 0, got {value}")

    def items(self) -> list[tuple[str, float]]:
        return [(name, getattr(self, name)) for name in _FIELDS]

    def scaled(self, factor: float) -> WeightProfile:
        return WeightProfile(**{name: w * factor for name, w in self.items()})

    def structure_stage(self) -> WeightProfile:
        """Compatibility is unavailable before population and gets weight 0."""
        return replace(self, compat_h=0.0, compat_v=0.0)

    def max_total(self) -> float:
        return sum(w for name, w in self.items() if name != "overlap")


_FIELDS = (
    "fullness",
    "compat_h",
    "compat_v",
    "align_h",
    "align_v",
    "t_align_h",
    "t_align_v",
    "r_align_h",
    "r_align_v",
    "balance_h",
    "balance_v",
    "overlap",
)

DEFAULT_WEIGHTS = WeightProfile()


def weighted_total(r: ScoreReport, w: WeightProfile = DEFAULT_WEIGHTS) -> float:
    """Sum of weight * score. A missing compatibility score contributes nothing."""
    total = 0.0
    for name, weight in w.items():
        score = getattr(r, name)
        if score is None:
            continue
        total += weight * score
    return total


Candidate = Union[ScoreReport, "tuple[Layout, ScoreReport]"]


def rank(candidates: Sequence[Candidate], w: WeightProfile = DEFAULT_WEIGHTS) -> int:
    """Index of the best candidate; ties go to the earliest one."""
    if not candidates:
        raise ValueError("rank() needs at least one candidate")
    best_i, best = 0, float("-inf")
    for i, cand in enumerate(candidates):
        report = cand if isinstance(cand, ScoreReport) else cand[1]
        total = weighted_total(report, w)
        if total > best:
            best_i, best = i, total
    return best_i
