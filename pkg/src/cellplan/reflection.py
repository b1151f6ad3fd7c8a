"""Threshold-triggered revision of placed layouts.

Each structure aspect whose score drops below its threshold contributes a fixed
instruction to a revision prompt; a colored sketch of the current layout can be
attached for vision-capable revisers. ``reflect_loop`` runs score, trigger and
revise until nothing triggers or the round budget is spent.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Callable, Iterable, Mapping, Sequence

from .metrics import DEFAULT_CONSTANTS, MetricConstants, ScoreReport, evaluate
from .model import Layout, dumps
from .prompts import reflection_prompt
from .ranker import DEFAULT_WEIGHTS, WeightProfile
from .sketch import SketchDoc, rasterize, render_sketch

STRUCTURE_WEIGHTS = DEFAULT_WEIGHTS.structure_stage()

# (aspect, direction) -> instruction; direction is None for undirected aspects
INSTRUCTIONS: Mapping[tuple[str, str | None], str] = {
    ("fullness", None): "This spreadsheet is with much empty space. Consider redistribute the elements to minimize empty space.",
    ("overlap", None): "This spreadsheet has overlapping components. Consider moving the components to avoid overlapping",
    ("alignment", "h"): "The horizontal alignment of components is not good. Consider align the top of the components",
    ("alignment", "v"): "The vertical alignment of components is not good. Consider align the left of the components",
    ("t_alignment", "h"): "The type-specific horizontal alignment of components is not good. Consider align the top of the components according to their types",
    ("t_alignment", "v"): "The type-specific vertical alignment of components is not good. Consider align the left of the components according to their types",
    ("r_alignment", "h"): "The relation-specific horizontal alignment of components is not good. Consider align the top of the components according to their relations",
    ("r_alignment", "v"): "The relation-specific vertical alignment of components is not good. Consider align the left of the components according to their relations",
    ("balance", "h"): "The horizontal balance of components is not good. Consider distribute the components horizontally",
    ("balance", "v"): "The vertical balance of components is not good. Consider distribute the components vertically",
}

# score-report field for each catalog key
_REPORT_FIELD = {
    ("fullness", None): "fullness",
    ("overlap", None): "overlap",
    ("alignment", "h"): "align_h",
    ("alignment", "v"): "align_v",
    ("t_alignment", "h"): "t_align_h",
    ("t_alignment", "v"): "t_align_v",
    ("r_alignment", "h"): "r_align_h",
    ("r_alignment", "v"): "r_align_v",
    ("balance", "h"): "balance_h",
    ("balance", "v"): "balance_v",
}


class ReflectionError(RuntimeError):
    """A reviser failed; ``round`` is the 1-based round it failed in."""

    def __init__(self, round: int, cause: BaseException):
        super().__init__(f"reflection round {round} failed: {type(cause).__name__}: {cause}")
        self.round = round


@dataclass(frozen=True)
class ThresholdProfile:
    fullness: float = 0.5
    overlap: float = 0.0
    alignment: float = 0.5
    t_alignment: float = 0.5
    r_alignment: float = 0.5
    balance: float = 0.5

    def __post_init__(self) -> None:
        for name in ("fullness", "alignment", "t_alignment", "r_alignment", "balance"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise ValueError(f"threshold {name} must lie in [0, 1], got {v}")
        if self.overlap > 0:
            raise ValueError(f"overlap threshold must be <= 0, got {self.overlap}")

    @classmethod
    def uniform(cls, t: float, overlap: float = 0.0) -> ThresholdProfile:
        """Same threshold ``t`` for every aspect except overlap."""
        return cls(t, overlap, t, t, t, t)


SWEEP_PRESETS = {t: ThresholdProfile.uniform(t) for t in (0.3, 0.5, 0.7)}


def triggers(report: ScoreReport, th: ThresholdProfile = ThresholdProfile()) -> list[str]:
    """Catalog instructions for every aspect scoring strictly below its threshold.
    Any overlap (score < 0) triggers regardless of the overlap threshold."""
    out = []
    for key, text in INSTRUCTIONS.items():
        score = getattr(report, _REPORT_FIELD[key])
        limit = getattr(th, key[0])
        if score < limit or (key[0] == "overlap" and score < 0):
            out.append(text)
    return out


@dataclass(frozen=True)
class ReflectionPlan:
    triggered: tuple[str, ...]
    sketch: SketchDoc | None = None
    prompt: str = ""

    @property
    def skipped(self) -> bool:
        return not self.triggered


@dataclass(frozen=True)
class RevisionPayload:
    """Prompt text plus zero or one PNG sketch."""

    text: str
    images: tuple[bytes, ...] = ()


def plan_reflection(
    layout: Layout,
    th: ThresholdProfile = ThresholdProfile(),
    report: ScoreReport | None = None,
    include_vision: bool = True,
    c: MetricConstants = DEFAULT_CONSTANTS,
) -> ReflectionPlan:
    report = report or evaluate(layout, None, c, STRUCTURE_WEIGHTS)
    triggered = tuple(triggers(report, th))
    if not triggered:
        return ReflectionPlan(())
    sketch = render_sketch(layout) if include_vision else None
    return ReflectionPlan(triggered, sketch, reflection_prompt(triggered, dumps(layout)))


def build_revision_prompt(
    layout: Layout, plan: ReflectionPlan, include_vision: bool = True, cell_px: int = 25
) -> RevisionPayload:
    """General placement instructions, the triggered instructions and the layout
    JSON, with a rasterized sketch attached when ``include_vision``."""
    if plan.skipped:
        raise ValueError("nothing triggered; the reflection step should be skipped")
    text = reflection_prompt(plan.triggered, dumps(layout))
    if not include_vision:
        return RevisionPayload(text)
    sketch = plan.sketch or render_sketch(layout)
    return RevisionPayload(text, (rasterize(sketch, cell_px),))


Reviser = Callable[[Layout, ReflectionPlan], Layout]


@dataclass(frozen=True)
class RoundRecord:
    round: int
    triggered: tuple[str, ...]
    total_before: float
    total_after: float


@dataclass(frozen=True)
class ReflectionTrace:
    layout: Layout
    invocations: int
    rounds: tuple[RoundRecord, ...] = field(default_factory=tuple)
    initial_total: float = 0.0
    final_total: float = 0.0


def reflect_trace(
    layout: Layout,
    reviser: Reviser,
    th: ThresholdProfile = ThresholdProfile(),
    max_rounds: int = 1,
    *,
    relations: Iterable[tuple[str, str]] | None = None,
    include_vision: bool = True,
    weights: WeightProfile = STRUCTURE_WEIGHTS,
    c: MetricConstants = DEFAULT_CONSTANTS,
) -> ReflectionTrace:
    """Like :func:`reflect_loop`, also reporting reviser invocations per round."""
    if max_rounds < 0:
        raise ValueError("max_rounds must be >= 0")
    rels: Sequence[tuple[str, str]] | None = None if relations is None else list(relations)

    def score(lay: Layout) -> ScoreReport:
        return evaluate(lay, rels, c, weights)

    current, report = layout, score(layout)
    initial = report.weighted_total
    best, best_total = current, report.weighted_total
    records: list[RoundRecord] = []
    for i in range(1, max_rounds + 1):
        plan = plan_reflection(current, th, report, include_vision, c)
        if plan.skipped:
            break
        try:
            revised = reviser(current, plan)
        except Exception as exc:
            raise ReflectionError(i, exc) from exc
        new_report = score(revised)
        records.append(RoundRecord(i, plan.triggered, report.weighted_total, new_report.weighted_total))
        current, report = revised, new_report
        if report.weighted_total > best_total:
            best, best_total = current, report.weighted_total
    return ReflectionTrace(best, len(records), tuple(records), initial, best_total)


def reflect_loop(
    layout: Layout,
    reviser: Reviser,
    th: ThresholdProfile = ThresholdProfile(),
    max_rounds: int = 1,
    **kwargs,
) -> Layout:
    """Best-scoring layout seen across the rounds (never worse than ``layout``)."""
    return reflect_trace(layout, reviser, th, max_rounds, **kwargs).layout


def search_reviser(iterations: int = 300, seed: int = 0) -> Reviser:
    """Offline reviser: local search that up-weights the triggered aspects.

    It stands in for a model-backed reviser when no provider is available.
    """
    from .placer import PlacementConfig, improve_layout

    by_text = {text: key for key, text in INSTRUCTIONS.items()}

    def revise(layout: Layout, plan: ReflectionPlan) -> Layout:
        boost = {}
        for text in plan.triggered:
            name = _REPORT_FIELD[by_text[text]]
            boost[name] = getattr(STRUCTURE_WEIGHTS, name) * 2.0
        cfg = PlacementConfig(seed=seed, iterations=iterations, weights=replace(STRUCTURE_WEIGHTS, **boost))
        return improve_layout(layout, cfg)

    return revise
