"""End-to-end run: pre-process, place, reflect, populate, score."""

from __future__ import annotations

import random
import time
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Any, Sequence

from .llm import Bridge, ExemplarStore, HeuristicProvider, HttpProvider, Provider, Transcript, heuristic_preprocess
from .metrics import ScoreReport, evaluate
from .model import Layout, ProcessedSheet, RawComponent
from .placer import PlacementConfig, PlacementError, generate_candidates, heuristic_generator, random_generator
from .populator import populate as heuristic_populate
from .ranker import DEFAULT_WEIGHTS, rank
from .reflection import ReflectionPlan, ThresholdProfile, reflect_trace, search_reviser

GENERATORS = ("heuristic", "random", "llm")
STRUCTURE = DEFAULT_WEIGHTS.structure_stage()


class StageError(RuntimeError):
    """Failure inside a named pipeline stage; the original error is ``__cause__``."""

    def __init__(self, stage: str, cause: BaseException):
        super().__init__(f"stage {stage!r} failed: {type(cause).__name__}: {cause}")
        self.stage = stage
        self.cause = cause


@dataclass(frozen=True)
class PipelineConfig:
    seed: int = 0
    generator: str = "heuristic"
    n_place: int = 3
    n_populate: int = 3
    reflect: bool = True
    thresholds: ThresholdProfile = ThresholdProfile()
    max_rounds: int = 1
    include_vision: bool = True
    revise_iterations: int = 300

    def __post_init__(self) -> None:
        if self.generator not in GENERATORS:
            raise ValueError(f"unknown generator {self.generator!r}; expected one of {GENERATORS}")
        if self.n_place < 1 or self.n_populate < 1:
            raise ValueError("candidate counts must be >= 1")


@dataclass
class RunManifest:
    """Everything needed to replay a run. Timings are informational and are
    the only field that varies between identical reruns."""

    seed: int
    generator: str
    provider: dict[str, Any]
    thresholds: dict[str, float]
    n_place: int
    n_populate: int
    reflect: bool
    max_rounds: int
    vision: bool
    input: str = ""
    reflection_rounds: int = 0
    place_errors: list[str] = field(default_factory=list)
    tokens: dict[str, int] = field(default_factory=dict)
    timings_s: dict[str, float] = field(default_factory=dict)

    def to_dict(self) -> dict[str, Any]:
        return asdict(self)


@dataclass(frozen=True)
class PipelineResult:
    sheet: ProcessedSheet
    placed: Layout
    reflected: Layout
    layout: Layout
    report: ScoreReport
    manifest: RunManifest


def provider_info(provider: Provider | None) -> dict[str, Any]:
    if provider is None:
        return {"name": "none"}
    info: dict[str, Any] = {"name": provider.name, "vision_capable": provider.vision_capable}
    if isinstance(provider, HttpProvider):
        info["config"] = provider.config.to_dict()  # holds the env-var name only, never the secret
    return info


def _merge_relations(sheet: ProcessedSheet, hint: Sequence[tuple[str, str]]) -> ProcessedSheet:
    ids = {c.id for c in sheet.components}
    rels = list(sheet.relations)
    for a, b in hint:
        if a in ids and b in ids and a != b and (a, b) not in rels and (b, a) not in rels:
            rels.append((a, b))
    return ProcessedSheet(sheet.components, sheet.topic, tuple(rels))


def run_pipeline(
    raw: Sequence[RawComponent],
    cfg: PipelineConfig = PipelineConfig(),
    provider: Provider | None = None,
    *,
    relations_hint: Sequence[tuple[str, str]] = (),
    transcript: Transcript | None = None,
    exemplars: ExemplarStore | None = None,
    input_name: str = "",
) -> PipelineResult:
    if cfg.generator == "llm" and provider is None:
        provider = HeuristicProvider()
    bridge = Bridge(provider, transcript=transcript) if provider is not None else None
    vision = cfg.include_vision and (provider is None or provider.vision_capable)
    manifest = RunManifest(
        seed=cfg.seed,
        generator=cfg.generator,
        provider=provider_info(provider),
        thresholds=asdict(cfg.thresholds),
        n_place=cfg.n_place,
        n_populate=cfg.n_populate,
        reflect=cfg.reflect,
        max_rounds=cfg.max_rounds,
        vision=vision,
        input=input_name,
    )

    def stage(name: str, fn):
        t0 = time.perf_counter()
        try:
            return fn()
        except Exception as exc:
            raise StageError(name, exc) from exc
        finally:
            manifest.timings_s[name] = round(time.perf_counter() - t0, 6)

    sheet = stage("preprocess", lambda: bridge.preprocess(raw) if bridge else heuristic_preprocess(raw))
    sheet = _merge_relations(sheet, relations_hint)

    def place() -> Layout:
        if cfg.generator == "llm":
            assert bridge is not None
            rng = random.Random(cfg.seed)
            exemplar = None
            if exemplars is not None and vision:
                path = exemplars.pick(sheet.topic, rng)
                exemplar = Path(path).read_bytes() if path else None
            layouts, errors = [], []
            for i in range(cfg.n_place):
                try:
                    layouts.append(bridge.place(sheet, exemplar, cfg.seed + i))
                except ValueError as exc:
                    errors.append(f"{i}: {exc}")
        else:
            gen = heuristic_generator() if cfg.generator == "heuristic" else random_generator
            batch = generate_candidates(sheet, gen, PlacementConfig(n_candidates=cfg.n_place, seed=cfg.seed))
            layouts, errors = batch.layouts, [f"{i}: {e}" for i, e in batch.errors]
        manifest.place_errors = errors
        if not layouts:
            raise PlacementError(f"no valid placement candidate ({'; '.join(errors)})")
        reports = [evaluate(lay, None, weights=STRUCTURE) for lay in layouts]
        return layouts[rank(reports, STRUCTURE)]

    placed = stage("structure", place)

    def reflect() -> Layout:
        if not cfg.reflect:
            return placed
        if cfg.generator == "llm":
            assert bridge is not None

            def reviser(layout: Layout, plan: ReflectionPlan) -> Layout:
                return bridge.revise(layout, plan, vision, cfg.seed)

        else:
            reviser = search_reviser(cfg.revise_iterations, cfg.seed)
        trace = reflect_trace(placed, reviser, cfg.thresholds, cfg.max_rounds, include_vision=vision)
        manifest.reflection_rounds = trace.invocations
        return trace.layout

    reflected = stage("revise", reflect)

    def content() -> Layout:
        if cfg.generator == "llm":
            assert bridge is not None
            cands = [bridge.populate(reflected, 1) for _ in range(cfg.n_populate)]
            return cands[rank([evaluate(c) for c in cands])]
        return heuristic_populate(reflected, cfg.n_populate)

    final = stage("content", content)
    report = evaluate(final)
    if bridge is not None:
        manifest.tokens = bridge.ledger.totals()
    return PipelineResult(sheet, placed, reflected, final, report, manifest)
