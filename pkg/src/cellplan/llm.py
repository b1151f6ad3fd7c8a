"""Chat-model bridge for the generation pipeline.

Providers implement ``complete(ChatRequest) -> ChatResponse``. ``HttpProvider``
talks to a generic JSON chat-completion endpoint; ``MockProvider`` replays
scripted answers and ``HeuristicProvider`` answers every stage offline with the
deterministic placer, reviser and populator. ``Bridge`` assembles prompts,
validates answers (one re-ask on failure), counts tokens per stage and writes
JSON-lines transcripts.
"""

from __future__ import annotations

import base64
import json
import math
import os
import random
import re
import threading
import time
import urllib.error
import urllib.request
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path
from typing import Any, Callable, Iterable, Mapping, Protocol, Sequence

from .grid import parse_range
from .model import (
    ComponentType,
    Layout,
    PlacedComponent,
    ProcessedComponent,
    ProcessedSheet,
    RawComponent,
    SheetLoadError,
    Topic,
    dumps,
    layout_to_dict,
    load_layout,
    sheet_to_dict,
)
from .placer import ResizePolicy, layout_violations
from .prompts import classify_prompt, placement_prompt, population_prompt, reflection_prompt, relations_prompt
from .reflection import ReflectionPlan

# pipeline stages and their token-table column labels
STAGES: dict[str, str] = {
    "preprocess": "Pre-Process",
    "structure": "Structure",
    "revise": "Revise",
    "content": "Content",
}


class ProviderError(RuntimeError):
    """Transport or provider-side failure."""


class CapabilityError(ProviderError):
    """The request needs a capability (vision) the provider lacks."""


class ResponseError(ValueError):
    """A model answer could not be parsed or failed validation."""

    def __init__(self, message: str, diagnostics: Sequence[str] = ()):
        super().__init__(message if not diagnostics else f"{message}: " + "; ".join(diagnostics))
        self.diagnostics = tuple(diagnostics)


@dataclass(frozen=True)
class ChatMessage:
    role: str
    content: str


@dataclass(frozen=True)
class ChatRequest:
    """``context`` carries structured inputs for offline providers; it is never
    sent over the network."""

    stage: str
    messages: tuple[ChatMessage, ...]
    images: tuple[bytes, ...] = ()
    max_tokens: int = 16384
    top_p: float = 0.95
    temperature: float = 0.7
    structured: bool = True
    context: Mapping[str, Any] = field(default_factory=dict, compare=False, repr=False)

    def __post_init__(self) -> None:
        if not self.messages:
            raise ValueError("a chat request needs at least one message")
        if self.stage not in STAGES:
            raise ValueError(f"unknown stage {self.stage!r}; expected one of {list(STAGES)}")

    @property
    def text(self) -> str:
        return "\n".join(m.content for m in self.messages)


@dataclass(frozen=True)
class ChatResponse:
    text: str
    prompt_tokens: int
    completion_tokens: int


def count_tokens(text: str) -> int:
    """Rough token estimate (4 characters per token) for providers without usage data."""
    return math.ceil(len(text) / 4)


class Provider(Protocol):
    name: str
    vision_capable: bool

    def complete(self, request: ChatRequest) -> ChatResponse: ...


# ---------------------------------------------------------------------------
# HTTP provider
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ProviderConfig:
    """Endpoint settings. The secret itself is read from ``token_env`` at call
    time and never stored on the config or serialized."""

    endpoint: str
    model: str
    token_env: str = "CELLPLAN_API_KEY"
    vision_capable: bool = True
    max_retries: int = 3
    backoff_s: float = 1.0
    timeout_s: float = 120.0
    max_in_flight: int = 4

    def __post_init__(self) -> None:
        if self.max_retries < 0 or self.backoff_s < 0 or self.max_in_flight < 1:
            raise ValueError("invalid retry/concurrency settings")

    def token(self) -> str | None:
        return os.environ.get(self.token_env)

    def to_dict(self) -> dict[str, Any]:
        return asdict(self)

    @classmethod
    def from_file(cls, path: str | Path) -> ProviderConfig:
        obj = json.loads(Path(path).read_text(encoding="utf-8"))
        leaked = [k for k in obj if re.search(r"key|secret|password|^token$", k, re.I)]
        if leaked:
            raise ValueError(f"secrets must come from the environment, not the config file (found {leaked})")
        return cls(**obj)


class HttpProvider:
    name = "http"

    def __init__(self, config: ProviderConfig, opener: Callable[..., Any] = urllib.request.urlopen):
        self.config = config
        self.vision_capable = config.vision_capable
        self._open = opener
        self._sem = threading.BoundedSemaphore(config.max_in_flight)

    def _body(self, req: ChatRequest) -> dict[str, Any]:
        messages: list[dict[str, Any]] = []
        for i, m in enumerate(req.messages):
            if req.images and i == len(req.messages) - 1:
                parts: list[dict[str, Any]] = [{"type": "text", "text": m.content}]
                for img in req.images:
                    url = "data:image/png;base64," + base64.b64encode(img).decode("ascii")
                    parts.append({"type": "image_url", "image_url": {"url": url}})
                messages.append({"role": m.role, "content": parts})
            else:
                messages.append({"role": m.role, "content": m.content})
        body: dict[str, Any] = {
            "model": self.config.model,
            "messages": messages,
            "max_tokens": req.max_tokens,
            "top_p": req.top_p,
            "temperature": req.temperature,
        }
        if req.structured:
            body["response_format"] = {"type": "json_object"}
        return body

    def complete(self, request: ChatRequest) -> ChatResponse:
        if request.images and not self.vision_capable:
            raise CapabilityError("provider is text-only but the request carries images")
        data = json.dumps(self._body(request)).encode("utf-8")
        headers = {"Content-Type": "application/json"}
        token = self.config.token()
        if token:
            headers["Authorization"] = f"Bearer {token}"
        last: Exception | None = None
        with self._sem:
            for attempt in range(self.config.max_retries + 1):
                if attempt:
                    time.sleep(self.config.backoff_s * 2 ** (attempt - 1))
                http_req = urllib.request.Request(self.config.endpoint, data=data, headers=headers, method="POST")
                try:
                    with self._open(http_req, timeout=self.config.timeout_s) as resp:
                        payload = json.loads(resp.read().decode("utf-8"))
                    break
                except urllib.error.HTTPError as exc:
                    last = exc
                    if exc.code != 429 and exc.code < 500:
                        raise ProviderError(f"HTTP {exc.code} from provider") from None
                except (urllib.error.URLError, TimeoutError, ConnectionError) as exc:
                    last = exc
            else:
                raise ProviderError(f"provider unreachable after {self.config.max_retries + 1} attempts: {last}")
        try:
            text = payload["choices"][0]["message"]["content"]
        except (KeyError, IndexError, TypeError) as exc:
            raise ProviderError(f"unexpected provider payload: {exc!r}") from None
        usage = payload.get("usage") or {}
        return ChatResponse(
            text,
            int(usage.get("prompt_tokens", count_tokens(request.text))),
            int(usage.get("completion_tokens", count_tokens(text))),
        )


# ---------------------------------------------------------------------------
# offline providers
# ---------------------------------------------------------------------------


class MockProvider:
    """Replays scripted answers per stage, in order; the last answer of a stage
    repeats once the script runs out. A callable answer receives the request."""

    name = "mock"

    def __init__(
        self,
        script: Mapping[str, Sequence[str | Callable[[ChatRequest], str]]],
        vision_capable: bool = True,
    ):
        self.script = {k: list(v) for k, v in script.items()}
        self.vision_capable = vision_capable
        self.requests: list[ChatRequest] = []
        self._pos: dict[str, int] = {}
        self._lock = threading.Lock()

    def complete(self, request: ChatRequest) -> ChatResponse:
        if request.images and not self.vision_capable:
            raise CapabilityError("provider is text-only but the request carries images")
        with self._lock:
            self.requests.append(request)
            answers = self.script.get(request.stage)
            if not answers:
                raise ProviderError(f"no scripted answer for stage {request.stage!r}")
            i = self._pos.get(request.stage, 0)
            self._pos[request.stage] = i + 1
            answer = answers[min(i, len(answers) - 1)]
        text = answer(request) if callable(answer) else answer
        return ChatResponse(text, count_tokens(request.text), count_tokens(text))


class HeuristicProvider:
    """Deterministic offline twin of a model provider.

    Reads the structured request context and answers with the heuristic
    pre-processor, placer, search reviser and populator, serialized exactly as
    a model answer would be.
    """

    name = "mock"

    def __init__(self, vision_capable: bool = True, revise_iterations: int = 300):
        self.vision_capable = vision_capable
        self.revise_iterations = revise_iterations
        self.calls = 0
        self._lock = threading.Lock()

    def complete(self, request: ChatRequest) -> ChatResponse:
        from .placer import PlacementConfig, heuristic_place
        from .populator import populate
        from .reflection import search_reviser

        if request.images and not self.vision_capable:
            raise CapabilityError("provider is text-only but the request carries images")
        with self._lock:
            self.calls += 1
        ctx = request.context
        kind = ctx.get("kind")
        if kind == "classify":
            sheet = heuristic_preprocess(ctx["raw"])
            out: Any = {
                "topic": sheet.topic.value,
                "components": [{"id": c.id, "type": c.type.value, "description": c.description} for c in sheet.components],
            }
        elif kind == "relations":
            out = [list(p) for p in heuristic_relations(ctx["sheet"])]
        elif kind == "structure":
            lay = heuristic_place(ctx["sheet"], PlacementConfig(seed=ctx.get("seed", 0)))
            out = _locations_only(lay)
        elif kind == "revise":
            revised = search_reviser(self.revise_iterations, ctx.get("seed", 0))(ctx["layout"], ctx["plan"])
            out = _locations_only(revised)
        elif kind == "content":
            out = layout_to_dict(populate(ctx["layout"], ctx.get("n_candidates", 1)))
        else:
            raise ProviderError(f"heuristic provider cannot answer request kind {kind!r}")
        text = json.dumps(out, sort_keys=True)
        return ChatResponse(text, count_tokens(request.text), count_tokens(text))


def _locations_only(layout: Layout) -> dict[str, Any]:
    return {"components": [{"id": c.id, "type": c.type.value, "location": c.rect.to_list()} for c in layout.components]}


# ---------------------------------------------------------------------------
# heuristic pre-processing
# ---------------------------------------------------------------------------

_TOPIC_KEYWORDS: dict[Topic, tuple[str, ...]] = {
    Topic.FINANCIAL: ("budget", "revenue", "expense", "forecast", "profit", "invoice"),
    Topic.DATA_LOGS: ("log", "task log", "record"),
    Topic.STAFF_SCHEDULING: ("shift", "roster", "staff"),
    Topic.KPI_DASHBOARDS: ("kpi", "dashboard", "performance"),
    Topic.EVENT_PLANNING: ("event", "venue", "guest"),
    Topic.INVENTORY: ("inventory", "asset", "stock"),
    Topic.REPORT_TRACKING: ("publication", "report tracker"),
    Topic.MAINTENANCE: ("maintenance",),
    Topic.MARKETING: ("campaign", "marketing"),
    Topic.PROJECT_SCHEDULING: ("project", "timeline", "milestone"),
    Topic.TODO_CALENDARS: ("to-do", "todo", "calendar"),
    Topic.TRAVEL: ("travel", "itinerary", "flight"),
    Topic.GOAL_TRACKING: ("habit", "goal"),
}

_SUMMARY_LABELS = {"total", "average", "sum", "mean", "maximum", "minimum", "count", "subtotal"}


def _guess_type(raw: RawComponent, largest_id: str | None) -> ComponentType:
    if raw.type is not None:
        return raw.type
    if not raw.data:
        return ComponentType.CHART
    rows, cols = len(raw.data), len(raw.data[0])
    filled = [v for row in raw.data for v in row if v.strip()]
    if rows == 1 and len(filled) <= 1:
        return ComponentType.TITLE
    if raw.id == largest_id:
        return ComponentType.MAIN_TABLE
    if {row[0].strip().lower() for row in raw.data} & _SUMMARY_LABELS:
        return ComponentType.SUMMARY_DATA
    if cols == 2 and rows <= 8:
        return ComponentType.META_DATA
    return ComponentType.MAIN_TABLE


def _guess_topic(comps: Iterable[RawComponent]) -> Topic:
    text = " ".join([c.description for c in comps] + [v for c in comps for row in c.data[:2] for v in row]).lower()
    best, hits = Topic.DATA_LOGS, 0
    for topic, words in _TOPIC_KEYWORDS.items():
        n = sum(text.count(w) for w in words)
        if n > hits:
            best, hits = topic, n
    return best


def heuristic_preprocess(raw: Sequence[RawComponent]) -> ProcessedSheet:
    """Offline pre-processing: data-shape typing, keyword topic, no relations.

    A 1xN component with at most one filled cell is a title, the largest
    table (by cell count) the main table, a data-less component a chart.
    """
    if not raw:
        raise ValueError("sheet has no components")
    typed = [r for r in raw if r.data and r.type is None]
    largest = max(typed, key=lambda r: (len(r.data) * len(r.data[0]), len(r.data)), default=None)
    if any(r.type is ComponentType.MAIN_TABLE for r in raw):
        largest = None
    comps = []
    for r in raw:
        ctype = _guess_type(r, largest.id if largest else None)
        desc = r.description or f"{ctype.value.replace('_', ' ')} {r.id}"
        comps.append(ProcessedComponent(r.id, ctype, r.natural_size, desc, r.data))
    return ProcessedSheet(tuple(comps), _guess_topic(raw), ())


def heuristic_relations(sheet: ProcessedSheet) -> list[tuple[str, str]]:
    """Every summary and chart belongs to the largest main table."""
    mains = [c for c in sheet.components if c.type is ComponentType.MAIN_TABLE]
    if not mains:
        return []
    anchor = max(mains, key=lambda c: c.natural_size[0] * c.natural_size[1])
    return [(anchor.id, c.id) for c in sheet.components if c.type in (ComponentType.SUMMARY_DATA, ComponentType.CHART)]


# ---------------------------------------------------------------------------
# answer parsing
# ---------------------------------------------------------------------------


def extract_json(text: str) -> Any:
    """First JSON value in ``text``, tolerating code fences and surrounding prose."""
    fenced = re.search(r"```(?:json)?\s*(.*?)```", text, re.S)
    body = fenced.group(1) if fenced else text
    starts = [i for i in (body.find("{"), body.find("[")) if i >= 0]
    if not starts:
        raise ResponseError("answer contains no JSON")
    try:
        value, _ = json.JSONDecoder().raw_decode(body[min(starts):])
    except json.JSONDecodeError as exc:
        raise ResponseError(f"answer is not valid JSON ({exc})") from None
    return value


def _entries(obj: Any) -> list[tuple[dict[str, Any], str | None]]:
    """Component entries from either ``{"components": [...]}`` or per-type lists."""
    if isinstance(obj, dict) and isinstance(obj.get("components"), list):
        return [(e, None) for e in obj["components"]]
    if isinstance(obj, dict):
        out = []
        for key, value in obj.items():
            if isinstance(value, list):
                try:
                    ctype = ComponentType.parse(key).value
                except SheetLoadError:
                    continue
                out += [(e, ctype) for e in value]
        if out:
            return out
    raise ResponseError("answer lists no components")


def parse_layout_response(
    text: str, sheet: ProcessedSheet, policy: ResizePolicy = ResizePolicy()
) -> Layout:
    """Locations from a placement or revision answer, attached to ``sheet``.

    Missing, unknown or duplicated components and inadmissible resizes reject
    the answer; overlaps are accepted (they are scored, not forbidden).
    """
    entries = _entries(extract_json(text))
    known = {c.id: c for c in sheet.components}
    problems: list[str] = []
    rects = {}
    for entry, _ in entries:
        if not isinstance(entry, dict) or not isinstance(entry.get("id"), str):
            problems.append(f"malformed entry {entry!r}")
            continue
        cid = entry["id"]
        if cid not in known:
            problems.append(f"unknown component {cid!r}")
        elif cid in rects:
            problems.append(f"duplicated component {cid!r}")
        else:
            try:
                rects[cid] = parse_range(entry.get("location"))
            except (ValueError, TypeError) as exc:
                problems.append(f"{cid}: bad location ({exc})")
    missing = [cid for cid in known if cid not in rects]
    if missing:
        problems.append(f"missing components {missing}")
    if problems:
        raise ResponseError("invalid layout answer", problems)
    comps = tuple(
        PlacedComponent(c.id, c.type, rects[c.id], c.data, None, c.description, c.natural_size) for c in sheet.components
    )
    layout = Layout(comps, None, sheet.relations, sheet.topic)
    violations = layout_violations(layout, policy)
    if violations:
        raise ResponseError("resize rules violated", [str(v) for v in violations])
    return layout


def parse_population_response(text: str, layout: Layout) -> Layout:
    """Populated layout: positions must be unchanged and a grid block present."""
    obj = extract_json(text)
    if not isinstance(obj, dict) or "grid" not in obj:
        raise ResponseError("population answer has no grid block")
    try:
        answer = load_layout(obj)
    except SheetLoadError as exc:
        raise ResponseError(f"population answer fails the layout schema: {exc}") from None
    by_id = {c.id: c for c in answer.components}
    problems = []
    comps = []
    for c in layout.components:
        a = by_id.get(c.id)
        if a is None:
            problems.append(f"missing component {c.id!r}")
            continue
        if a.rect != c.rect:
            problems.append(f"{c.id} moved from {c.rect.to_a1()} to {a.rect.to_a1()}")
        fdata = a.formatted_data if a.formatted_data is not None else (a.data or None)
        if c.data and fdata is not None and (len(fdata), len(fdata[0])) != (len(c.data), len(c.data[0])):
            problems.append(f"{c.id}: content shape changed")
        comps.append(replace(c, formatted_data=fdata if c.data else None))
    if problems:
        raise ResponseError("invalid population answer", problems)
    assert answer.grid is not None
    return replace(layout, components=tuple(comps), grid=answer.grid)


def parse_classification(text: str, raw: Sequence[RawComponent]) -> tuple[Topic, dict[str, tuple[ComponentType, str]]]:
    obj = extract_json(text)
    if not isinstance(obj, dict):
        raise ResponseError("classification answer must be an object")
    try:
        topic = Topic.parse(obj.get("topic", ""))
        out = {}
        for e in obj.get("components", []):
            out[e["id"]] = (ComponentType.parse(e["type"]), str(e.get("description", "")))
    except (SheetLoadError, KeyError, TypeError) as exc:
        raise ResponseError(f"invalid classification answer: {exc}") from None
    missing = [r.id for r in raw if r.id not in out and r.type is None]
    if missing:
        raise ResponseError("classification misses components", [str(missing)])
    return topic, out


def parse_relations(text: str, ids: Iterable[str]) -> list[tuple[str, str]]:
    obj = extract_json(text)
    if isinstance(obj, dict):
        obj = obj.get("relations")
    if not isinstance(obj, list):
        raise ResponseError("relations answer must be a list of lists")
    known = set(ids)
    out, problems = [], []
    for pair in obj:
        if not (isinstance(pair, list) and len(pair) == 2 and all(isinstance(x, str) for x in pair)):
            problems.append(f"not a 2-component list: {pair!r}")
        elif not set(pair) <= known:
            problems.append(f"unknown component in {pair!r}")
        elif pair[0] == pair[1]:
            problems.append(f"self relation {pair!r}")
        else:
            out.append((pair[0], pair[1]))
    if problems:
        raise ResponseError("invalid relations answer", problems)
    return out


# ---------------------------------------------------------------------------
# accounting
# ---------------------------------------------------------------------------


class TokenLedger:
    """Per-stage token totals; safe for concurrent use."""

    def __init__(self) -> None:
        self._totals = {s: 0 for s in STAGES}
        self._calls = {s: 0 for s in STAGES}
        self._lock = threading.Lock()

    def add(self, stage: str, tokens: int) -> None:
        with self._lock:
            self._totals[stage] += tokens
            self._calls[stage] += 1

    def totals(self) -> dict[str, int]:
        """Keyed by the table labels Pre-Process / Structure / Revise / Content."""
        with self._lock:
            return {STAGES[s]: self._totals[s] for s in STAGES}

    def calls(self) -> dict[str, int]:
        with self._lock:
            return {STAGES[s]: self._calls[s] for s in STAGES}


class Transcript:
    """JSON-lines audit log of every exchange (no timestamps, no secrets)."""

    def __init__(self, path: str | Path | None):
        self.path = Path(path) if path else None
        self._lock = threading.Lock()
        if self.path:
            self.path.parent.mkdir(parents=True, exist_ok=True)
            self.path.write_text("", encoding="utf-8")

    def write(self, record: Mapping[str, Any]) -> None:
        if not self.path:
            return
        line = json.dumps(record, sort_keys=True, ensure_ascii=False)
        with self._lock, self.path.open("a", encoding="utf-8") as fh:
            fh.write(line + "\n")


@dataclass(frozen=True)
class ExemplarStore:
    """Topic -> exemplar image paths."""

    exemplars: Mapping[Topic, tuple[str, ...]] = field(default_factory=dict)

    def __post_init__(self) -> None:
        for t in self.exemplars:
            if not isinstance(t, Topic):
                raise ValueError(f"exemplar key {t!r} is not a topic")

    @classmethod
    def load(cls, path: str | Path) -> ExemplarStore:
        """``{"<topic label>": ["img1.png", ...]}``; relative paths resolve against the file."""
        base = Path(path).parent
        obj = json.loads(Path(path).read_text(encoding="utf-8"))
        return cls({Topic.parse(k): tuple(str(base / p) for p in v) for k, v in obj.items()})

    def pick(self, topic: Topic, rng: random.Random) -> str | None:
        choices = self.exemplars.get(topic, ())
        return rng.choice(choices) if choices else None


# ---------------------------------------------------------------------------
# bridge
# ---------------------------------------------------------------------------

_REASK = "Your previous answer could not be used ({error}). Answer again with the JSON only."


class Bridge:
    def __init__(
        self,
        provider: Provider,
        ledger: TokenLedger | None = None,
        transcript: Transcript | None = None,
        max_in_flight: int = 4,
        policy: ResizePolicy = ResizePolicy(),
    ):
        self.provider = provider
        self.ledger = ledger or TokenLedger()
        self.transcript = transcript or Transcript(None)
        self.policy = policy
        self._sem = threading.BoundedSemaphore(max_in_flight)

    def _ask(
        self,
        stage: str,
        prompt: str,
        parse: Callable[[str], Any],
        context: Mapping[str, Any],
        images: tuple[bytes, ...] = (),
    ) -> Any:
        if images and not self.provider.vision_capable:
            raise CapabilityError(f"{stage}: images requested but provider {self.provider.name!r} is text-only")
        messages = [ChatMessage("user", prompt)]
        for attempt in (1, 2):
            req = ChatRequest(stage, tuple(messages), images, context=context)
            with self._sem:
                resp = self.provider.complete(req)
            self.ledger.add(stage, resp.prompt_tokens + resp.completion_tokens)
            self.transcript.write(
                {
                    "stage": stage,
                    "attempt": attempt,
                    "provider": self.provider.name,
                    "messages": [asdict(m) for m in messages],
                    "n_images": len(images),
                    "response": resp.text,
                    "prompt_tokens": resp.prompt_tokens,
                    "completion_tokens": resp.completion_tokens,
                }
            )
            try:
                return parse(resp.text)
            except ResponseError as exc:
                if attempt == 2:
                    raise
                messages += [ChatMessage("assistant", resp.text), ChatMessage("user", _REASK.format(error=exc))]
        raise AssertionError("unreachable")

    def preprocess(self, raw: Sequence[RawComponent]) -> ProcessedSheet:
        if not raw:
            raise ValueError("sheet has no components")
        comps_json = json.dumps(
            [{"id": r.id, "description": r.description, "data": [list(x) for x in r.data]} for r in raw],
            ensure_ascii=False,
        )
        topic, typing = self._ask(
            "preprocess", classify_prompt(comps_json), lambda t: parse_classification(t, raw), {"kind": "classify", "raw": raw}
        )
        comps = []
        for r in raw:
            ctype, desc = typing.get(r.id, (r.type, r.description))
            comps.append(ProcessedComponent(r.id, r.type or ctype, r.natural_size, r.description or desc, r.data))
        typed = ProcessedSheet(tuple(comps), topic, ())
        typed_json = json.dumps(sheet_to_dict(typed)["components"], ensure_ascii=False)
        rels = self._ask(
            "preprocess",
            relations_prompt(typed_json),
            lambda t: parse_relations(t, [c.id for c in comps]),
            {"kind": "relations", "sheet": typed},
        )
        return replace(typed, relations=tuple(rels))

    def place(self, sheet: ProcessedSheet, exemplar: bytes | None = None, seed: int = 0) -> Layout:
        skeleton = dumps(sheet)
        images = (exemplar,) if exemplar is not None else ()
        return self._ask(
            "structure",
            placement_prompt(skeleton),
            lambda t: parse_layout_response(t, sheet, self.policy),
            {"kind": "structure", "sheet": sheet, "seed": seed},
            images,
        )

    def revise(self, layout: Layout, plan: ReflectionPlan, include_vision: bool = True, seed: int = 0) -> Layout:
        from .reflection import build_revision_prompt
        from .model import sheet_from_layout

        if include_vision and not self.provider.vision_capable:
            raise CapabilityError("vision reflection requested but the provider is text-only")
        payload = build_revision_prompt(layout, plan, include_vision)
        sheet = sheet_from_layout(layout)
        return self._ask(
            "revise",
            payload.text,
            lambda t: parse_layout_response(t, sheet, self.policy),
            {"kind": "revise", "layout": layout, "plan": plan, "seed": seed},
            payload.images,
        )

    def populate(self, layout: Layout, n_candidates: int = 1) -> Layout:
        return self._ask(
            "content",
            population_prompt(dumps(layout)),
            lambda t: parse_population_response(t, layout),
            {"kind": "content", "layout": layout, "n_candidates": n_candidates},
        )


# module-level conveniences


def preprocess(raw: Sequence[RawComponent], provider: Provider | None = None) -> ProcessedSheet:
    """Model-backed pre-processing, or the heuristic fallback without a provider."""
    if provider is None:
        return heuristic_preprocess(raw)
    return Bridge(provider).preprocess(raw)


def llm_place(sheet: ProcessedSheet, provider: Provider, exemplar: bytes | None = None) -> Layout:
    return Bridge(provider).place(sheet, exemplar)


def llm_revise(layout: Layout, plan: ReflectionPlan, provider: Provider, include_vision: bool = True) -> Layout:
    return Bridge(provider).revise(layout, plan, include_vision)


def llm_populate(layout: Layout, provider: Provider) -> Layout:
    return Bridge(provider).populate(layout)


__all__ = [
    "Bridge",
    "CapabilityError",
    "ChatMessage",
    "ChatRequest",
    "ChatResponse",
    "ExemplarStore",
    "HeuristicProvider",
    "HttpProvider",
    "MockProvider",
    "ProviderConfig",
    "ProviderError",
    "ResponseError",
    "STAGES",
    "TokenLedger",
    "Transcript",
    "count_tokens",
    "extract_json",
    "heuristic_preprocess",
    "heuristic_relations",
    "llm_place",
    "llm_populate",
    "llm_revise",
    "parse_layout_response",
    "parse_population_response",
    "preprocess",
]
