"""Structure placement: resize rules, a deterministic heuristic placer and
candidate generation.

The heuristic builds an initial layout by grouping related components into
blocks and shelf-packing the blocks under the title, then hill-climbs the
ranker total with small moves (translate, swap, align, resize).
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass, field, replace
from typing import Callable, Mapping, Sequence

from .grid import CellRect
from .metrics import DEFAULT_CONSTANTS, MetricConstants, evaluate
from .model import ComponentType, Layout, ProcessedComponent, ProcessedSheet, layout_from_sheet, relation_groups
from .ranker import DEFAULT_WEIGHTS, WeightProfile

T = ComponentType


class PlacementError(ValueError):
    pass


@dataclass(frozen=True)
class ResizePolicy:
    allow_title_resize: bool = True
    allow_chart_resize: bool = True
    # chart cols/rows ratio must stay within this factor range of its natural ratio
    chart_aspect: tuple[float, float] = (0.5, 2.0)


DEFAULT_POLICY = ResizePolicy()


@dataclass(frozen=True)
class ResizeViolation:
    id: str | None
    type: ComponentType
    natural: tuple[int, int]
    proposed: tuple[int, int]
    reason: str

    def __str__(self) -> str:
        who = f"{self.id} " if self.id else ""
        return f"{who}({self.type.value}) {self.natural} -> {self.proposed}: {self.reason}"


def validate_resize(
    ctype: ComponentType,
    natural: tuple[int, int],
    proposed: CellRect | tuple[int, int],
    policy: ResizePolicy = DEFAULT_POLICY,
    cid: str | None = None,
) -> ResizeViolation | None:
    """None when the proposed size is admissible, otherwise a violation record."""
    rows, cols = proposed.size if isinstance(proposed, CellRect) else proposed
    n_rows, n_cols = natural

    def bad(reason: str) -> ResizeViolation:
        return ResizeViolation(cid, ctype, natural, (rows, cols), reason)

    if (rows, cols) == (n_rows, n_cols):
        return None
    if ctype is T.TITLE:
        return None if policy.allow_title_resize else bad("title resizing disabled")
    if ctype is T.CHART:
        if not policy.allow_chart_resize:
            return bad("chart resizing disabled")
        lo, hi = policy.chart_aspect
        ratio = (cols / rows) / (n_cols / n_rows)
        if not lo - 1e-12 <= ratio <= hi + 1e-12:
            return bad(f"chart aspect changes by {ratio:.2f}x, allowed [{lo}, {hi}]")
        return None
    if ctype is T.MAIN_TABLE:
        if cols != n_cols:
            return bad("main-table width must stay fixed")
        if rows < n_rows:
            return bad("main-table may only grow by empty rows")
        return None
    return bad(f"{ctype.value} is not resizable")


def layout_violations(layout: Layout, policy: ResizePolicy = DEFAULT_POLICY) -> list[ResizeViolation]:
    out = []
    for c in layout.components:
        natural = c.natural_size or (c.rect.size if not c.data else (len(c.data), len(c.data[0])))
        v = validate_resize(c.type, natural, c.rect, policy, c.id)
        if v is not None:
            out.append(v)
    return out


@dataclass(frozen=True)
class PlacementConfig:
    n_candidates: int = 3
    margin: int = 1
    iterations: int = 500
    seed: int = 0
    max_rows: int = 500
    max_cols: int = 200
    policy: ResizePolicy = DEFAULT_POLICY
    constants: MetricConstants = DEFAULT_CONSTANTS
    weights: WeightProfile = field(default_factory=lambda: DEFAULT_WEIGHTS.structure_stage())

    def __post_init__(self) -> None:
        if self.n_candidates < 1:
            raise ValueError("n_candidates must be >= 1")
        if self.margin < 0 or self.iterations < 0:
            raise ValueError("margin and iterations must be >= 0")


# ---------------------------------------------------------------------------
# greedy construction
# ---------------------------------------------------------------------------


@dataclass
class _Block:
    width: int
    height: int
    offsets: dict[str, tuple[int, int, int, int]]  # id -> (row, col, rows, cols), 0-based in block


def _block_for_group(comps: Sequence[ProcessedComponent]) -> _Block:
    """Anchor (largest main table, else largest item) with related charts on its
    right and the remaining related items stacked below, all touching."""
    mains = [c for c in comps if c.type is T.MAIN_TABLE]
    pool = mains or list(comps)
    anchor = max(pool, key=lambda c: (c.natural_size[0] * c.natural_size[1], -comps.index(c)))
    a_rows, a_cols = anchor.natural_size
    offsets = {anchor.id: (0, 0, a_rows, a_cols)}
    right_col = a_cols
    row = 0
    for c in comps:
        if c.type is T.CHART and c is not anchor:
            rows, cols = c.natural_size
            offsets[c.id] = (row, right_col, rows, cols)
            row += rows
    width = a_cols + max((o[3] for cid, o in offsets.items() if cid != anchor.id), default=0)
    height = max(a_rows, row)
    below = height
    for c in comps:
        if c.id in offsets:
            continue
        rows, cols = c.natural_size
        # summaries go directly under their table, others follow
        offsets[c.id] = (below, 0, rows, cols)
        below += rows
        width = max(width, cols)
    return _Block(width, below, offsets)


def _blocks(sheet: ProcessedSheet) -> list[_Block]:
    body = [c for c in sheet.components if c.type is not T.TITLE]
    by_id = {c.id: c for c in body}
    rels = [(a, b) for a, b in sheet.relations if a in by_id and b in by_id]
    grouped: set[str] = set()
    blocks: list[_Block] = []
    for group in relation_groups(rels):
        members = [c for c in body if c.id in group]
        order = sorted(members, key=lambda c: (c.type is not T.MAIN_TABLE, c.type is not T.SUMMARY_DATA, body.index(c)))
        blocks.append(_block_for_group(order))
        grouped.update(group)

    metas = [c for c in body if c.id not in grouped and c.type is T.META_DATA]
    if metas:
        offsets = {}
        col = 0
        for m in metas:
            rows, cols = m.natural_size
            offsets[m.id] = (0, col, rows, cols)
            col += cols + 1
        blocks.append(_Block(col - 1, max(m.natural_size[0] for m in metas), offsets))

    for c in body:
        if c.id not in grouped and c.type is not T.META_DATA:
            rows, cols = c.natural_size
            blocks.append(_Block(cols, rows, {c.id: (0, 0, rows, cols)}))
    return blocks


def _shelf_pack(blocks: list[_Block], target_width: int, margin: int, top: int) -> dict[str, CellRect]:
    rects: dict[str, CellRect] = {}
    x, y, shelf_h = 0, 0, 0
    for b in blocks:
        if x > 0 and x + b.width > target_width:
            x, y, shelf_h = 0, y + shelf_h + margin, 0
        for cid, (r, c, rows, cols) in b.offsets.items():
            rects[cid] = CellRect.from_size(top + y + r, 1 + x + c, rows, cols)
        x += b.width + margin
        shelf_h = max(shelf_h, b.height)
    return rects


def _fit_titles(rects: dict[str, CellRect], titles: Sequence[ProcessedComponent]) -> dict[str, CellRect]:
    """Stack titles on the top rows, each spanning every column used by the body."""
    body = [r for cid, r in rects.items() if cid not in {t.id for t in titles}]
    out = dict(rects)
    if body:
        left, right = min(r.left for r in body), max(r.right for r in body)
    row = 1
    for t in titles:
        rows, cols = t.natural_size
        if body:
            out[t.id] = CellRect(row, left, row + rows - 1, right)
        else:
            out[t.id] = CellRect.from_size(row, 1, rows, cols)
        row += rows
    return out


def _title_rows(titles: Sequence[ProcessedComponent]) -> int:
    return sum(t.natural_size[0] for t in titles)


def greedy_place(sheet: ProcessedSheet, cfg: PlacementConfig, width_factor: float = 1.0) -> dict[str, CellRect]:
    titles = [c for c in sheet.components if c.type is T.TITLE]
    blocks = _blocks(sheet)
    blocks.sort(key=lambda b: -(b.width * b.height))
    # meta-data shelf first so it sits right under the title
    metas = [b for b in blocks if all(sheet.component(i).type is T.META_DATA for i in b.offsets)]
    rest = [b for b in blocks if b not in metas]
    ordered = metas + rest
    if ordered:
        area = sum(b.width * b.height for b in ordered)
        widest = max(b.width for b in ordered)
        target = max(widest, int(round(math.sqrt(area) * width_factor)))
        rects = _shelf_pack(ordered, target, cfg.margin, _title_rows(titles) + 1)
    else:
        rects = {}
    return _fit_titles(rects, titles)


# ---------------------------------------------------------------------------
# local search
# ---------------------------------------------------------------------------


class _Search:
    def __init__(self, sheet: ProcessedSheet, cfg: PlacementConfig, rng: random.Random):
        self.sheet = sheet
        self.cfg = cfg
        self.rng = rng
        self.titles = [c for c in sheet.components if c.type is T.TITLE]
        self.title_ids = {t.id for t in self.titles}
        self.body = [c for c in sheet.components if c.type is not T.TITLE]
        self.top_row = _title_rows(self.titles) + 1
        self.template = layout_from_sheet(sheet, {c.id: CellRect(1, 1, 1, 1) for c in sheet.components})

    def layout(self, rects: Mapping[str, CellRect]) -> Layout:
        return self.template.with_rects(rects)

    def score(self, rects: Mapping[str, CellRect]) -> float:
        return evaluate(self.layout(rects), None, self.cfg.constants, self.cfg.weights).weighted_total

    def normalize(self, body: dict[str, CellRect]) -> dict[str, CellRect] | None:
        if not body:
            return _fit_titles({}, self.titles)
        d_row = self.top_row - min(r.top for r in body.values())
        d_col = 1 - min(r.left for r in body.values())
        shifted = {cid: r.shifted(d_row, d_col) for cid, r in body.items()}
        rects = list(shifted.values())
        for i in range(len(rects)):
            for j in range(i + 1, len(rects)):
                if rects[i].intersects(rects[j]):
                    return None
        if max(r.bottom for r in rects) > self.cfg.max_rows or max(r.right for r in rects) > self.cfg.max_cols:
            return None
        return _fit_titles(shifted, self.titles)

    def propose(self, rects: dict[str, CellRect]) -> dict[str, CellRect] | None:
        body = {cid: r for cid, r in rects.items() if cid not in self.title_ids}
        if not body:
            return None
        ids = sorted(body)
        cid = self.rng.choice(ids)
        r = body[cid]
        kind = self.rng.random()
        if kind < 0.4:
            dr, dc = self.rng.choice([(-1, 0), (1, 0), (0, -1), (0, 1)])
            if r.top + dr < 1 or r.left + dc < 1:
                return None
            body[cid] = r.shifted(dr, dc)
        elif kind < 0.55 and len(ids) >= 2:
            other = self.rng.choice([i for i in ids if i != cid])
            o = body[other]
            body[cid] = CellRect.from_size(o.top, o.left, r.n_rows, r.n_cols)
            body[other] = CellRect.from_size(r.top, r.left, o.n_rows, o.n_cols)
        elif kind < 0.85 and len(ids) >= 2:
            other = body[self.rng.choice([i for i in ids if i != cid])]
            if self.rng.random() < 0.5:
                body[cid] = r.shifted(0, other.left - r.left)
            else:
                body[cid] = r.shifted(other.top - r.top, 0)
        else:
            comp = self.sheet.component(cid)
            dr, dc = self.rng.choice([(-1, 0), (1, 0), (0, -1), (0, 1)])
            if r.n_rows + dr < 1 or r.n_cols + dc < 1:
                return None
            new = CellRect(r.top, r.left, r.bottom + dr, r.right + dc)
            if validate_resize(comp.type, comp.natural_size, new, self.cfg.policy) is not None:
                return None
            body[cid] = new
        return self.normalize(body)

    def run(self, start: dict[str, CellRect], iterations: int) -> tuple[dict[str, CellRect], float]:
        best, best_score = start, self.score(start)
        for _ in range(iterations):
            cand = self.propose(dict(best))
            if cand is None:
                continue
            s = self.score(cand)
            if s > best_score + 1e-12:
                best, best_score = cand, s
        return best, best_score


def _check_sizes(sheet: ProcessedSheet, cfg: PlacementConfig) -> None:
    if not sheet.components:
        raise PlacementError("sheet has no components")
    for c in sheet.components:
        rows, cols = c.natural_size
        if rows > cfg.max_rows or cols > cfg.max_cols:
            raise PlacementError(
                f"component {c.id!r} ({rows}x{cols}) exceeds the {cfg.max_rows}x{cfg.max_cols} grid"
            )


def heuristic_place(sheet: ProcessedSheet, cfg: PlacementConfig = PlacementConfig()) -> Layout:
    """Deterministic placement for a given ``cfg.seed``; overlap-free and resize-valid."""
    _check_sizes(sheet, cfg)
    rng = random.Random(cfg.seed)
    width_factor = 1.0 if cfg.seed == 0 else rng.uniform(0.7, 1.8)
    search = _Search(sheet, cfg, rng)
    body = {cid: r for cid, r in greedy_place(sheet, cfg, width_factor).items() if cid not in search.title_ids}
    start = search.normalize(body)
    if start is None:  # the greedy packing never overlaps; guard anyway
        raise PlacementError("greedy construction produced overlapping components")
    rects, _ = search.run(start, cfg.iterations)
    return search.layout(rects)


def improve_layout(
    layout: Layout,
    cfg: PlacementConfig = PlacementConfig(),
    iterations: int | None = None,
) -> Layout:
    """Hill-climb an existing layout; overlapping inputs are first separated by
    re-packing. Never returns a lower structure-stage total than the input."""
    from .model import sheet_from_layout

    sheet = sheet_from_layout(layout)
    rng = random.Random(cfg.seed)
    search = _Search(sheet, cfg, rng)
    current = {c.id: c.rect for c in layout.components}
    start = search.normalize({cid: r for cid, r in current.items() if cid not in search.title_ids})
    if start is None or layout_violations(search.layout(start), cfg.policy):
        start = search.normalize(
            {cid: r for cid, r in greedy_place(sheet, cfg).items() if cid not in search.title_ids}
        )
    assert start is not None
    rects, score = search.run(start, cfg.iterations if iterations is None else iterations)
    original = evaluate(layout, None, cfg.constants, cfg.weights).weighted_total
    if score < original:
        return layout
    return search.layout(rects)


def random_place(sheet: ProcessedSheet, seed: int = 0, spread: float = 2.5) -> Layout:
    """Uniform random, overlap-free placement at natural sizes (a weak baseline)."""
    rng = random.Random(seed)
    area = sum(c.natural_size[0] * c.natural_size[1] for c in sheet.components)
    side_r = max(max(c.natural_size[0] for c in sheet.components), int(math.ceil(math.sqrt(area * spread))))
    side_c = max(max(c.natural_size[1] for c in sheet.components), int(math.ceil(math.sqrt(area * spread))))
    while True:
        placed: dict[str, CellRect] = {}
        ok = True
        for c in sheet.components:
            rows, cols = c.natural_size
            for _ in range(200):
                r = CellRect.from_size(rng.randint(1, side_r - rows + 1), rng.randint(1, side_c - cols + 1), rows, cols)
                if all(not r.intersects(o) for o in placed.values()):
                    placed[c.id] = r
                    break
            else:
                ok = False
                break
        if ok:
            break
        side_r, side_c = side_r + 2, side_c + 2
    d_row = 1 - min(r.top for r in placed.values())
    d_col = 1 - min(r.left for r in placed.values())
    return layout_from_sheet(sheet, {cid: r.shifted(d_row, d_col) for cid, r in placed.items()})


# ---------------------------------------------------------------------------
# candidates
# ---------------------------------------------------------------------------

Generator = Callable[[ProcessedSheet, int], Layout]


def heuristic_generator(cfg: PlacementConfig = PlacementConfig()) -> Generator:
    def generate(sheet: ProcessedSheet, seed: int) -> Layout:
        return heuristic_place(sheet, replace(cfg, seed=seed))

    return generate


def random_generator(sheet: ProcessedSheet, seed: int) -> Layout:
    return random_place(sheet, seed)


@dataclass
class CandidateBatch:
    layouts: list[Layout]
    errors: list[tuple[int, str]]

    def __iter__(self):
        return iter(self.layouts)

    def __len__(self) -> int:
        return len(self.layouts)


def generate_candidates(
    sheet: ProcessedSheet, generator: Generator | None = None, cfg: PlacementConfig = PlacementConfig()
) -> CandidateBatch:
    """``cfg.n_candidates`` layouts from seeds ``cfg.seed + i``. Failing
    generations are reported in ``errors`` rather than raised."""
    generator = generator or heuristic_generator(cfg)
    layouts, errors = [], []
    for i in range(cfg.n_candidates):
        try:
            layouts.append(generator(sheet, cfg.seed + i))
        except Exception as exc:  # noqa: BLE001 - partial results are the contract
            errors.append((i, f"{type(exc).__name__}: {exc}"))
    return CandidateBatch(layouts, errors)
