"""Seven-criterion layout evaluation: fullness, compatibility, three alignment
variants, balance and overlap.

All scores except overlap lie in (0, 1]; overlap is <= 0 and exactly 0 for a
layout with no intersecting components.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import asdict, dataclass
from typing import TYPE_CHECKING, Iterable, Iterator, Sequence

import numpy as np

from .grid import CellRect, GridBoundsError, GridConfig
from .model import ComponentType, EmptyLayoutError, Layout, bounding_box, relation_groups

if TYPE_CHECKING:
    from .ranker import WeightProfile

# floor used when a balance half carries no mass, keeps the score inside (0, 1]
BALANCE_EPS = 1e-6


@dataclass(frozen=True)
class MetricConstants:
    theta_full: float = 0.8
    w_text: float = 12.0  # px per character
    h_text: float = 15.0  # px per line
    pad_h: float = 40.0
    pad_v: float = 10.0
    s_h: float = 7.0  # column width unit -> px
    top_k: int = 3
    # "mean_abs": 1 / (1 + mean|r - 1|); "literal": 1 / (1 + |sum(r) - 1| / M)
    compat_mode: str = "mean_abs"

    def __post_init__(self) -> None:
        for name in ("theta_full", "w_text", "h_text", "pad_h", "pad_v", "s_h"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")
        if self.top_k < 1:
            raise ValueError("top_k must be >= 1")
        if self.compat_mode not in ("mean_abs", "literal"):
            raise ValueError(f"unknown compat_mode {self.compat_mode!r}")


DEFAULT_CONSTANTS = MetricConstants()


@dataclass(frozen=True)
class ScoreReport:
    fullness: float
    compat_h: float | None
    compat_v: float | None
    align_h: float
    align_v: float
    t_align_h: float
    t_align_v: float
    r_align_h: float
    r_align_v: float
    balance_h: float
    balance_v: float
    overlap: float
    weighted_total: float = 0.0

    @property
    def has_compat(self) -> bool:
        return self.compat_h is not None and self.compat_v is not None

    def to_dict(self) -> dict[str, float | None]:
        """Keys follow the column headers of the benchmark table."""
        return {label: getattr(self, attr) for label, attr in TABLE_COLUMNS}

    @classmethod
    def from_dict(cls, d: dict[str, float | None]) -> ScoreReport:
        return cls(**{attr: d.get(label) for label, attr in TABLE_COLUMNS})  # type: ignore[arg-type]

    def as_fields(self) -> dict[str, float | None]:
        return asdict(self)


TABLE_COLUMNS: tuple[tuple[str, str], ...] = (
    ("Fullness", "fullness"),
    ("Compatibility.h", "compat_h"),
    ("Compatibility.v", "compat_v"),
    ("C-Alignment.h", "align_h"),
    ("C-Alignment.v", "align_v"),
    ("T-Alignment.h", "t_align_h"),
    ("T-Alignment.v", "t_align_v"),
    ("R-Alignment.h", "r_align_h"),
    ("R-Alignment.v", "r_align_v"),
    ("Balance.h", "balance_h"),
    ("Balance.v", "balance_v"),
    ("Overlap", "overlap"),
    ("WeightedTotal", "weighted_total"),
)


# ---------------------------------------------------------------------------
# coverage helpers
# ---------------------------------------------------------------------------


def effective_grid(layout: Layout) -> GridConfig:
    """The layout's grid, or a unit grid spanning its bounding box."""
    box = bounding_box(layout)
    if layout.grid is None:
        return GridConfig.uniform(box.bottom, box.right)
    if not layout.grid.covers(box):
        raise GridBoundsError(
            f"grid ({layout.grid.n_rows}x{layout.grid.n_cols}) does not cover {box.to_a1()}"
        )
    return layout.grid


def _occupancy(rects: Iterable[CellRect], box: CellRect) -> np.ndarray:
    mask = np.zeros((box.n_rows, box.n_cols), dtype=bool)
    for r in rects:
        mask[r.top - box.top : r.bottom - box.top + 1, r.left - box.left : r.right - box.left + 1] = True
    return mask


def _spans(layout: Layout) -> tuple[CellRect, np.ndarray, np.ndarray, np.ndarray]:
    box = bounding_box(layout)
    g = effective_grid(layout)
    widths = np.asarray(g.col_widths[box.left - 1 : box.right], dtype=float)
    heights = np.asarray(g.row_heights[box.top - 1 : box.bottom], dtype=float)
    return box, _occupancy(layout.rects, box), widths, heights


def _cap(ratio: float, c: MetricConstants) -> float:
    return 1.0 if ratio >= c.theta_full else ratio


def fullness(layout: Layout, c: MetricConstants = DEFAULT_CONSTANTS) -> float:
    """Covered area over bounding-box area (grid-weighted), capped to 1 above theta_full.

    Cells covered by several components count once.
    """
    if not layout.components:
        raise EmptyLayoutError("fullness of an empty layout")
    _, mask, widths, heights = _spans(layout)
    covered = float(heights @ mask @ widths)
    total = float(heights.sum() * widths.sum())
    return _cap(covered / total, c)


def _half_split(lengths: np.ndarray) -> np.ndarray:
    """Portion of each cell length lying before the midpoint of the total extent."""
    edges = np.concatenate([[0.0], np.cumsum(lengths)])
    mid = edges[-1] / 2.0
    return np.clip(np.minimum(edges[1:], mid) - edges[:-1], 0.0, None)


def _balance_score(fa: float, fb: float) -> float:
    if fa + fb <= 0.0:
        return BALANCE_EPS
    return max(1.0 - abs(fa - fb) / (fa + fb), BALANCE_EPS)


def balance(layout: Layout, c: MetricConstants = DEFAULT_CONSTANTS) -> tuple[float, float]:
    """(horizontal, vertical) balance.

    Horizontal compares the fullness of the left and right halves of the
    bounding box, vertical the upper and lower halves. Cells straddling a
    midline contribute to each half in proportion to the area on that side.
    """
    if not layout.components:
        raise EmptyLayoutError("balance of an empty layout")
    _, mask, widths, heights = _spans(layout)
    total_h, total_w = heights.sum(), widths.sum()

    if len(widths) == 1:
        bal_h = 1.0
    else:
        left_w = _half_split(widths)
        right_w = widths - left_w
        f_left = _cap(float(heights @ mask @ left_w) / (total_h * left_w.sum()), c)
        f_right = _cap(float(heights @ mask @ right_w) / (total_h * right_w.sum()), c)
        bal_h = _balance_score(f_left, f_right)

    if len(heights) == 1:
        bal_v = 1.0
    else:
        up_h = _half_split(heights)
        down_h = heights - up_h
        f_up = _cap(float(up_h @ mask @ widths) / (up_h.sum() * total_w), c)
        f_down = _cap(float(down_h @ mask @ widths) / (down_h.sum() * total_w), c)
        bal_v = _balance_score(f_up, f_down)
    return float(bal_h), float(bal_v)


# ---------------------------------------------------------------------------
# compatibility
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class DataCell:
    """A non-empty content cell and the (inclusive) grid span it occupies."""

    component: str
    row: int
    col: int
    row_end: int
    col_end: int
    text: str

    @property
    def lines(self) -> list[str]:
        return self.text.split("\n")

    @property
    def max_line_chars(self) -> int:
        return max(len(line) for line in self.lines)

    @property
    def n_lines(self) -> int:
        return len(self.lines)


def data_cells(layout: Layout, *, formatted: bool = True) -> Iterator[DataCell]:
    """Map component content onto grid cells.

    When a component is wider than its data, the last data column is merged
    across the remaining columns; titles likewise merge their last row
    downwards. Extra rows of other components stay empty.
    """
    for comp in layout.components:
        data = comp.cell_data if formatted else comp.data
        if not data:
            continue
        r = comp.rect
        n_data_rows, n_data_cols = len(data), len(data[0])
        for i in range(min(n_data_rows, r.n_rows)):
            row = r.top + i
            row_end = r.bottom if (comp.type is ComponentType.TITLE and i == n_data_rows - 1) else row
            for j in range(min(n_data_cols, r.n_cols)):
                text = data[i][j]
                if not text.strip():
                    continue
                col = r.left + j
                col_end = r.right if j == n_data_cols - 1 else col
                yield DataCell(comp.id, row, col, row_end, col_end, text)


def cell_ratios(
    cells: Sequence[DataCell], grid: GridConfig, c: MetricConstants = DEFAULT_CONSTANTS
) -> tuple[np.ndarray, np.ndarray]:
    """Per-cell horizontal and vertical fit ratios; 1 means a perfect fit."""
    cw = np.concatenate([[0.0], np.cumsum(grid.col_widths)])
    rh = np.concatenate([[0.0], np.cumsum(grid.row_heights)])
    rh_, rv_ = [], []
    for cell in cells:
        if cell.col_end > grid.n_cols or cell.row_end > grid.n_rows:
            raise GridBoundsError(f"cell of {cell.component!r} lies outside the grid")
        width = cw[cell.col_end] - cw[cell.col - 1]
        height = rh[cell.row_end] - rh[cell.row - 1]
        rh_.append(c.s_h * width / (c.w_text * cell.max_line_chars + c.pad_h))
        rv_.append(height / (c.h_text * cell.n_lines + c.pad_v))
    return np.asarray(rh_, dtype=float), np.asarray(rv_, dtype=float)


def _compat_from_ratios(ratios: np.ndarray, c: MetricConstants) -> float:
    if ratios.size == 0:
        return 1.0
    if c.compat_mode == "literal":
        dev = abs(float(ratios.sum()) - 1.0) / ratios.size
    else:
        dev = float(np.abs(ratios - 1.0).mean())
    return 1.0 / (1.0 + dev)


def compatibility(layout: Layout, c: MetricConstants = DEFAULT_CONSTANTS) -> tuple[float, float]:
    """(horizontal, vertical) fit of column widths / row heights to the cell text."""
    if layout.grid is None:
        raise ValueError("compatibility needs a populated grid")
    cells = list(data_cells(layout))
    if not cells:
        return 1.0, 1.0
    rh, rv = cell_ratios(cells, layout.grid, c)
    return _compat_from_ratios(rh, c), _compat_from_ratios(rv, c)


# ---------------------------------------------------------------------------
# alignment
# ---------------------------------------------------------------------------


def _alignment_1d(coords: Sequence[int], k: int) -> float:
    counts = Counter(coords)
    ranked = sorted(counts.items(), key=lambda kv: (-kv[1], kv[0]))
    anchors = {coord for coord, _ in ranked[:k]}
    violations = sum(1 for x in coords if x not in anchors)
    return 1.0 / (1.0 + violations / len(coords))


def alignment_of(rects: Sequence[CellRect], k: int = 3) -> tuple[float, float]:
    """Horizontal score from top edges, vertical score from left edges."""
    if not rects:
        return 1.0, 1.0
    return _alignment_1d([r.top for r in rects], k), _alignment_1d([r.left for r in rects], k)


def component_alignment(layout: Layout, c: MetricConstants = DEFAULT_CONSTANTS) -> tuple[float, float]:
    if not layout.components:
        raise EmptyLayoutError("alignment of an empty layout")
    return alignment_of(layout.rects, c.top_k)


def _group_alignment(groups: Iterable[Sequence[CellRect]], k: int) -> tuple[float, float]:
    scores = [alignment_of(g, k) for g in groups if len(g) >= 2]
    if not scores:
        return 1.0, 1.0
    return (
        sum(s[0] for s in scores) / len(scores),
        sum(s[1] for s in scores) / len(scores),
    )


def type_alignment(layout: Layout, c: MetricConstants = DEFAULT_CONSTANTS) -> tuple[float, float]:
    groups: dict[ComponentType, list[CellRect]] = {}
    for comp in layout.components:
        groups.setdefault(comp.type, []).append(comp.rect)
    # enum order keeps the average deterministic
    return _group_alignment([groups[t] for t in ComponentType if t in groups], c.top_k)


def relation_alignment(
    layout: Layout,
    relations: Iterable[tuple[str, str]] | None = None,
    c: MetricConstants = DEFAULT_CONSTANTS,
) -> tuple[float, float]:
    rels = list(layout.relations if relations is None else relations)
    rect_of = {comp.id: comp.rect for comp in layout.components}
    for a, b in rels:
        for x in (a, b):
            if x not in rect_of:
                raise KeyError(f"relation references unknown component {x!r}")
    groups = [[rect_of[i] for i in g] for g in relation_groups(rels)]
    return _group_alignment(groups, c.top_k)


# ---------------------------------------------------------------------------
# overlap
# ---------------------------------------------------------------------------


def overlap_pairs(rects: Sequence[CellRect]) -> int:
    n = 0
    for i in range(len(rects)):
        for j in range(i + 1, len(rects)):
            if rects[i].intersects(rects[j]):
                n += 1
    return n


def overlap(layout: Layout) -> float:
    """-C**2 / N with C = 2 per intersecting pair."""
    if not layout.components:
        raise EmptyLayoutError("overlap of an empty layout")
    count = 2 * overlap_pairs(layout.rects)
    if count == 0:
        return 0.0
    return -(count**2) / len(layout.components)


# ---------------------------------------------------------------------------


def evaluate(
    layout: Layout,
    relations: Iterable[tuple[str, str]] | None = None,
    c: MetricConstants = DEFAULT_CONSTANTS,
    weights: WeightProfile | None = None,
) -> ScoreReport:
    """Score every aspect. Compatibility is left as None until a grid is attached."""
    from .ranker import DEFAULT_WEIGHTS, weighted_total

    if not layout.components:
        raise EmptyLayoutError("cannot evaluate an empty layout")
    compat: tuple[float | None, float | None] = (None, None)
    if layout.grid is not None:
        compat = compatibility(layout, c)
    al = component_alignment(layout, c)
    ta = type_alignment(layout, c)
    ra = relation_alignment(layout, relations, c)
    bal = balance(layout, c)
    report = ScoreReport(
        fullness=fullness(layout, c),
        compat_h=compat[0],
        compat_v=compat[1],
        align_h=al[0],
        align_v=al[1],
        t_align_h=ta[0],
        t_align_v=ta[1],
        r_align_h=ra[0],
        r_align_v=ra[1],
        balance_h=bal[0],
        balance_v=bal[1],
        overlap=overlap(layout),
    )
    total = weighted_total(report, weights or DEFAULT_WEIGHTS)
    return ScoreReport(**{**asdict(report), "weighted_total": total})
