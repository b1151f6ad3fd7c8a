"""Snap pixel bounding-box layouts onto the spreadsheet grid."""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Any, Mapping, Sequence

from .grid import CellRect
from .model import ComponentType, Layout, PlacedComponent, SheetLoadError


@dataclass(frozen=True)
class PixelBox:
    id: str
    type: ComponentType
    x1: float
    y1: float
    x2: float
    y2: float

    def __post_init__(self) -> None:
        if not (self.x1 < self.x2 and self.y1 < self.y2):
            raise ValueError(f"box {self.id!r} is not well formed: {(self.x1, self.y1, self.x2, self.y2)}")
        if self.x1 < 0 or self.y1 < 0:
            raise ValueError(f"box {self.id!r} has negative coordinates")


@dataclass(frozen=True)
class PixelLayout:
    boxes: tuple[PixelBox, ...]

    @property
    def width(self) -> float:
        return max(b.x2 for b in self.boxes)

    @property
    def height(self) -> float:
        return max(b.y2 for b in self.boxes)


@dataclass(frozen=True)
class GridSpec:
    """A ``bg_x`` x ``bg_y`` pixel background cut into ``cell_x`` x ``cell_y`` cells."""

    bg_x: int = 1000
    bg_y: int = 500
    cell_x: int = 50
    cell_y: int = 25

    def __post_init__(self) -> None:
        if min(self.bg_x, self.bg_y, self.cell_x, self.cell_y) <= 0:
            raise ValueError("grid spec values must be positive")
        if self.bg_x % self.cell_x or self.bg_y % self.cell_y:
            raise ValueError("background size must be a multiple of the cell size")

    @property
    def n_cols(self) -> int:
        return self.bg_x // self.cell_x

    @property
    def n_rows(self) -> int:
        return self.bg_y // self.cell_y


def scale_factor(p: PixelLayout, g: GridSpec) -> float:
    """Uniform down-scaling applied when the layout overflows the background."""
    return min(1.0, g.bg_x / p.width, g.bg_y / p.height)


def _snap_edges(lo: float, hi: float, cell: float, n: int) -> tuple[int, int]:
    # round() is half-to-even, which settles exact midpoints deterministically
    a = min(max(round(lo / cell), 0), n)
    b = min(max(round(hi / cell), 0), n)
    if b <= a:
        if a >= n:
            a = n - 1
        b = a + 1
    return a, b


def snap(p: PixelLayout, g: GridSpec = GridSpec()) -> Layout:
    if not p.boxes:
        raise ValueError("cannot snap an empty pixel layout")
    s = scale_factor(p, g)
    comps = []
    for b in p.boxes:
        c1, c2 = _snap_edges(b.x1 * s, b.x2 * s, g.cell_x, g.n_cols)
        r1, r2 = _snap_edges(b.y1 * s, b.y2 * s, g.cell_y, g.n_rows)
        comps.append(PlacedComponent(b.id, b.type, CellRect(r1 + 1, c1 + 1, r2, c2)))
    return Layout(tuple(comps))


def to_pixels(layout: Layout, g: GridSpec = GridSpec()) -> PixelLayout:
    """Cell-aligned pixel boxes for a grid layout (inverse of ``snap`` on the grid)."""
    return PixelLayout(
        tuple(
            PixelBox(
                c.id,
                c.type,
                (c.rect.left - 1) * g.cell_x,
                (c.rect.top - 1) * g.cell_y,
                c.rect.right * g.cell_x,
                c.rect.bottom * g.cell_y,
            )
            for c in layout.components
        )
    )


def load_pixel_layout(doc: bytes | str | Mapping[str, Any]) -> PixelLayout:
    """``{"boxes": [{"id", "type", "bbox": [x1, y1, x2, y2]}, ...]}``."""
    obj = json.loads(doc) if isinstance(doc, (bytes, str)) else doc
    boxes = obj.get("boxes") if isinstance(obj, dict) else None
    if not isinstance(boxes, list) or not boxes:
        raise SheetLoadError("'boxes' must be a non-empty list")
    out = []
    for i, b in enumerate(boxes):
        try:
            x1, y1, x2, y2 = (float(v) for v in b["bbox"])
            out.append(PixelBox(str(b.get("id", f"B{i + 1}")), ComponentType.parse(b.get("type", "chart")), x1, y1, x2, y2))
        except (KeyError, TypeError, ValueError) as exc:
            raise SheetLoadError(f"box #{i}: {exc}") from exc
    return PixelLayout(tuple(out))


def edge_displacements(p: PixelLayout, layout: Layout, g: GridSpec = GridSpec()) -> list[float]:
    """Absolute pixel distance between every scaled input edge and its snapped edge."""
    s = scale_factor(p, g)
    out: list[float] = []
    by_id = {c.id: c.rect for c in layout.components}
    for b in p.boxes:
        r = by_id[b.id]
        out += [
            abs(b.x1 * s - (r.left - 1) * g.cell_x),
            abs(b.x2 * s - r.right * g.cell_x),
            abs(b.y1 * s - (r.top - 1) * g.cell_y),
            abs(b.y2 * s - r.bottom * g.cell_y),
        ]
    return out


def pixel_layout_from_boxes(boxes: Sequence[tuple[str, str, float, float, float, float]]) -> PixelLayout:
    return PixelLayout(tuple(PixelBox(i, ComponentType.parse(t), *xy) for i, t, *xy in boxes))
