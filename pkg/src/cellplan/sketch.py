"""Colored-grid sketch images of layouts.

A sketch is built as a small vector document (one rectangle and one centered
id label per component) and can be written as SVG or rasterized to PNG.
"""

from __future__ import annotations

import io
from dataclasses import dataclass, field
from typing import Mapping
from xml.sax.saxutils import escape

from PIL import Image, ImageDraw, ImageFont

from .model import ComponentType, EmptyLayoutError, Layout

MAX_RASTER_SIDE = 8192
MIN_CELL_PX = 4

DEFAULT_PALETTE: Mapping[ComponentType, str] = {
    ComponentType.TITLE: "#FFD700",  # gold
    ComponentType.MAIN_TABLE: "#4682B4",  # steel blue
    ComponentType.META_DATA: "#A9A9A9",  # gray
    ComponentType.SUMMARY_DATA: "#3CB371",  # green
    ComponentType.CHART: "#FA8072",  # salmon
}


class RenderError(ValueError):
    pass


@dataclass(frozen=True)
class StyleMap:
    fills: Mapping[ComponentType, str] = field(default_factory=lambda: dict(DEFAULT_PALETTE))
    label_size: int = 12
    stroke: str = "#333333"
    grid_color: str = "#E0E0E0"
    gridlines: bool = True

    def __post_init__(self) -> None:
        missing = [t.value for t in ComponentType if t not in self.fills]
        if missing:
            raise ValueError(f"style map lacks colors for {missing}")
        if len(set(self.fills[t].lower() for t in ComponentType)) != len(ComponentType):
            raise ValueError("style map colors must be distinct")


@dataclass(frozen=True)
class SketchRect:
    """Rectangle in 0-based cell coordinates with its label anchor."""

    x: int
    y: int
    w: int
    h: int
    fill: str
    label: str

    @property
    def label_pos(self) -> tuple[float, float]:
        return (self.x + self.w / 2, self.y + self.h / 2)


@dataclass(frozen=True)
class SketchDoc:
    n_rows: int
    n_cols: int
    rects: tuple[SketchRect, ...]
    style: StyleMap

    def to_svg(self, unit: int = 40) -> bytes:
        """SVG with ``unit`` user-space pixels per cell."""
        w, h = self.n_cols * unit, self.n_rows * unit
        out = [
            '<?xml version="1.0" encoding="UTF-8"?>',
            f'<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}">',
            f'<rect x="0" y="0" width="{w}" height="{h}" fill="#FFFFFF"/>',
        ]
        if self.style.gridlines:
            out.append(f'<g stroke="{self.style.grid_color}" stroke-width="1">')
            for c in range(1, self.n_cols):
                out.append(f'<line x1="{c * unit}" y1="0" x2="{c * unit}" y2="{h}"/>')
            for r in range(1, self.n_rows):
                out.append(f'<line x1="0" y1="{r * unit}" x2="{w}" y2="{r * unit}"/>')
            out.append("</g>")
        for r in self.rects:
            out.append(
                f'<rect x="{r.x * unit}" y="{r.y * unit}" width="{r.w * unit}" height="{r.h * unit}" '
                f'fill="{r.fill}" fill-opacity="0.75" stroke="{self.style.stroke}" stroke-width="1"/>'
            )
        for r in self.rects:
            cx, cy = r.label_pos
            out.append(
                f'<text x="{_num(cx * unit)}" y="{_num(cy * unit)}" font-family="sans-serif" '
                f'font-size="{self.style.label_size}" text-anchor="middle" dominant-baseline="central">'
                f"{escape(r.label)}</text>"
            )
        out.append("</svg>")
        return ("\n".join(out) + "\n").encode("utf-8")


def _num(v: float) -> str:
    return f"{v:.6g}"


def grid_extent(layout: Layout) -> tuple[int, int]:
    """(max row, max col) reached by any component."""
    if not layout.components:
        raise EmptyLayoutError("cannot size the canvas of an empty layout")
    return max(c.rect.bottom for c in layout.components), max(c.rect.right for c in layout.components)


def render_sketch(layout: Layout, style: StyleMap | None = None) -> SketchDoc:
    style = style or StyleMap()
    if not layout.components:
        raise RenderError("empty layout has no canvas")
    n_rows, n_cols = grid_extent(layout)
    rects = []
    for comp in layout.components:
        if comp.rect is None:
            raise RenderError(f"component {comp.id!r} has no location")
        r = comp.rect
        rects.append(SketchRect(r.left - 1, r.top - 1, r.n_cols, r.n_rows, style.fills[comp.type], comp.id))
    return SketchDoc(n_rows, n_cols, tuple(rects), style)


def _rgb(hex_color: str) -> tuple[int, int, int]:
    h = hex_color.lstrip("#")
    return int(h[0:2], 16), int(h[2:4], 16), int(h[4:6], 16)


def rasterize(doc: SketchDoc, cell_px: int = 25) -> bytes:
    """PNG bytes of size (n_cols * cell_px) x (n_rows * cell_px)."""
    if cell_px < MIN_CELL_PX:
        raise RenderError(f"cell_px must be >= {MIN_CELL_PX}, got {cell_px}")
    w, h = doc.n_cols * cell_px, doc.n_rows * cell_px
    if max(w, h) > MAX_RASTER_SIDE:
        raise RenderError(f"canvas {w}x{h} exceeds {MAX_RASTER_SIDE} px")

    img = Image.new("RGBA", (w, h), (255, 255, 255, 255))
    if doc.style.gridlines:
        draw = ImageDraw.Draw(img)
        grid = _rgb(doc.style.grid_color)
        for c in range(1, doc.n_cols):
            draw.line([(c * cell_px, 0), (c * cell_px, h)], fill=grid)
        for r in range(1, doc.n_rows):
            draw.line([(0, r * cell_px), (w, r * cell_px)], fill=grid)
    stroke = _rgb(doc.style.stroke)
    for r in doc.rects:
        layer = Image.new("RGBA", (w, h), (0, 0, 0, 0))
        ImageDraw.Draw(layer).rectangle(
            [r.x * cell_px, r.y * cell_px, (r.x + r.w) * cell_px - 1, (r.y + r.h) * cell_px - 1],
            fill=_rgb(r.fill) + (191,),
            outline=stroke + (255,),
        )
        img = Image.alpha_composite(img, layer)
    draw = ImageDraw.Draw(img)
    font = ImageFont.load_default(size=max(8, min(doc.style.label_size, cell_px)))
    for r in doc.rects:
        cx, cy = r.label_pos
        draw.text((cx * cell_px, cy * cell_px), r.label, fill=(0, 0, 0, 255), font=font, anchor="mm")
    buf = io.BytesIO()
    img.convert("RGB").save(buf, format="PNG")
    return buf.getvalue()
