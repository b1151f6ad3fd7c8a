"""Content population: line breaks, column widths and row heights."""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from functools import lru_cache
from typing import Iterable, Sequence

import numpy as np

from .grid import GridConfig
from .metrics import DEFAULT_CONSTANTS, DataCell, MetricConstants, data_cells, evaluate
from .model import Layout, bounding_box
from .ranker import DEFAULT_WEIGHTS, WeightProfile, rank

WRAP_FACTORS = (0.8, 1.0, 1.2)
# cells are never wrapped narrower than this many characters
MIN_WRAP_CHARS = 8


@dataclass(frozen=True)
class FontModel:
    name: str = "Calibri"
    size: int = 11
    char_width_units: float = 0.65  # column-width units per character (prompt guidance only)
    default_col_width: float = 8.43
    default_row_height: float = 15.0

    def __post_init__(self) -> None:
        if not self.char_width_units > 0:
            raise ValueError("char_width_units must be positive")


DEFAULT_FONT = FontModel()


def _wrap_paragraph(text: str, max_chars: int) -> list[str]:
    words = text.split()
    if not words:
        return [""]
    lines: list[str] = []
    line = ""
    for word in words:
        while len(word) > max_chars:
            if line:
                lines.append(line)
                line = ""
            lines.append(word[:max_chars])
            word = word[max_chars:]
        if not word:
            continue
        if not line:
            line = word
        elif len(line) + 1 + len(word) <= max_chars:
            line = f"{line} {word}"
        else:
            lines.append(line)
            line = word
    if line or not lines:
        lines.append(line)
    return lines


@lru_cache(maxsize=65536)
def _wrap_cached(s: str, max_chars: int) -> tuple[str, ...]:
    out: list[str] = []
    for para in s.split("\n"):
        out += _wrap_paragraph(para, max_chars)
    return tuple(out)


def wrap_text(s: str, max_chars: int) -> list[str]:
    """Greedy word wrap; words longer than ``max_chars`` are split hard.
    Existing newlines are kept as paragraph breaks."""
    if max_chars < 1:
        raise ValueError("max_chars must be >= 1")
    return list(_wrap_cached(s, max_chars))


def width_for_chars(chars: int, c: MetricConstants = DEFAULT_CONSTANTS) -> float:
    """Column width (width units) whose horizontal fit ratio is exactly 1."""
    return (c.w_text * chars + c.pad_h) / c.s_h


def height_for_lines(lines: int, c: MetricConstants = DEFAULT_CONSTANTS) -> float:
    return c.h_text * lines + c.pad_v


def chars_for_width(width: float, c: MetricConstants = DEFAULT_CONSTANTS) -> int:
    return int(math.floor((c.s_h * width - c.pad_h) / c.w_text + 1e-9))


def _weighted_median(targets: Sequence[float]) -> float:
    """argmin_x sum |x / t - 1|, i.e. the median of t weighted by 1/t."""
    t = np.sort(np.asarray(targets, dtype=float))
    w = 1.0 / t
    cum = np.cumsum(w)
    return float(t[np.searchsorted(cum, cum[-1] / 2.0)])


def _longest_line(text: str) -> int:
    return max(len(line) for line in text.split("\n"))


class _Fitter:
    """Coordinate descent over column widths; rows follow the wrapped content."""

    def __init__(self, layout: Layout, font: FontModel, c: MetricConstants):
        self.c = c
        self.font = font
        box = bounding_box(layout)
        self.n_rows, self.n_cols = box.bottom, box.right
        self.cells: list[DataCell] = list(data_cells(layout, formatted=False))
        # words are never split by the fitter, only by explicit wrap_text calls
        self.min_wrap = [max([MIN_WRAP_CHARS, *(len(w) for w in cell.text.split())]) for cell in self.cells]
        self.single_col = [[] for _ in range(self.n_cols + 1)]
        for i, cell in enumerate(self.cells):
            if cell.col == cell.col_end:
                self.single_col[cell.col].append(i)

    def wrap_all(self, widths: np.ndarray) -> list[str]:
        cum = np.concatenate([[0.0], np.cumsum(widths)])
        out = []
        for i, cell in enumerate(self.cells):
            span = cum[cell.col_end] - cum[cell.col - 1]
            fit = max(chars_for_width(span, self.c), self.min_wrap[i])
            if _longest_line(cell.text) > fit:
                out.append("\n".join(_wrap_cached(cell.text, fit)))
            else:
                out.append(cell.text)
        return out

    def heights_for(self, texts: Sequence[str]) -> np.ndarray:
        needs: list[list[float]] = [[] for _ in range(self.n_rows + 1)]
        for cell, text in zip(self.cells, texts):
            if cell.row == cell.row_end:
                needs[cell.row].append(height_for_lines(text.count("\n") + 1, self.c))
        return np.array(
            [_weighted_median(n) if n else self.font.default_row_height for n in needs[1:]], dtype=float
        )

    def deviation(self, widths: np.ndarray) -> tuple[float, np.ndarray, list[str]]:
        texts = self.wrap_all(widths)
        heights = self.heights_for(texts)
        if not self.cells:
            return 0.0, heights, texts
        cw = np.concatenate([[0.0], np.cumsum(widths)])
        rh = np.concatenate([[0.0], np.cumsum(heights)])
        dev_h = dev_v = 0.0
        for cell, text in zip(self.cells, texts):
            lines = text.split("\n")
            span_w = cw[cell.col_end] - cw[cell.col - 1]
            span_h = rh[cell.row_end] - rh[cell.row - 1]
            l = max(len(x) for x in lines)
            dev_h += abs(self.c.s_h * span_w / (self.c.w_text * l + self.c.pad_h) - 1.0)
            dev_v += abs(span_h / (self.c.h_text * len(lines) + self.c.pad_v) - 1.0)
        m = len(self.cells)
        # maximise compat_h + compat_v
        score = 1.0 / (1.0 + dev_h / m) + 1.0 / (1.0 + dev_v / m)
        return -score, heights, texts

    def initial_widths(self, factor: float) -> np.ndarray:
        widths = np.full(self.n_cols, self.font.default_col_width, dtype=float)
        for col in range(1, self.n_cols + 1):
            idx = self.single_col[col]
            if idx:
                targets = [width_for_chars(_longest_line(self.cells[i].text), self.c) for i in idx]
                widths[col - 1] = _weighted_median(targets) * factor
        return widths

    def candidate_widths(self, col: int) -> list[float]:
        lengths = {_longest_line(self.cells[i].text) for i in self.single_col[col]}
        lengths |= {k for k in range(MIN_WRAP_CHARS, max(lengths, default=0) + 1, 4)}
        return sorted(width_for_chars(k, self.c) for k in lengths)

    def fit(self, factor: float = 1.0, sweeps: int = 2) -> tuple[GridConfig, list[str]]:
        widths = self.initial_widths(factor)
        best, heights, texts = self.deviation(widths)
        for _ in range(sweeps):
            improved = False
            for col in range(1, self.n_cols + 1):
                if not self.single_col[col]:
                    continue
                for w in self.candidate_widths(col):
                    trial = widths.copy()
                    trial[col - 1] = w
                    dev, h, t = self.deviation(trial)
                    if dev < best - 1e-12:
                        best, widths, heights, texts, improved = dev, trial, h, t, True
            if not improved:
                break
        return GridConfig(tuple(widths), tuple(heights)), texts


def _apply_texts(layout: Layout, cells: Sequence[DataCell], texts: Sequence[str]) -> Layout:
    new_data = {c.id: [list(row) for row in c.data] for c in layout.components}
    by_id = {c.id: c for c in layout.components}
    for cell, text in zip(cells, texts):
        comp = by_id[cell.component]
        new_data[cell.component][cell.row - comp.rect.top][cell.col - comp.rect.left] = text
    comps = tuple(
        replace(c, formatted_data=tuple(tuple(r) for r in new_data[c.id]) if c.data else None)
        for c in layout.components
    )
    return replace(layout, components=comps)


def fit_layout(
    layout: Layout,
    font: FontModel = DEFAULT_FONT,
    c: MetricConstants = DEFAULT_CONSTANTS,
    wrap_factor: float = 1.0,
) -> Layout:
    """Layout with line-broken content and a fitted grid attached."""
    fitter = _Fitter(layout, font, c)
    grid, texts = fitter.fit(wrap_factor)
    return replace(_apply_texts(layout, fitter.cells, texts), grid=grid)


def fit_dimensions(
    layout: Layout,
    font: FontModel = DEFAULT_FONT,
    c: MetricConstants = DEFAULT_CONSTANTS,
    wrap_factor: float = 1.0,
) -> GridConfig:
    """Column widths and row heights that fit the (wrapped) content."""
    return _Fitter(layout, font, c).fit(wrap_factor)[0]


def autofit_baseline(
    layout: Layout, font: FontModel = DEFAULT_FONT, c: MetricConstants = DEFAULT_CONSTANTS
) -> GridConfig:
    """Widest unwrapped line per column, tallest explicit line count per row.
    Merged cells do not influence the result."""
    box = bounding_box(layout)
    widths = [font.default_col_width] * box.right
    heights = [font.default_row_height] * box.bottom
    seen_col: set[int] = set()
    seen_row: set[int] = set()
    for cell in data_cells(layout, formatted=False):
        if cell.col == cell.col_end:
            w = width_for_chars(cell.max_line_chars, c)
            widths[cell.col - 1] = w if cell.col not in seen_col else max(widths[cell.col - 1], w)
            seen_col.add(cell.col)
        if cell.row == cell.row_end:
            h = height_for_lines(cell.n_lines, c)
            heights[cell.row - 1] = h if cell.row not in seen_row else max(heights[cell.row - 1], h)
            seen_row.add(cell.row)
    return GridConfig(tuple(widths), tuple(heights))


def autofit_layout(layout: Layout, font: FontModel = DEFAULT_FONT, c: MetricConstants = DEFAULT_CONSTANTS) -> Layout:
    comps = tuple(replace(comp, formatted_data=comp.data if comp.data else None) for comp in layout.components)
    return replace(layout, components=comps, grid=autofit_baseline(layout, font, c))


def populate_candidates(
    layout: Layout,
    n_candidates: int = 3,
    font: FontModel = DEFAULT_FONT,
    c: MetricConstants = DEFAULT_CONSTANTS,
) -> list[Layout]:
    if n_candidates < 1:
        raise ValueError("n_candidates must be >= 1")
    factors = [WRAP_FACTORS[i % len(WRAP_FACTORS)] for i in range(n_candidates)]
    return [fit_layout(layout, font, c, f) for f in factors]


def populate(
    layout: Layout,
    n_candidates: int = 3,
    font: FontModel = DEFAULT_FONT,
    c: MetricConstants = DEFAULT_CONSTANTS,
    weights: WeightProfile = DEFAULT_WEIGHTS,
    relations: Iterable[tuple[str, str]] | None = None,
) -> Layout:
    """Fit ``n_candidates`` variants and keep the best by full weighted total."""
    cands = populate_candidates(layout, n_candidates, font, c)
    rels = None if relations is None else list(relations)
    reports = [evaluate(cand, rels, c, weights) for cand in cands]
    return cands[rank(reports, weights)]
