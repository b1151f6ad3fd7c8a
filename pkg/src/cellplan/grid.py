"""A1-style cell references, rectangular ranges and grid-weighted areas."""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Sequence

_CELL_RE = re.compile(r"([A-Z]+)([1-9][0-9]*)")


class CellReferenceError(ValueError):
    """Malformed cell or range reference."""


class GridBoundsError(ValueError):
    """A rectangle falls outside the extent covered by a GridConfig."""


def col_to_letters(col: int) -> str:
    """1 -> 'A', 26 -> 'Z', 27 -> 'AA' (bijective base 26)."""
    if col < 1:
        raise CellReferenceError(f"column index must be >= 1, got {col}")
    out = []
    while col > 0:
        col, rem = divmod(col - 1, 26)
        out.append(chr(ord("A") + rem))
    return "".join(reversed(out))


def letters_to_col(letters: str) -> int:
    col = 0
    for ch in letters.upper():
        col = col * 26 + (ord(ch) - ord("A") + 1)
    return col


@dataclass(frozen=True, order=True)
class CellRef:
    row: int
    col: int

    def __post_init__(self) -> None:
        if self.row < 1 or self.col < 1:
            raise CellReferenceError(f"row and col must be >= 1, got ({self.row}, {self.col})")

    def __str__(self) -> str:
        return format_cell(self)


@dataclass(frozen=True)
class CellRect:
    """Inclusive, 1-based rectangle of cells."""

    top: int
    left: int
    bottom: int
    right: int

    def __post_init__(self) -> None:
        if self.top < 1 or self.left < 1:
            raise CellReferenceError(f"rect corners must be >= 1: {self!r}")
        if self.top > self.bottom or self.left > self.right:
            raise CellReferenceError(f"rect corners out of order: {self!r}")

    @classmethod
    def from_size(cls, top: int, left: int, n_rows: int, n_cols: int) -> CellRect:
        return cls(top, left, top + n_rows - 1, left + n_cols - 1)

    @property
    def n_rows(self) -> int:
        return self.bottom - self.top + 1

    @property
    def n_cols(self) -> int:
        return self.right - self.left + 1

    @property
    def size(self) -> tuple[int, int]:
        return (self.n_rows, self.n_cols)

    @property
    def cell_count(self) -> int:
        return self.n_rows * self.n_cols

    @property
    def top_left(self) -> CellRef:
        return CellRef(self.top, self.left)

    @property
    def bottom_right(self) -> CellRef:
        return CellRef(self.bottom, self.right)

    def shifted(self, d_row: int, d_col: int) -> CellRect:
        return CellRect(self.top + d_row, self.left + d_col, self.bottom + d_row, self.right + d_col)

    def contains(self, other: CellRect) -> bool:
        return (
            self.top <= other.top
            and self.left <= other.left
            and self.bottom >= other.bottom
            and self.right >= other.right
        )

    def intersects(self, other: CellRect) -> bool:
        return not (
            self.right < other.left
            or other.right < self.left
            or self.bottom < other.top
            or other.bottom < self.top
        )

    def to_a1(self) -> str:
        return f"{format_cell(self.top_left)}:{format_cell(self.bottom_right)}"

    def to_list(self) -> list[str]:
        return [format_cell(self.top_left), format_cell(self.bottom_right)]

    def __str__(self) -> str:
        return self.to_a1()


@dataclass(frozen=True)
class GridConfig:
    """Column widths (width units) and row heights (points), indexed from column A / row 1."""

    col_widths: tuple[float, ...]
    row_heights: tuple[float, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "col_widths", tuple(float(w) for w in self.col_widths))
        object.__setattr__(self, "row_heights", tuple(float(h) for h in self.row_heights))
        if any(not w > 0 for w in self.col_widths):
            raise ValueError("column widths must be positive")
        if any(not h > 0 for h in self.row_heights):
            raise ValueError("row heights must be positive")

    @classmethod
    def uniform(cls, n_rows: int, n_cols: int, width: float = 1.0, height: float = 1.0) -> GridConfig:
        return cls((width,) * n_cols, (height,) * n_rows)

    @property
    def n_rows(self) -> int:
        return len(self.row_heights)

    @property
    def n_cols(self) -> int:
        return len(self.col_widths)

    def covers(self, r: CellRect) -> bool:
        return r.bottom <= self.n_rows and r.right <= self.n_cols


def parse_cell(s: str) -> CellRef:
    """Parse ``"AA10"`` into ``CellRef(row=10, col=27)``. Lowercase letters are accepted."""
    if not isinstance(s, str):
        raise CellReferenceError(f"cell reference must be a string, got {type(s).__name__}")
    text = s.strip().upper()
    m = _CELL_RE.fullmatch(text)
    if m is None:
        raise CellReferenceError(f"malformed cell reference {s!r}: {_describe_bad_position(text)}")
    return CellRef(int(m.group(2)), letters_to_col(m.group(1)))


def _describe_bad_position(text: str) -> str:
    if not text:
        return "empty string"
    i = 0
    while i < len(text) and "A" <= text[i] <= "Z":
        i += 1
    if i == 0:
        return f"expected column letter at position 0, found {text[0]!r}"
    if i == len(text):
        return f"expected row digits at position {i}, found end of string"
    if text[i] == "0":
        return f"row number may not start with '0' (position {i})"
    for j in range(i, len(text)):
        if not text[j].isdigit():
            return f"unexpected character {text[j]!r} at position {j}"
    return "unrecognised reference"


def format_cell(c: CellRef) -> str:
    return f"{col_to_letters(c.col)}{c.row}"


def _rect_from_corners(a: CellRef, b: CellRef) -> CellRect:
    return CellRect(min(a.row, b.row), min(a.col, b.col), max(a.row, b.row), max(a.col, b.col))


def parse_range(s: str | Sequence[str]) -> CellRect:
    """Parse ``"A1:C3"`` or ``["A1", "C3"]``; reversed corners are normalised."""
    if isinstance(s, str):
        parts = s.split(":")
        if len(parts) == 1:
            parts = [parts[0], parts[0]]
        if len(parts) != 2:
            raise CellReferenceError(f"malformed range {s!r}: expected 'TL:BR'")
    else:
        parts = list(s)
        if len(parts) != 2:
            raise CellReferenceError(f"range list must have two endpoints, got {len(parts)}")
    return _rect_from_corners(parse_cell(parts[0]), parse_cell(parts[1]))


def rect_intersect(a: CellRect, b: CellRect) -> CellRect | None:
    top, left = max(a.top, b.top), max(a.left, b.left)
    bottom, right = min(a.bottom, b.bottom), min(a.right, b.right)
    if top > bottom or left > right:
        return None
    return CellRect(top, left, bottom, right)


def rect_union_bounds(rects: Sequence[CellRect]) -> CellRect:
    if not rects:
        raise ValueError("no rectangles")
    return CellRect(
        min(r.top for r in rects),
        min(r.left for r in rects),
        max(r.bottom for r in rects),
        max(r.right for r in rects),
    )


def weighted_area(r: CellRect, g: GridConfig) -> float:
    """Summed spanned column widths times summed spanned row heights."""
    if not g.covers(r):
        raise GridBoundsError(
            f"{r.to_a1()} lies outside grid of {g.n_rows} rows x {g.n_cols} cols"
        )
    width = sum(g.col_widths[r.left - 1 : r.right])
    height = sum(g.row_heights[r.top - 1 : r.bottom])
    return width * height
