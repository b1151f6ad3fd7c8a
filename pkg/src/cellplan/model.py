"""Raw sheets, processed sheets, placed layouts and their JSON exchange format."""

from __future__ import annotations

import json
from dataclasses import dataclass, replace
from enum import Enum
from typing import Any, Iterable, Mapping, Sequence

from .grid import CellRect, GridConfig, parse_range, rect_union_bounds


class SheetLoadError(ValueError):
    """A JSON document does not match the sheet/layout schema."""


class EmptyLayoutError(ValueError):
    pass


class ComponentType(str, Enum):
    TITLE = "title"
    MAIN_TABLE = "main_table"
    META_DATA = "meta_data"
    SUMMARY_DATA = "summary_data"
    CHART = "chart"

    @classmethod
    def parse(cls, value: str | ComponentType) -> ComponentType:
        if isinstance(value, ComponentType):
            return value
        key = str(value).strip().lower().replace("-", "_").replace(" ", "_")
        key = _TYPE_ALIASES.get(key, key)
        try:
            return cls(key)
        except ValueError:
            raise SheetLoadError(f"unknown component type {value!r}") from None


_TYPE_ALIASES = {
    "maintable": "main_table",
    "metadata": "meta_data",
    "summary_table": "summary_data",
    "summarytable": "summary_data",
    "summary": "summary_data",
    "charts": "chart",
    "titles": "title",
}


class Topic(str, Enum):
    FINANCIAL = "Financial Management and Forecasting"
    DATA_LOGS = "Data and Task Logs"
    STAFF_SCHEDULING = "Staff Scheduling and Shift Management"
    KPI_DASHBOARDS = "Performance and KPI Dashboards"
    EVENT_PLANNING = "Event Scheduling and Planning"
    INVENTORY = "Inventory and Asset Management"
    REPORT_TRACKING = "Report and Publication Tracking"
    MAINTENANCE = "Maintenance Scheduling"
    MARKETING = "Marketing Campaign Tracking"
    PROJECT_SCHEDULING = "Project Scheduling"
    TODO_CALENDARS = "To-do Lists and Calendars"
    TRAVEL = "Travel Itinerary and Planning"
    GOAL_TRACKING = "Goal and Habit Tracking"

    @classmethod
    def parse(cls, value: str | Topic) -> Topic:
        if isinstance(value, Topic):
            return value
        try:
            return cls(value)
        except ValueError:
            raise SheetLoadError(f"unknown topic {value!r}") from None


def _check_rectangular(data: Sequence[Sequence[Any]], cid: str) -> tuple[tuple[str, ...], ...]:
    if not isinstance(data, (list, tuple)):
        raise SheetLoadError(f"component {cid!r}: data must be a list of rows")
    rows = []
    for row in data:
        if not isinstance(row, (list, tuple)):
            raise SheetLoadError(f"component {cid!r}: every data row must be a list")
        rows.append(tuple("" if v is None else str(v) for v in row))
    if rows and len({len(r) for r in rows}) != 1:
        lengths = sorted({len(r) for r in rows})
        raise SheetLoadError(f"component {cid!r}: ragged data rows (lengths {lengths})")
    return tuple(rows)


@dataclass(frozen=True)
class RawComponent:
    """One input component. ``size`` is only needed for data-less components (charts)."""

    id: str
    data: tuple[tuple[str, ...], ...] = ()
    type: ComponentType | None = None
    description: str = ""
    size: tuple[int, int] | None = None

    def __post_init__(self) -> None:
        object.__setattr__(self, "data", _check_rectangular(self.data, self.id))

    @property
    def natural_size(self) -> tuple[int, int]:
        if self.size is not None:
            return self.size
        if not self.data:
            return (1, 1)
        return (len(self.data), len(self.data[0]))


@dataclass(frozen=True)
class ProcessedComponent:
    id: str
    type: ComponentType
    natural_size: tuple[int, int]
    description: str = ""
    data: tuple[tuple[str, ...], ...] = ()


@dataclass(frozen=True)
class ProcessedSheet:
    components: tuple[ProcessedComponent, ...]
    topic: Topic = Topic.DATA_LOGS
    relations: tuple[tuple[str, str], ...] = ()

    def __post_init__(self) -> None:
        object.__setattr__(self, "components", tuple(self.components))
        ids = [c.id for c in self.components]
        if len(set(ids)) != len(ids):
            raise SheetLoadError(f"duplicate component ids: {_dupes(ids)}")
        object.__setattr__(self, "relations", _check_relations(self.relations, set(ids)))

    def component(self, cid: str) -> ProcessedComponent:
        for c in self.components:
            if c.id == cid:
                return c
        raise KeyError(cid)


@dataclass(frozen=True)
class PlacedComponent:
    id: str
    type: ComponentType
    rect: CellRect
    data: tuple[tuple[str, ...], ...] = ()
    formatted_data: tuple[tuple[str, ...], ...] | None = None
    description: str = ""
    natural_size: tuple[int, int] | None = None

    @property
    def cell_data(self) -> tuple[tuple[str, ...], ...]:
        """Formatted content when populated, raw content otherwise."""
        return self.formatted_data if self.formatted_data is not None else self.data


@dataclass(frozen=True)
class Layout:
    components: tuple[PlacedComponent, ...]
    grid: GridConfig | None = None
    relations: tuple[tuple[str, str], ...] = ()
    topic: Topic | None = None

    def __post_init__(self) -> None:
        object.__setattr__(self, "components", tuple(self.components))
        ids = [c.id for c in self.components]
        if len(set(ids)) != len(ids):
            raise SheetLoadError(f"duplicate component ids: {_dupes(ids)}")
        object.__setattr__(self, "relations", _check_relations(self.relations, set(ids)))

    @property
    def rects(self) -> list[CellRect]:
        return [c.rect for c in self.components]

    def component(self, cid: str) -> PlacedComponent:
        for c in self.components:
            if c.id == cid:
                return c
        raise KeyError(cid)

    def with_rects(self, rects: Mapping[str, CellRect]) -> Layout:
        comps = tuple(replace(c, rect=rects.get(c.id, c.rect)) for c in self.components)
        return replace(self, components=comps)


def _dupes(ids: Iterable[str]) -> list[str]:
    seen: set[str] = set()
    out = []
    for i in ids:
        if i in seen and i not in out:
            out.append(i)
        seen.add(i)
    return out


def _check_relations(relations: Iterable[Sequence[str]], ids: set[str]) -> tuple[tuple[str, str], ...]:
    out = []
    for pair in relations:
        pair = tuple(pair)
        if len(pair) != 2:
            raise SheetLoadError(f"relation must be a pair, got {list(pair)}")
        a, b = str(pair[0]), str(pair[1])
        if a == b:
            raise SheetLoadError(f"self-relation on {a!r}")
        for x in (a, b):
            if x not in ids:
                raise SheetLoadError(f"relation references unknown component {x!r}")
        out.append((a, b))
    return tuple(out)


def bounding_box(layout: Layout) -> CellRect:
    if not layout.components:
        raise EmptyLayoutError("layout has no components")
    return rect_union_bounds(layout.rects)


def relation_groups(relations: Iterable[tuple[str, str]]) -> list[list[str]]:
    """Connected components of the relation graph, members in order of first appearance."""
    parent: dict[str, str] = {}
    order: list[str] = []

    def find(x: str) -> str:
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for a, b in relations:
        for x in (a, b):
            if x not in parent:
                parent[x] = x
                order.append(x)
        ra, rb = find(a), find(b)
        if ra != rb:
            parent[rb] = ra
    groups: dict[str, list[str]] = {}
    for x in order:
        groups.setdefault(find(x), []).append(x)
    return list(groups.values())


# ---------------------------------------------------------------------------
# JSON
# ---------------------------------------------------------------------------


def _parse_json(doc: bytes | str | Mapping[str, Any]) -> Mapping[str, Any]:
    if isinstance(doc, Mapping):
        return doc
    try:
        obj = json.loads(doc)
    except json.JSONDecodeError as exc:
        raise SheetLoadError(f"invalid JSON: {exc}") from exc
    if not isinstance(obj, dict):
        raise SheetLoadError("top-level JSON value must be an object")
    return obj


def _components_list(obj: Mapping[str, Any]) -> list[Mapping[str, Any]]:
    comps = obj.get("components")
    if not isinstance(comps, list) or not comps:
        raise SheetLoadError("'components' must be a non-empty list")
    for i, c in enumerate(comps):
        if not isinstance(c, dict):
            raise SheetLoadError(f"component #{i} is not an object")
        if not isinstance(c.get("id"), str) or not c["id"]:
            raise SheetLoadError(f"component #{i} lacks a string 'id'")
    ids = [c["id"] for c in comps]
    if len(set(ids)) != len(ids):
        raise SheetLoadError(f"duplicate component ids: {_dupes(ids)}")
    return comps


def _size_of(c: Mapping[str, Any]) -> tuple[int, int] | None:
    size = c.get("size")
    if size is None:
        return None
    if (
        not isinstance(size, (list, tuple))
        or len(size) != 2
        or not all(isinstance(v, int) and v >= 1 for v in size)
    ):
        raise SheetLoadError(f"component {c['id']!r}: 'size' must be [rows, cols] of positive ints")
    return (size[0], size[1])


def load_sheet(doc: bytes | str | Mapping[str, Any]) -> list[RawComponent]:
    """Load the raw components of a sheet document."""
    obj = _parse_json(doc)
    out = []
    for c in _components_list(obj):
        ctype = ComponentType.parse(c["type"]) if c.get("type") else None
        out.append(
            RawComponent(
                id=c["id"],
                data=c.get("data", []),
                type=ctype,
                description=str(c.get("description", "")),
                size=_size_of(c),
            )
        )
    return out


def load_processed(doc: bytes | str | Mapping[str, Any]) -> ProcessedSheet:
    """Load a document whose components all carry a ``type``."""
    obj = _parse_json(doc)
    comps = []
    for raw in load_sheet(obj):
        if raw.type is None:
            raise SheetLoadError(f"component {raw.id!r} has no 'type'")
        comps.append(
            ProcessedComponent(raw.id, raw.type, raw.natural_size, raw.description, raw.data)
        )
    topic = Topic.parse(obj["topic"]) if obj.get("topic") else Topic.DATA_LOGS
    return ProcessedSheet(tuple(comps), topic, _relations_of(obj))


def _relations_of(obj: Mapping[str, Any]) -> tuple[tuple[str, str], ...]:
    rel = obj.get("relations") or []
    if not isinstance(rel, list):
        raise SheetLoadError("'relations' must be a list of pairs")
    return tuple(tuple(p) for p in rel)  # type: ignore[misc]


def _grid_of(obj: Mapping[str, Any]) -> GridConfig | None:
    g = obj.get("grid")
    if g is None:
        return None
    if not isinstance(g, dict):
        raise SheetLoadError("'grid' must be an object")
    try:
        return GridConfig(tuple(g["col_widths"]), tuple(g["row_heights"]))
    except (KeyError, TypeError, ValueError) as exc:
        raise SheetLoadError(f"invalid grid block: {exc}") from exc


def load_layout(doc: bytes | str | Mapping[str, Any]) -> Layout:
    obj = _parse_json(doc)
    comps = []
    for c in _components_list(obj):
        if "location" not in c:
            raise SheetLoadError(f"component {c['id']!r} has no 'location'")
        if not c.get("type"):
            raise SheetLoadError(f"component {c['id']!r} has no 'type'")
        try:
            rect = parse_range(c["location"])
        except ValueError as exc:
            raise SheetLoadError(f"component {c['id']!r}: {exc}") from exc
        data = _check_rectangular(c.get("data", []), c["id"])
        fdata = c.get("formatted_data")
        comps.append(
            PlacedComponent(
                id=c["id"],
                type=ComponentType.parse(c["type"]),
                rect=rect,
                data=data,
                formatted_data=None if fdata is None else _check_rectangular(fdata, c["id"]),
                description=str(c.get("description", "")),
                natural_size=_size_of(c),
            )
        )
    topic = Topic.parse(obj["topic"]) if obj.get("topic") else None
    return Layout(tuple(comps), _grid_of(obj), _relations_of(obj), topic)


def _data_json(data: Sequence[Sequence[str]]) -> list[list[str]]:
    return [list(r) for r in data]


def sheet_to_dict(sheet: ProcessedSheet) -> dict[str, Any]:
    comps = []
    for c in sheet.components:
        d: dict[str, Any] = {"id": c.id, "type": c.type.value}
        if c.description:
            d["description"] = c.description
        d["size"] = list(c.natural_size)
        d["data"] = _data_json(c.data)
        comps.append(d)
    return {
        "components": comps,
        "topic": sheet.topic.value,
        "relations": [list(p) for p in sheet.relations],
    }


def layout_to_dict(layout: Layout) -> dict[str, Any]:
    comps = []
    for c in layout.components:
        d: dict[str, Any] = {"id": c.id, "type": c.type.value}
        if c.description:
            d["description"] = c.description
        if c.natural_size is not None:
            d["size"] = list(c.natural_size)
        d["location"] = c.rect.to_a1()
        d["data"] = _data_json(c.data)
        if c.formatted_data is not None:
            d["formatted_data"] = _data_json(c.formatted_data)
        comps.append(d)
    out: dict[str, Any] = {"components": comps}
    if layout.topic is not None:
        out["topic"] = layout.topic.value
    out["relations"] = [list(p) for p in layout.relations]
    if layout.grid is not None:
        out["grid"] = {
            "col_widths": list(layout.grid.col_widths),
            "row_heights": list(layout.grid.row_heights),
        }
    return out


def dumps(obj: Layout | ProcessedSheet | Mapping[str, Any]) -> str:
    """Canonical JSON: sorted keys, two-space indent, trailing newline."""
    if isinstance(obj, Layout):
        obj = layout_to_dict(obj)
    elif isinstance(obj, ProcessedSheet):
        obj = sheet_to_dict(obj)
    return json.dumps(obj, sort_keys=True, indent=2, ensure_ascii=False) + "\n"


def layout_from_sheet(sheet: ProcessedSheet, rects: Mapping[str, CellRect]) -> Layout:
    """Attach positions to every component of a processed sheet."""
    missing = [c.id for c in sheet.components if c.id not in rects]
    if missing:
        raise KeyError(f"no position for components {missing}")
    comps = tuple(
        PlacedComponent(
            id=c.id,
            type=c.type,
            rect=rects[c.id],
            data=c.data,
            description=c.description,
            natural_size=c.natural_size,
        )
        for c in sheet.components
    )
    return Layout(comps, None, sheet.relations, sheet.topic)


def sheet_from_layout(layout: Layout) -> ProcessedSheet:
    comps = tuple(
        ProcessedComponent(
            c.id,
            c.type,
            c.natural_size if c.natural_size is not None else _data_size(c),
            c.description,
            c.data,
        )
        for c in layout.components
    )
    return ProcessedSheet(comps, layout.topic or Topic.DATA_LOGS, layout.relations)


def _data_size(c: PlacedComponent) -> tuple[int, int]:
    if c.data:
        return (len(c.data), len(c.data[0]))
    return c.rect.size

