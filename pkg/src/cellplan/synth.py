"""Seeded generator of processed sheets, standing in for a real spreadsheet corpus."""

from __future__ import annotations

import random
from dataclasses import dataclass

from .model import ComponentType, ProcessedComponent, ProcessedSheet, Topic

_WORDS = (
    "budget review supplier invoice audit quarterly shipment client project "
    "schedule staff training meeting campaign inventory vendor payment contract "
    "milestone report forecast target revenue expense update delivery asset "
    "maintenance booking venue travel habit goal task priority status region"
).split()

_NAMES = ["Alice Chen", "Bob Diaz", "Carla Novak", "Deepak Rao", "Eve Martin", "Farid Aziz", "Gina Holm"]
_STATUS = ["Open", "Closed", "Pending", "In progress", "Done", "Blocked"]

_TOPIC_NOUNS = {
    Topic.FINANCIAL: "Budget",
    Topic.DATA_LOGS: "Task Log",
    Topic.STAFF_SCHEDULING: "Shift Roster",
    Topic.KPI_DASHBOARDS: "KPI Dashboard",
    Topic.EVENT_PLANNING: "Event Plan",
    Topic.INVENTORY: "Inventory",
    Topic.REPORT_TRACKING: "Publication Tracker",
    Topic.MAINTENANCE: "Maintenance Schedule",
    Topic.MARKETING: "Campaign Tracker",
    Topic.PROJECT_SCHEDULING: "Project Timeline",
    Topic.TODO_CALENDARS: "To-do List",
    Topic.TRAVEL: "Travel Itinerary",
    Topic.GOAL_TRACKING: "Habit Tracker",
}


@dataclass(frozen=True)
class CorpusProfile:
    """Ranges are inclusive (lo, hi) counts per sheet."""

    n_main: tuple[int, int] = (1, 2)
    n_meta: tuple[int, int] = (0, 4)
    n_summary: tuple[int, int] = (0, 2)
    n_chart: tuple[int, int] = (0, 2)
    allow_charts: bool = True
    p_long_text: float = 0.4
    relation_density: float = 1.0
    main_rows: tuple[int, int] = (5, 16)
    main_cols: tuple[int, int] = (3, 7)


DEFAULT_PROFILE = CorpusProfile()


def _sentence(rng: random.Random, lo: int, hi: int) -> str:
    words = [rng.choice(_WORDS) for _ in range(rng.randint(lo, hi))]
    words[0] = words[0].capitalize()
    return " ".join(words) + "."


def _cell(rng: random.Random, kind: str, row: int) -> str:
    if kind == "name":
        return rng.choice(_NAMES)
    if kind == "item":
        return f"{rng.choice(_WORDS).capitalize()} {rng.choice(_WORDS)}"
    if kind == "date":
        return f"2024-{rng.randint(1, 12):02d}-{rng.randint(1, 28):02d}"
    if kind == "amount":
        return f"{rng.randint(10, 99999) / 100:.2f}"
    if kind == "count":
        return str(rng.randint(0, 500))
    if kind == "status":
        return rng.choice(_STATUS)
    if kind == "note":
        return _sentence(rng, 8, 22)
    return str(row)


def _main_table(rng: random.Random, p: CorpusProfile, long_text: bool) -> tuple[tuple[str, ...], ...]:
    n_rows = rng.randint(*p.main_rows)
    n_cols = rng.randint(*p.main_cols)
    kinds = ["item"] + [rng.choice(["name", "date", "amount", "count", "status"]) for _ in range(n_cols - 1)]
    if long_text:
        kinds[-1] = "note"
    header = tuple(k.capitalize() if k != "note" else "Notes" for k in kinds)
    body = [tuple(_cell(rng, k, r) for k in kinds) for r in range(1, n_rows)]
    return (header, *body)


def _meta_table(rng: random.Random) -> tuple[tuple[str, ...], ...]:
    keys = ["Prepared by", "Date", "Version", "Department", "Reviewed by", "Status"]
    rng.shuffle(keys)
    n = rng.randint(2, 4)
    values = {
        "Prepared by": rng.choice(_NAMES),
        "Reviewed by": rng.choice(_NAMES),
        "Date": _cell(rng, "date", 0),
        "Version": f"v{rng.randint(1, 5)}.{rng.randint(0, 9)}",
        "Department": rng.choice(["Finance", "Operations", "Sales", "IT", "HR"]),
        "Status": rng.choice(_STATUS),
    }
    return tuple((k, values[k]) for k in keys[:n])


def _summary_table(rng: random.Random) -> tuple[tuple[str, ...], ...]:
    labels = ["Total", "Average", "Maximum", "Minimum", "Count"]
    n_rows = rng.randint(2, 4)
    n_cols = rng.randint(2, 3)
    rows = []
    for label in labels[:n_rows]:
        rows.append((label,) + tuple(_cell(rng, "amount", 0) for _ in range(n_cols - 1)))
    return tuple(rows)


def synth_sheet(rng: random.Random, profile: CorpusProfile = DEFAULT_PROFILE) -> ProcessedSheet:
    topic = rng.choice(list(Topic))
    comps: list[ProcessedComponent] = []
    relations: list[tuple[str, str]] = []

    title_cols = rng.randint(3, 6)
    title = f"{rng.choice(['Annual', 'Quarterly', 'Monthly', 'Weekly'])} {_TOPIC_NOUNS[topic]}"
    comps.append(
        ProcessedComponent(
            "T1",
            ComponentType.TITLE,
            (1, title_cols),
            f"Title of the {_TOPIC_NOUNS[topic].lower()} sheet",
            ((title,) + ("",) * (title_cols - 1),),
        )
    )

    long_text = rng.random() < profile.p_long_text
    mains = []
    for i in range(1, rng.randint(*profile.n_main) + 1):
        data = _main_table(rng, profile, long_text and i == 1)
        cid = f"MT{i}"
        mains.append(cid)
        comps.append(
            ProcessedComponent(cid, ComponentType.MAIN_TABLE, (len(data), len(data[0])), f"A main-table of {rng.choice(_WORDS)} records", data)
        )

    for i in range(1, rng.randint(*profile.n_meta) + 1):
        data = _meta_table(rng)
        comps.append(ProcessedComponent(f"M{i}", ComponentType.META_DATA, (len(data), 2), "Sheet meta-data", data))

    for i in range(1, rng.randint(*profile.n_summary) + 1):
        data = _summary_table(rng)
        cid = f"S{i}"
        comps.append(
            ProcessedComponent(cid, ComponentType.SUMMARY_DATA, (len(data), len(data[0])), "Summary figures", data)
        )
        if rng.random() < profile.relation_density:
            relations.append((rng.choice(mains), cid))

    if profile.allow_charts:
        for i in range(1, rng.randint(*profile.n_chart) + 1):
            cid = f"C{i}"
            size = (rng.randint(6, 12), rng.randint(4, 7))
            comps.append(ProcessedComponent(cid, ComponentType.CHART, size, f"A {rng.choice(['bar', 'line', 'pie'])} chart"))
            if rng.random() < profile.relation_density:
                relations.append((rng.choice(mains), cid))

    return ProcessedSheet(tuple(comps), topic, tuple(relations))


def synth_corpus(seed: int, n: int, profile: CorpusProfile = DEFAULT_PROFILE) -> list[ProcessedSheet]:
    """``n`` sheets, identical for identical (seed, n, profile)."""
    if n < 1:
        raise ValueError("n must be >= 1")
    rng = random.Random(seed)
    return [synth_sheet(rng, profile) for _ in range(n)]


def has_long_text(sheet: ProcessedSheet, min_chars: int = 40) -> bool:
    return any(len(v) >= min_chars for c in sheet.components for row in c.data for v in row)
