"""Layout builders shared by the test modules."""

from __future__ import annotations

import random

from cellplan.grid import CellRect, parse_range
from cellplan.metrics import ScoreReport
from cellplan.model import ComponentType, Layout, PlacedComponent


def make_layout(items, relations=(), grid=None) -> Layout:
    """items: (id, type, "A1:C3") or (id, type, "A1:C3", data)."""
    comps = []
    for item in items:
        cid, ctype, loc = item[:3]
        data = item[3] if len(item) > 3 else ()
        comps.append(PlacedComponent(cid, ComponentType.parse(ctype), parse_range(loc), data=data))
    return Layout(tuple(comps), grid, tuple(relations))


def random_rects(rng: random.Random, n: int, size: int = 12) -> list[CellRect]:
    out = []
    for _ in range(n):
        top, left = rng.randint(1, size), rng.randint(1, size)
        bottom, right = rng.randint(top, size), rng.randint(left, size)
        out.append(CellRect(top, left, bottom, right))
    return out


def random_layout(rng: random.Random, max_n: int = 6, size: int = 12) -> Layout:
    n = rng.randint(1, max_n)
    types = list(ComponentType)
    comps = tuple(
        PlacedComponent(f"c{i}", rng.choice(types), r) for i, r in enumerate(random_rects(rng, n, size))
    )
    ids = [c.id for c in comps]
    rels = []
    if n >= 2:
        for _ in range(rng.randint(0, n)):
            a, b = rng.sample(ids, 2)
            rels.append((a, b))
    return Layout(comps, None, tuple(rels))


def report(**kw) -> ScoreReport:
    """A structure-stage report with every aspect perfect unless overridden."""
    base = dict(
        fullness=1.0, compat_h=None, compat_v=None, align_h=1.0, align_v=1.0, t_align_h=1.0, t_align_v=1.0,
        r_align_h=1.0, r_align_v=1.0, balance_h=1.0, balance_v=1.0, overlap=0.0, weighted_total=5.0,
    )
    base.update(kw)
    return ScoreReport(**base)
