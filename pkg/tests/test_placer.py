from __future__ import annotations

import pytest
from hypothesis import given, settings, strategies as st

from cellplan.grid import CellRect
from cellplan.metrics import evaluate, overlap
from cellplan.model import ComponentType as T, ProcessedComponent, ProcessedSheet
from cellplan.placer import (
    PlacementConfig,
    PlacementError,
    ResizePolicy,
    generate_candidates,
    heuristic_place,
    improve_layout,
    layout_violations,
    random_place,
    validate_resize,
)
from cellplan.synth import synth_corpus


def _table(rows, cols, prefix="v"):
    return tuple(tuple(f"{prefix}{r}{c}" for c in range(cols)) for r in range(rows))


def _sheet(*comps, relations=()):
    return ProcessedSheet(tuple(comps), relations=tuple(relations))


def test_validate_resize_examples():
    assert validate_resize(T.TITLE, (1, 5), (1, 6)) is None
    v = validate_resize(T.MAIN_TABLE, (4, 4), (4, 5), cid="MT1")
    assert v is not None and "width" in v.reason and "MT1" in str(v)
    assert validate_resize(T.MAIN_TABLE, (4, 4), (6, 4)) is None
    assert validate_resize(T.MAIN_TABLE, (4, 4), (3, 4)) is not None


def test_validate_resize_other_types():
    assert validate_resize(T.META_DATA, (2, 2), (2, 2)) is None
    assert validate_resize(T.META_DATA, (2, 2), (3, 2)) is not None
    assert validate_resize(T.SUMMARY_DATA, (2, 3), CellRect(1, 1, 2, 4)) is not None
    assert validate_resize(T.CHART, (6, 4), (12, 8)) is None
    assert validate_resize(T.CHART, (6, 4), (6, 16)) is not None
    assert validate_resize(T.CHART, (6, 4), (6, 5), ResizePolicy(allow_chart_resize=False)) is not None
    assert validate_resize(T.TITLE, (1, 5), (1, 6), ResizePolicy(allow_title_resize=False)) is not None


def test_title_and_table_minimal():
    sheet = _sheet(
        ProcessedComponent("T1", T.TITLE, (1, 3), "", (("Report", "", ""),)),
        ProcessedComponent("MT1", T.MAIN_TABLE, (4, 4), "", _table(4, 4)),
    )
    lay = heuristic_place(sheet)
    title, table = lay.component("T1").rect, lay.component("MT1").rect
    assert title.top == 1 and title.left == 1
    assert table.top == title.bottom + 1 and table.left == 1
    assert title.right == table.right
    rep = evaluate(lay)
    assert rep.align_h == 1.0 and rep.align_v == 1.0 and rep.overlap == 0.0


def test_equal_metas_share_a_row():
    sheet = _sheet(
        ProcessedComponent("M1", T.META_DATA, (2, 2), "", _table(2, 2, "a")),
        ProcessedComponent("M2", T.META_DATA, (2, 2), "", _table(2, 2, "b")),
    )
    lay = heuristic_place(sheet)
    assert lay.component("M1").rect.top == lay.component("M2").rect.top


def test_related_summary_sits_below_its_table():
    sheet = _sheet(
        ProcessedComponent("MT1", T.MAIN_TABLE, (6, 4), "", _table(6, 4)),
        ProcessedComponent("S1", T.SUMMARY_DATA, (2, 2), "", _table(2, 2, "s")),
        relations=[("MT1", "S1")],
    )
    lay = heuristic_place(sheet, PlacementConfig(iterations=0))
    mt, s = lay.component("MT1").rect, lay.component("S1").rect
    assert s.top == mt.bottom + 1 and mt.left <= s.left <= mt.right


def test_deterministic_for_fixed_seed():
    sheet = synth_corpus(3, 1)[0]
    assert heuristic_place(sheet) == heuristic_place(sheet)
    cfg = PlacementConfig(seed=7)
    assert heuristic_place(sheet, cfg) == heuristic_place(sheet, cfg)


def test_candidates():
    sheet = synth_corpus(5, 1)[0]
    batch = generate_candidates(sheet, cfg=PlacementConfig(n_candidates=3))
    assert len(batch) == 3 and not batch.errors
    assert len({tuple(c.rect for c in lay.components) for lay in batch}) >= 2
    assert len(generate_candidates(sheet, cfg=PlacementConfig(n_candidates=1))) == 1


def test_candidate_errors_are_collected():
    def failing(sheet, seed):
        raise RuntimeError(f"boom {seed}")

    batch = generate_candidates(synth_corpus(0, 1)[0], failing, PlacementConfig(n_candidates=2))
    assert len(batch) == 0 and [i for i, _ in batch.errors] == [0, 1]


def test_oversize_component_rejected():
    sheet = _sheet(ProcessedComponent("MT1", T.MAIN_TABLE, (600, 3), "", _table(600, 3)))
    with pytest.raises(PlacementError, match="MT1"):
        heuristic_place(sheet)


def test_invalid_config():
    with pytest.raises(ValueError):
        PlacementConfig(n_candidates=0)


@settings(max_examples=15, deadline=None)
@given(seed=st.integers(0, 10_000))
def test_valid_and_never_worse_than_greedy(seed):
    sheet = synth_corpus(seed, 1)[0]
    cfg = PlacementConfig(iterations=150)
    w = cfg.weights
    lay = heuristic_place(sheet, cfg)
    greedy = heuristic_place(sheet, PlacementConfig(iterations=0))
    assert overlap(lay) == 0.0 and not layout_violations(lay)
    assert evaluate(lay, weights=w).weighted_total >= evaluate(greedy, weights=w).weighted_total - 1e-12


def test_random_place_is_valid():
    for sheet in synth_corpus(1, 5):
        lay = random_place(sheet, 3)
        assert overlap(lay) == 0.0 and not layout_violations(lay)
        assert min(c.rect.top for c in lay.components) == 1


def test_improve_layout_repairs_overlap_and_never_regresses():
    sheet = synth_corpus(2, 1)[0]
    cfg = PlacementConfig(iterations=100)
    base = random_place(sheet, 0)
    rects = {c.id: c.rect for c in base.components}
    ids = list(rects)
    rects[ids[1]] = CellRect.from_size(rects[ids[0]].top, rects[ids[0]].left, *rects[ids[1]].size)
    noisy = base.with_rects(rects)
    assert overlap(noisy) < 0
    fixed = improve_layout(noisy, cfg)
    assert overlap(fixed) == 0.0
    clean = improve_layout(base, cfg)
    w = cfg.weights
    assert evaluate(clean, weights=w).weighted_total >= evaluate(base, weights=w).weighted_total
