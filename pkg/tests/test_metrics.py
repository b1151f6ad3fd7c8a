import random
from dataclasses import replace
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cellplan.grid import CellRect, GridConfig
from cellplan.metrics import (
    MetricConstants,
    ScoreReport,
    alignment_of,
    balance,
    compatibility,
    component_alignment,
    data_cells,
    evaluate,
    fullness,
    overlap,
    relation_alignment,
    type_alignment,
)
from cellplan.model import EmptyLayoutError, Layout, PlacedComponent

from helpers import make_layout, random_layout
from oracles import balance_by_subdivision, fullness_by_marking, overlap_by_marking

K1 = MetricConstants(top_k=1)


# --- fullness ---------------------------------------------------------------


def test_fullness_tiling_is_one():
    lay = make_layout([("a", "title", "A1:C1"), ("b", "main_table", "A2:C4")])
    assert fullness(lay) == 1.0


def test_fullness_above_threshold_caps():
    # 15 + 2 = 17 of the 20 cells in A1:E4 -> 0.85 >= 0.8
    lay = make_layout([("a", "main_table", "A1:E3"), ("b", "meta_data", "A4:B4")])
    assert fullness_by_marking(lay, theta=Fraction(1, 1)) == Fraction(17, 20)
    assert fullness(lay) == 1.0


def test_fullness_single_and_sparse():
    assert fullness(make_layout([("a", "title", "A1:A1")])) == 1.0
    lay = make_layout([("a", "title", "A1:A1"), ("b", "chart", "C3:C3")])
    assert fullness(lay) == pytest.approx(2 / 9, abs=1e-12)


def test_fullness_counts_overlapped_cells_once():
    lay = make_layout([("a", "main_table", "A1:B2"), ("b", "chart", "A1:B2"), ("c", "chart", "D4:D4")])
    assert fullness(lay) == pytest.approx(4 / 16 + 1 / 16)


def test_fullness_uses_grid_weights():
    lay = make_layout(
        [("a", "title", "A1:A1"), ("b", "chart", "B2:B2")], grid=GridConfig((3.0, 1.0), (1.0, 1.0))
    )
    # covered (3*1 + 1*1) of (4*2)
    assert fullness(lay) == pytest.approx(0.5)


def test_fullness_empty_layout_errors():
    with pytest.raises(EmptyLayoutError):
        fullness(Layout(()))


# --- compatibility ------------------------------------------------------------


def _single_cell(width, height, text="abcdefghij"):
    return make_layout([("t", "title", "A1:A1", (( text,),))], grid=GridConfig((width,), (height,)))


def test_compat_perfect_fit():
    # 7 w = 12 * 10 + 40 and h = 15 * 1 + 10
    assert compatibility(_single_cell(160 / 7, 25.0)) == pytest.approx((1.0, 1.0), abs=1e-12)


def test_compat_ratio_two_is_half():
    h, v = compatibility(_single_cell(320 / 7, 50.0))
    assert h == pytest.approx(0.5, abs=1e-9)
    assert v == pytest.approx(0.5, abs=1e-9)


def test_compat_mean_abs_vs_literal():
    # ratios 0.5 and 1.5 cancel under the literal reading's signed sum only partially
    data = (("a" * 10, "b" * 10),)
    lay = make_layout([("m", "main_table", "A1:B1", data)], grid=GridConfig((80 / 7, 240 / 7), (25.0,)))
    h, _ = compatibility(lay)
    assert h == pytest.approx(1 / (1 + 0.5), abs=1e-12)
    h_lit, _ = compatibility(lay, MetricConstants(compat_mode="literal"))
    # |0.5 + 1.5 - 1| / 2 = 0.5
    assert h_lit == pytest.approx(1 / 1.5, abs=1e-12)


def test_compat_no_data_is_vacuous():
    lay = make_layout([("c", "chart", "A1:B2")], grid=GridConfig.uniform(2, 2))
    assert compatibility(lay) == (1.0, 1.0)


def test_compat_merged_title_uses_span_width():
    lay = make_layout([("t", "title", "A1:C1", (("abcdefghij",),))], grid=GridConfig((5.0, 5.0, 160 / 7 - 10), (25.0,)))
    cells = list(data_cells(lay))
    assert (cells[0].col, cells[0].col_end) == (1, 3)
    assert compatibility(lay)[0] == pytest.approx(1.0)


def test_compat_multiline_counts_lines_and_longest_line():
    lay = _single_cell(160 / 7, 40.0, text="abcdefghij\nabc")
    assert compatibility(lay) == pytest.approx((1.0, 1.0))


@given(st.floats(0.01, 5.0), st.floats(0.01, 5.0))
def test_compat_monotone_in_deviation(r1, r2):
    def score(r):
        return compatibility(_single_cell(r * 160 / 7, 25.0))[0]

    d1, d2 = abs(r1 - 1), abs(r2 - 1)
    if d1 < d2 - 1e-9:
        assert score(r1) > score(r2)


# --- alignment ----------------------------------------------------------------


def test_alignment_all_shared():
    lay = make_layout([("a", "title", "A1:C1"), ("b", "main_table", "A1:A4"), ("c", "chart", "A1:B2")])
    assert component_alignment(lay) == (1.0, 1.0)


def test_alignment_four_components_one_violator():
    # k=3: left edges 1,2,3,4 -> anchors {1,2,3}; column 4 violates
    lay = make_layout(
        [("a", "meta_data", "A1:A1"), ("b", "meta_data", "B1:B1"), ("c", "meta_data", "C1:C1"), ("d", "meta_data", "D1:D1")]
    )
    h, v = component_alignment(lay)
    assert h == 1.0
    assert v == pytest.approx(0.8, abs=1e-12)
    # k=1: three share column A, one sits in E
    lay = make_layout(
        [("a", "meta_data", "A1:A1"), ("b", "meta_data", "A3:A3"), ("c", "meta_data", "A5:A5"), ("d", "meta_data", "E7:E7")]
    )
    assert component_alignment(lay, K1)[1] == pytest.approx(0.8, abs=1e-12)


def test_alignment_single_component():
    assert component_alignment(make_layout([("a", "chart", "C3:D9")])) == (1.0, 1.0)


def test_alignment_ties_prefer_smaller_coordinate():
    rects = [CellRect(1, 5, 1, 5), CellRect(1, 2, 1, 2)]
    # k=1: both columns appear once, column 2 is the anchor, column 5 violates
    assert alignment_of(rects, 1)[1] == pytest.approx(1 / 1.5)


@given(st.lists(st.integers(1, 6), min_size=1, max_size=12), st.integers(1, 6))
def test_alignment_monotone_in_violations(lefts, k):
    from collections import Counter

    rects = [CellRect(1, x, 1, x) for x in lefts]
    counts = Counter(lefts)
    anchors = {c for c, _ in sorted(counts.items(), key=lambda kv: (-kv[1], kv[0]))[:k]}
    vio = sum(x not in anchors for x in lefts)
    assert alignment_of(rects, k)[1] == pytest.approx(1 / (1 + vio / len(lefts)))
    if len(counts) <= k:
        assert alignment_of(rects, k)[1] == 1.0


def test_type_alignment_cases():
    singles = make_layout([("t", "title", "A1:C1"), ("m", "main_table", "B3:D9"), ("c", "chart", "F3:H9")])
    assert type_alignment(singles) == (1.0, 1.0)
    metas = make_layout([("a", "meta_data", "A1:B2"), ("b", "meta_data", "A5:B6"), ("t", "title", "C1:C1")])
    assert type_alignment(metas)[1] == 1.0


def test_type_alignment_averages_groups():
    # k=1. meta group aligned (1.0); chart pair misaligned in both axes (2/3)
    lay = make_layout(
        [
            ("a", "meta_data", "A1:A1"),
            ("b", "meta_data", "A3:A3"),
            ("c", "chart", "C1:C1"),
            ("d", "chart", "E5:E5"),
        ]
    )
    h, v = type_alignment(lay, K1)
    assert v == pytest.approx((1.0 + 2 / 3) / 2)
    assert h == pytest.approx((2 / 3 + 2 / 3) / 2)


def test_relation_alignment_cases():
    lay = make_layout([("m", "main_table", "A1:C5"), ("s", "summary_data", "A7:C8")])
    assert relation_alignment(lay, []) == (1.0, 1.0)
    assert relation_alignment(lay, [("m", "s")])[1] == 1.0


def test_relation_alignment_two_pairs():
    lay = make_layout(
        [
            ("m1", "main_table", "A1:C5"),
            ("s1", "summary_data", "A7:C8"),
            ("m2", "main_table", "E1:G5"),
            ("s2", "summary_data", "F7:G8"),
        ]
    )
    _, v = relation_alignment(lay, [("m1", "s1"), ("m2", "s2")], K1)
    assert v == pytest.approx((1.0 + 1 / 1.5) / 2, abs=1e-12)
    assert v == pytest.approx(0.8333, abs=1e-4)


def test_relation_alignment_groups_are_transitive():
    lay = make_layout([("m", "main_table", "A1:C5"), ("s", "summary_data", "A7:C8"), ("c", "chart", "A10:C12")])
    # one group of three sharing column A
    assert relation_alignment(lay, [("m", "s"), ("s", "c")], K1)[1] == 1.0


def test_relation_alignment_dangling_id():
    lay = make_layout([("m", "main_table", "A1:C5")])
    with pytest.raises(KeyError):
        relation_alignment(lay, [("m", "ghost")])


# --- balance --------------------------------------------------------------------


def test_balance_symmetric_layout():
    lay = make_layout([("a", "meta_data", "A1:B2"), ("b", "meta_data", "E1:F2"), ("c", "meta_data", "A5:B6"), ("d", "meta_data", "E5:F6")])
    assert balance(lay) == (1.0, 1.0)


def test_balance_centered_spanning_component():
    lay = make_layout([("a", "chart", "B2:D4")])
    assert balance(lay) == (1.0, 1.0)


def test_balance_left_heavy_fixture():
    # A1:B2 plus E1; the left half is 80% covered, the right 20%
    lay = make_layout([("a", "main_table", "A1:B2"), ("b", "chart", "E1:E1")])
    oracle = balance_by_subdivision(lay)
    assert oracle == (Fraction(1, 3), Fraction(4, 5))
    h, v = balance(lay)
    assert h == pytest.approx(1 / 3, abs=1e-12)
    assert v == pytest.approx(0.8, abs=1e-12)


def test_balance_degenerate_single_row():
    lay = make_layout([("a", "title", "A1:A1"), ("b", "title", "F1:F1")])
    assert balance(lay)[1] == 1.0


def test_balance_matches_subdivision_oracle(rng):
    for _ in range(300):
        lay = random_layout(rng, 5, 9)
        h, v = balance(lay)
        oh, ov = balance_by_subdivision(lay)
        assert h == pytest.approx(float(oh), abs=1e-12)
        assert v == pytest.approx(float(ov), abs=1e-12)


def _mirror_cols(lay: Layout) -> Layout:
    right = max(c.rect.right for c in lay.components)
    comps = tuple(
        replace(c, rect=CellRect(c.rect.top, right - c.rect.right + 1, c.rect.bottom, right - c.rect.left + 1))
        for c in lay.components
    )
    return replace(lay, components=comps)


def test_balance_mirror_symmetry(rng):
    for _ in range(200):
        lay = random_layout(rng, 5, 10)
        assert balance(_mirror_cols(lay))[0] == pytest.approx(balance(lay)[0], abs=1e-12)


# --- overlap ------------------------------------------------------------------


def test_overlap_fixtures():
    disjoint = make_layout([("a", "title", "A1:B1"), ("b", "chart", "A3:B4")])
    assert overlap(disjoint) == 0.0
    one_pair = make_layout(
        [("a", "title", "A1:B2"), ("b", "chart", "B2:C3"), ("c", "meta_data", "E1:E1"), ("d", "meta_data", "G1:G1")]
    )
    assert overlap(one_pair) == pytest.approx(-1.0, abs=1e-9)
    three = make_layout([("a", "chart", "A1:C3"), ("b", "chart", "B2:D4"), ("c", "chart", "C3:E5")])
    assert overlap(three) == pytest.approx(-12.0, abs=1e-9)


def test_overlap_and_fullness_match_marking_oracles(rng):
    for _ in range(300):
        lay = random_layout(rng, 6, 12)
        # both sides are correctly rounded quotients, so float equality is exact
        assert overlap(lay) == float(overlap_by_marking(lay))
        assert fullness(lay) == float(fullness_by_marking(lay))


# --- evaluate -------------------------------------------------------------------


def _perfect_layout():
    text = "abcdefghij"
    return make_layout(
        [("t", "title", "A1:A1", ((text,),)), ("m", "main_table", "A2:A2", ((text,),))],
        relations=[("t", "m")],
        grid=GridConfig((160 / 7,), (25.0, 25.0)),
    )


def test_evaluate_perfect_layout_totals_six():
    report = evaluate(_perfect_layout())
    assert report.weighted_total == pytest.approx(6.0, abs=1e-9)
    assert report.overlap == 0.0


def test_evaluate_overlap_is_additive():
    lay = make_layout(
        [("a", "title", "A1:B2"), ("b", "chart", "B2:C3"), ("c", "meta_data", "E1:E1"), ("d", "meta_data", "G1:G1")]
    )
    report = evaluate(lay)
    positive = report.weighted_total - report.overlap
    assert report.overlap == -1.0
    assert report.weighted_total == pytest.approx(positive - 1.0)


def test_evaluate_structure_stage_has_no_compat():
    lay = make_layout([("t", "title", "A1:C1"), ("m", "main_table", "A2:C5")])
    report = evaluate(lay)
    assert report.compat_h is None and report.compat_v is None
    assert (report.t_align_h, report.t_align_v, report.r_align_h, report.r_align_v) == (1.0,) * 4
    assert report.weighted_total == pytest.approx(5.0)


def test_report_dict_round_trip():
    report = evaluate(_perfect_layout())
    d = report.to_dict()
    assert list(d)[:3] == ["Fullness", "Compatibility.h", "Compatibility.v"]
    assert list(d)[-2:] == ["Overlap", "WeightedTotal"]
    assert ScoreReport.from_dict(d) == report


# --- properties -----------------------------------------------------------------


def _scores(report):
    return [v for k, v in report.as_fields().items() if k not in ("overlap", "weighted_total") and v is not None]


def test_ranges_on_random_layouts(rng):
    for _ in range(500):
        lay = random_layout(rng, 7, 15)
        report = evaluate(lay)
        for s in _scores(report):
            assert 0.0 < s <= 1.0
        assert report.overlap <= 0.0
        disjoint = all(
            not a.rect.intersects(b.rect)
            for i, a in enumerate(lay.components)
            for b in lay.components[i + 1 :]
        )
        assert (report.overlap == 0.0) == disjoint


@settings(max_examples=100, deadline=None)
@given(st.integers(0, 10**6), st.integers(0, 20), st.integers(0, 20))
def test_translation_invariance(seed, dr, dc):
    lay = random_layout(random.Random(seed), 6, 10)
    moved = replace(lay, components=tuple(replace(c, rect=c.rect.shifted(dr, dc)) for c in lay.components))
    assert evaluate(moved) == evaluate(lay)
