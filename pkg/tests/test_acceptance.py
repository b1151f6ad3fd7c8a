"""Acceptance suite: one test per acceptance criterion, each with its tolerance
and time budget. A PASS/FAIL line per criterion is printed in the summary."""

from __future__ import annotations

import random
import socket
import statistics
import time
import urllib.request
from pathlib import Path

import pytest

from cellplan.cli import main
from cellplan.grid import GridConfig
from cellplan.metrics import compatibility, component_alignment, evaluate, fullness, overlap
from cellplan.model import Layout
from cellplan.pixels import GridSpec, PixelBox, PixelLayout, edge_displacements, snap, to_pixels
from cellplan.placer import heuristic_place, layout_violations, random_place
from cellplan.populator import autofit_layout, fit_layout
from cellplan.ranker import DEFAULT_WEIGHTS
from cellplan.reflection import INSTRUCTIONS, SWEEP_PRESETS, ThresholdProfile, reflect_trace, search_reviser, triggers
from cellplan.sketch import rasterize, render_sketch
from cellplan.synth import has_long_text, synth_corpus

from helpers import make_layout, random_layout, report as _report
from oracles import fullness_by_marking, overlap_by_marking

STRUCTURE = DEFAULT_WEIGHTS.structure_stage()
GOLDEN = Path(__file__).parent / "golden"

# The instruction strings, typed out independently of the implementation.
TABLE_STRINGS = [
    "This spreadsheet is with much empty space. Consider redistribute the elements to minimize empty space.",
    "This spreadsheet has overlapping components. Consider moving the components to avoid overlapping",
    "The horizontal alignment of components is not good. Consider align the top of the components",
    "The vertical alignment of components is not good. Consider align the left of the components",
    "The type-specific horizontal alignment of components is not good. Consider align the top of the components according to their types",
    "The type-specific vertical alignment of components is not good. Consider align the left of the components according to their types",
    "The relation-specific horizontal alignment of components is not good. Consider align the top of the components according to their relations",
    "The relation-specific vertical alignment of components is not good. Consider align the left of the components according to their relations",
    "The horizontal balance of components is not good. Consider distribute the components horizontally",
    "The vertical balance of components is not good. Consider distribute the components vertically",
]


@pytest.fixture(scope="module")
def corpus():
    return synth_corpus(0, 50)


def _criterion(record_property, name):
    record_property("criterion", name)
    t0 = time.perf_counter()
    return lambda: time.perf_counter() - t0


def _disjoint(lay: Layout) -> bool:
    rects = [c.rect for c in lay.components]
    return not any(a.intersects(b) for i, a in enumerate(rects) for b in rects[i + 1 :])


def test_metric_exactness(record_property):
    elapsed = _criterion(record_property, "metric exactness fixtures (1e-9, < 1 s)")
    one_pair = make_layout(
        [("a", "meta_data", "A1:B2"), ("b", "meta_data", "B2:C3"), ("c", "meta_data", "E1:E1"), ("d", "meta_data", "G1:G1")]
    )
    three_pair = make_layout([("a", "meta_data", "A1:C3"), ("b", "meta_data", "B2:D4"), ("c", "meta_data", "C3:E5")])
    r2 = make_layout([("t", "title", "A1:A1", (("abcdefghij",),))], grid=GridConfig((320 / 7,), (50.0,)))
    four = make_layout(
        [("a", "meta_data", "A1:A1"), ("b", "meta_data", "B1:B1"), ("c", "meta_data", "C1:C1"), ("d", "meta_data", "D1:D1")]
    )
    got = (overlap(one_pair), overlap(three_pair), compatibility(r2)[0], component_alignment(four)[1])
    record_property("measured", f"{got}")
    assert got[0] == pytest.approx(-1.0, abs=1e-9)
    assert got[1] == pytest.approx(-12.0, abs=1e-9)
    assert got[2] == pytest.approx(0.5, abs=1e-9)
    assert got[3] == pytest.approx(0.8, abs=1e-9)
    assert elapsed() < 1.0


def test_oracle_equivalence(record_property):
    elapsed = _criterion(record_property, "fullness/overlap equal brute-force oracles on 1,000 layouts (< 30 s)")
    rng = random.Random(2024)
    for _ in range(1000):
        lay = random_layout(rng, max_n=6, size=12)
        assert fullness(lay) == float(fullness_by_marking(lay))
        assert overlap(lay) == float(overlap_by_marking(lay))
    record_property("measured", f"{elapsed():.1f} s")
    assert elapsed() < 30.0


def test_range_contract(record_property):
    elapsed = _criterion(record_property, "score ranges on 10,000 layouts (< 60 s)")
    rng = random.Random(7)
    for i in range(10_000):
        lay = random_layout(rng, max_n=6, size=12)
        if i % 2:
            # half of the layouts carry content and a grid so compatibility is exercised
            comps = tuple(
                c.__class__(c.id, c.type, c.rect, tuple(("x" * rng.randint(0, 30),) for _ in range(c.rect.n_rows)))
                for c in lay.components
            )
            bottom = max(c.rect.bottom for c in comps)
            right = max(c.rect.right for c in comps)
            grid = GridConfig(
                tuple(rng.uniform(2, 40) for _ in range(right)), tuple(rng.uniform(8, 60) for _ in range(bottom))
            )
            lay = Layout(comps, grid, lay.relations)
        r = evaluate(lay)
        for name, value in r.as_fields().items():
            if name in ("overlap", "weighted_total") or value is None:
                continue
            assert 0.0 < value <= 1.0, (name, value)
        assert r.overlap <= 0.0
        assert (r.overlap == 0.0) == _disjoint(lay)
    record_property("measured", f"{elapsed():.1f} s")
    assert elapsed() < 60.0


def test_ranker_maximum(record_property):
    _criterion(record_property, "perfect layout weighted_total == 6.0 (1e-9)")
    perfect = make_layout([("t", "main_table", "A1:A1", (("abcdefghij",),))], grid=GridConfig((160 / 7,), (25.0,)))
    total = evaluate(perfect).weighted_total
    record_property("measured", f"{total!r}")
    assert total == pytest.approx(6.0, abs=1e-9)
    assert DEFAULT_WEIGHTS.max_total() == 6.0


def test_trigger_parity(record_property):
    _criterion(record_property, "trigger thresholds and byte-exact instruction catalog")
    assert triggers(_report(fullness=0.49), ThresholdProfile()) == [TABLE_STRINGS[0]]
    assert triggers(_report(fullness=0.51), ThresholdProfile()) == []
    for th in (ThresholdProfile(), ThresholdProfile(overlap=-100.0), ThresholdProfile.uniform(0.0)):
        assert TABLE_STRINGS[1] in triggers(_report(overlap=-0.01), th)
    assert [s.encode("utf-8") for s in INSTRUCTIONS.values()] == [s.encode("utf-8") for s in TABLE_STRINGS]


def test_threshold_sweep_direction(record_property, corpus):
    elapsed = _criterion(record_property, "threshold sweep: invocations 0.7 > 0.5 > 0.3, total(0.5) > total(0.3) (< 2 min)")
    # the scripted mock generator: a noisy first draft, revised by the search reviser
    starts = [random_place(sheet, i) for i, sheet in enumerate(corpus)]
    reviser = search_reviser(iterations=300)
    inv, tot = {}, {}
    for t, th in SWEEP_PRESETS.items():
        traces = [reflect_trace(lay, reviser, th, 1, include_vision=False) for lay in starts]
        inv[t] = statistics.fmean(tr.invocations for tr in traces)
        tot[t] = statistics.fmean(tr.final_total for tr in traces)
    record_property("measured", f"invocations {inv}, totals { {k: round(v, 3) for k, v in tot.items()} }, {elapsed():.1f} s")
    assert inv[0.7] > inv[0.5] > inv[0.3]
    assert tot[0.5] > tot[0.3]
    assert elapsed() < 120.0


def test_placement_validity(record_property, corpus):
    elapsed = _criterion(record_property, "heuristic placement valid on 50 sheets, beats random by >= 0.5 (< 5 min)")
    heur, rand = [], []
    for i, sheet in enumerate(corpus):
        lay = heuristic_place(sheet)
        assert overlap(lay) == 0.0
        assert layout_violations(lay) == []
        heur.append(evaluate(lay, weights=STRUCTURE).weighted_total)
        base = random_place(sheet, i)
        assert overlap(base) == 0.0 and layout_violations(base) == []
        rand.append(evaluate(base, weights=STRUCTURE).weighted_total)
    gap = statistics.fmean(heur) - statistics.fmean(rand)
    record_property("measured", f"heuristic {statistics.fmean(heur):.3f} vs random {statistics.fmean(rand):.3f}, gap {gap:.3f}")
    assert gap >= 0.5
    assert elapsed() < 300.0


def test_population_vs_autofit(record_property, corpus):
    _criterion(record_property, "fitted dimensions beat AutoFit on the long-text subset (mean >=, strict on >= 80%)")
    subset = [s for s in corpus if has_long_text(s)]
    assert subset
    fit_scores, auto_scores = [], []
    for sheet in subset:
        lay = heuristic_place(sheet)
        f, a = evaluate(fit_layout(lay)), evaluate(autofit_layout(lay))
        fit_scores.append((f.compat_h + f.compat_v) / 2)
        auto_scores.append((a.compat_h + a.compat_v) / 2)
    wins = sum(f > a for f, a in zip(fit_scores, auto_scores)) / len(subset)
    record_property(
        "measured",
        f"{len(subset)} sheets, mean {statistics.fmean(fit_scores):.3f} vs {statistics.fmean(auto_scores):.3f}, strict wins {wins:.0%}",
    )
    assert statistics.fmean(fit_scores) >= statistics.fmean(auto_scores)
    assert wins >= 0.8


def test_snapping(record_property):
    _criterion(record_property, "snapping: 20x20 grid, in-bounds, <= half-cell displacement, idempotent")
    g = GridSpec()
    assert (g.n_cols, g.n_rows) == (20, 20)
    rng = random.Random(99)
    worst = 0.0
    for _ in range(1000):
        boxes = []
        for j in range(rng.randint(1, 6)):
            x1, y1 = rng.uniform(0, 1800), rng.uniform(0, 900)
            boxes.append(PixelBox(f"b{j}", "chart", x1, y1, x1 + rng.uniform(1, 600), y1 + rng.uniform(1, 300)))
        p = PixelLayout(tuple(boxes))
        lay = snap(p, g)
        for c in lay.components:
            r = c.rect
            assert 1 <= r.top <= r.bottom <= g.n_rows and 1 <= r.left <= r.right <= g.n_cols
            assert all(isinstance(v, int) for v in (r.top, r.left, r.bottom, r.right))
        disp = edge_displacements(p, lay, g)
        scale = min(1.0, g.bg_x / p.width, g.bg_y / p.height)
        for b, box in enumerate(boxes):
            dx1, dx2, dy1, dy2 = disp[4 * b : 4 * b + 4]
            # boxes thinner than a cell are widened to one cell; only their far edge may move further
            if round(box.x1 * scale / g.cell_x) != round(box.x2 * scale / g.cell_x):
                assert max(dx1, dx2) <= g.cell_x / 2 + 1e-9
                worst = max(worst, max(dx1, dx2) / g.cell_x)
            if round(box.y1 * scale / g.cell_y) != round(box.y2 * scale / g.cell_y):
                assert max(dy1, dy2) <= g.cell_y / 2 + 1e-9
                worst = max(worst, max(dy1, dy2) / g.cell_y)
        assert snap(to_pixels(lay, g), g) == lay
    record_property("measured", f"worst displacement {worst:.3f} cell")


def test_sketch_determinism(record_property):
    _criterion(record_property, "sketch golden-file bytes and raster dimensions")
    import io

    from PIL import Image

    lay = make_layout([("T1", "title", "A1:D1"), ("MT1", "main_table", "A2:D6")])
    doc = render_sketch(lay)
    assert doc.to_svg() == (GOLDEN / "two_component.svg").read_bytes()
    assert rasterize(doc, 25) == (GOLDEN / "two_component.png").read_bytes()
    for px in (4, 10, 25, 33):
        assert Image.open(io.BytesIO(rasterize(doc, px))).size == (4 * px, 6 * px)


def test_offline_end_to_end(record_property, tmp_path, monkeypatch):
    elapsed = _criterion(record_property, "offline pipeline on the full corpus: zero network calls, byte-identical reruns")
    attempts = []

    def no_network(*args, **kwargs):
        attempts.append(args)
        raise AssertionError("network access attempted")

    monkeypatch.setattr(socket.socket, "connect", no_network)
    monkeypatch.setattr(socket, "create_connection", no_network)
    monkeypatch.setattr(urllib.request, "urlopen", no_network)

    corpus_dir = tmp_path / "corpus"
    assert main(["synth", "--out-dir", str(corpus_dir), "--n", "50", "--seed", "0"]) == 0
    outs = []
    for run in ("a", "b"):
        out = tmp_path / run
        assert main(["pipeline", str(corpus_dir), "--out-dir", str(out), "--generator", "heuristic",
                     "--provider", "mock", "--seed", "0"]) == 0
        outs.append(out)
    names = sorted(p.name for p in outs[0].iterdir())
    assert len(names) == 50
    for name in names:
        for f in ("layout.json", "report.json"):
            assert (outs[0] / name / f).read_bytes() == (outs[1] / name / f).read_bytes()
    assert attempts == []
    record_property("measured", f"50 sheets x 2 runs in {elapsed():.1f} s, 0 network attempts")
