import pytest
from hypothesis import given
from hypothesis import strategies as st

from cellplan.metrics import ScoreReport
from cellplan.ranker import DEFAULT_WEIGHTS, WeightProfile, rank, weighted_total


def uniform_report(score, overlap=0.0, compat=True):
    c = score if compat else None
    return ScoreReport(score, c, c, score, score, score, score, score, score, score, score, overlap)


def test_default_weights_sum_to_six():
    assert DEFAULT_WEIGHTS.max_total() == 6.0


@pytest.mark.parametrize(
    "score, overlap, expected", [(1.0, 0.0, 6.0), (0.5, 0.0, 3.0), (1.0, -1.0, 5.0)]
)
def test_weighted_total_examples(score, overlap, expected):
    assert weighted_total(uniform_report(score, overlap)) == pytest.approx(expected, abs=1e-12)


def test_missing_compat_contributes_nothing():
    assert weighted_total(uniform_report(1.0, compat=False)) == pytest.approx(5.0)
    assert DEFAULT_WEIGHTS.structure_stage().max_total() == 5.0


def test_negative_weight_rejected():
    with pytest.raises(ValueError):
        WeightProfile(fullness=-1)


def _with_total(t):
    # fullness carries the whole total under a fullness-only profile
    return ScoreReport(t, None, None, 0, 0, 0, 0, 0, 0, 0, 0, 0.0)


ONLY_FULL = WeightProfile(*([1.0] + [0.0] * 11))


def test_rank_examples():
    assert rank([_with_total(1.0)], ONLY_FULL) == 0
    assert rank([_with_total(t) for t in (3.1, 4.9, 4.9)], ONLY_FULL) == 1
    assert rank([_with_total(t) for t in (1, 2, 3, 4)], ONLY_FULL) == 3


def test_rank_accepts_layout_pairs():
    assert rank([(None, uniform_report(0.2)), (None, uniform_report(0.9))]) == 1


def test_rank_empty():
    with pytest.raises(ValueError):
        rank([])


reports = st.builds(
    lambda xs, ov: ScoreReport(*xs, ov),
    st.lists(st.floats(0.01, 1.0), min_size=11, max_size=11),
    st.floats(-5, 0),
)


@given(st.lists(reports, min_size=1, max_size=6), st.floats(0.1, 100))
def test_rank_scale_invariant(cands, factor):
    w = DEFAULT_WEIGHTS
    totals = [weighted_total(r, w) for r in cands]
    # ignore cases where rounding could reorder near-ties
    ordered = sorted(totals)
    if len(ordered) > 1 and ordered[-1] - ordered[-2] < 1e-9:
        return
    assert rank(cands, w.scaled(factor)) == rank(cands, w)


@given(st.lists(reports, min_size=1, max_size=6), reports)
def test_adding_candidate(cands, extra):
    before = rank(cands)
    after = rank(cands + [extra])
    assert after in (before, len(cands))
