import random
import warnings

import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import T0, make_stream, matrix_from_metrics, random_matrix
from rankload.analysis import (
    Evaluation,
    InsufficientDataError,
    SchemeRun,
    average_rw,
    error_series,
    forward_moving_average,
    overlap,
    redundancy_series,
    run_scheme,
)
from rankload.ranking import ranked
from rankload.selection import pareto_front, recommend
from rankload.stream import SynthConfig, generate_stream
from rankload.windowing import SchemeConfig

H = 3600


def synth(minutes, seed=1):
    return generate_stream(SynthConfig(seed=seed, duration_minutes=minutes))


def test_periodic_run_over_25_hours():
    run = run_scheme(synth(25 * 60), SchemeConfig.periodic())
    assert len(run.evaluations) == 2
    start = run.stream.span[0]
    assert run.instants == [start + 24 * H, start + 25 * H]


def test_realtime_run_over_61_minutes():
    run = run_scheme(synth(61), SchemeConfig.realtime())
    start = run.stream.span[0]
    assert run.instants == [start + 60 * 60, start + 61 * 60]


def test_short_stream_is_insufficient():
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        with pytest.raises(InsufficientDataError):
            run_scheme(synth(10), SchemeConfig.periodic())


def test_evaluation_carries_matrix_front_and_recommendation():
    run = run_scheme(synth(26 * 60), SchemeConfig.periodic(), desired_recall=0.5)
    for e in run.evaluations:
        assert e.matrix.evaluated_at == e.instant
        assert e.matrix.horizon.end == e.instant and e.matrix.horizon.minutes == 1440
        assert e.recommendation == recommend(pareto_front(e.matrix), 0.5)


def test_horizon_without_relevant_messages_has_no_front():
    s = make_stream([(0, 1, 0), (30 * 60, 2, 0), (H, 3, 0)])
    run = run_scheme(s, SchemeConfig.realtime())
    (e,) = run.evaluations
    assert e.front is None and e.recommendation is None
    assert all(c.metric is None for c in e.matrix)


# --- error series -------------------------------------------------------------

def single_cell_eval(instant, k, period):
    m = matrix_from_metrics(lambda kk, pp: 0.9 if (kk, pp) == (k, period) else None)
    front = pareto_front(m)
    return Evaluation(instant, m, front, recommend(front, 0.5))


def constructed_runs(periodic_cells, realtime_cells):
    instants = [T0 + i * H for i in range(len(periodic_cells))]
    p = SchemeRun(SchemeConfig.periodic(), tuple(single_cell_eval(t, *c) for t, c in zip(instants, periodic_cells)))
    r = SchemeRun(
        SchemeConfig.realtime(),
        tuple(single_cell_eval(t, *c) for t, c in zip(instants, realtime_cells) if c is not None),
    )
    return p, r


def test_moving_average_of_leading_spike():
    # periodic workload 7 then 1s, realtime always 1: differences 6,0,0,0,0
    p, r = constructed_runs([(7, 60)] + [(1, 60)] * 4, [(1, 60)] * 5)
    es = error_series(p, r, 0.5)
    assert es.difference == (6.0, 0.0, 0.0, 0.0, 0.0)
    assert es.moving_avg[0] == pytest.approx(1.2)
    assert es.moving_avg[1:] == (0.0, 0.0, 0.0, 0.0)


def test_missing_realtime_point_excluded():
    p, r = constructed_runs([(7, 60)] * 3, [(1, 60), None, (1, 60)])
    es = error_series(p, r, 0.5)
    assert es.realtime_value == (1.0, None, 1.0)
    assert es.difference == (6.0, None, 6.0)
    assert es.moving_avg == (6.0, None, 6.0)


def test_forward_moving_average_tail_shrinks():
    assert forward_moving_average([1.0, 2.0, 3.0]) == [2.0, 2.5, 3.0]
    assert forward_moving_average([None, 4.0, None, 2.0]) == [None, 3.0, None, 2.0]


@given(st.lists(st.one_of(st.none(), st.floats(-60, 60)), max_size=30))
def test_forward_moving_average_oracle(values):
    got = forward_moving_average(values)
    for i, v in enumerate(values):
        if v is None:
            assert got[i] is None
        else:
            window = [x for x in values[i : i + 5] if x is not None]
            assert got[i] == pytest.approx(sum(window) / len(window))


def test_same_run_gives_zero_error():
    run = run_scheme(synth(26 * 60), SchemeConfig.periodic(), desired_recall=0.6)
    es = error_series(run, run, 0.6)
    assert all(d == 0 for d in es.difference)
    assert all(m == 0 for m in es.moving_avg)


def test_coinciding_horizons_give_zero_error():
    s = synth(3 * 60, seed=5)
    periodic = run_scheme(s, SchemeConfig("periodic", 60, 60), desired_recall=0.6)
    realtime = run_scheme(s, SchemeConfig.realtime(), desired_recall=0.6)
    es = error_series(periodic, realtime, 0.6)
    assert len(es.instants) == 3
    assert es.difference == (0.0, 0.0, 0.0)


# --- redundancy ---------------------------------------------------------------

def test_overlap_identical_sets():
    assert overlap({"a", "b"}, {"a", "b"}) == (1.0, 1.0)


def test_overlap_disjoint_sets():
    assert overlap({"a"}, {"b"}) == (0.0, 0.0)


def test_overlap_partial():
    probe = {f"p{i}" for i in range(10)} | {f"s{i}" for i in range(10)}
    base = {f"s{i}" for i in range(10)} | {f"b{i}" for i in range(40)}
    j, c = overlap(probe, base)
    assert j == pytest.approx(10 / 60)
    assert c == 0.5


def test_overlap_empty_probe():
    assert overlap(set(), {"a"}) == (0.0, 0.0)


@given(st.sets(st.integers(0, 30)), st.sets(st.integers(0, 30)))
def test_overlap_ranges(a, b):
    j, c = overlap(a, b)
    assert 0 <= j <= c <= 1


def test_redundancy_needs_three_evaluations():
    run = run_scheme(synth(25 * 60), SchemeConfig.periodic())
    with pytest.raises(InsufficientDataError):
        redundancy_series(run)


def test_redundancy_matches_recomputed_sets():
    s = synth(180, seed=2)
    run = run_scheme(s, SchemeConfig.realtime())
    points = redundancy_series(run)
    assert len(points) == len(run.evaluations) - 2

    def top(instant, depth):
        msgs = [m for m in s if instant - H <= m.timestamp < instant]
        msgs.sort(key=lambda m: (-m.score, m.timestamp, m.id))
        return {m.id for m in msgs[:depth]}

    for idx in (0, 37, len(points) - 1):
        t = run.instants
        a = top(t[idx + 1], 10) | top(t[idx + 2], 10)
        b = top(t[idx], 50)
        p = points[idx]
        assert p.instant == t[idx]
        assert p.jaccard == pytest.approx(len(a & b) / len(a | b))
        assert p.containment == pytest.approx(len(a & b) / len(a))
    assert all(0 <= p.jaccard <= p.containment <= 1 for p in points)


def test_ranked_agrees_with_sort_order():
    s = synth(60, seed=3)
    assert [m.id for m in ranked(s.messages)] == [
        m.id for m in sorted(s.messages, key=lambda m: (-m.score, m.timestamp, m.id))
    ]


# --- averages -----------------------------------------------------------------

def test_average_of_single_matrix_is_identity():
    m = random_matrix(random.Random(1), undefined=0.1)
    avg = average_rw([m])
    assert [(a.k, a.period, a.metric, a.workload, a.n_samples) for a in avg] == [
        (c.k, c.period, c.metric, c.workload, 0 if c.metric is None else 1) for c in m
    ]


def test_average_of_two_values():
    a = matrix_from_metrics(lambda k, p: 0.2)
    b = matrix_from_metrics(lambda k, p: 0.4)
    assert all(c.metric == pytest.approx(0.3) for c in average_rw([a, b]))


def test_average_skips_undefined_entries():
    a = matrix_from_metrics(lambda k, p: 0.2 if k == 1 else None)
    b = matrix_from_metrics(lambda k, p: 0.6 if k <= 2 else None)
    avg = {(c.k, c.period): c for c in average_rw([a, b])}
    assert avg[(1, 10)].metric == pytest.approx(0.4) and avg[(1, 10)].n_samples == 2
    assert avg[(2, 10)].metric == 0.6 and avg[(2, 10)].n_samples == 1
    assert avg[(3, 10)].metric is None and avg[(3, 10)].n_samples == 0


def test_average_over_run_matches_independent_mean():
    run = run_scheme(synth(27 * 60, seed=6), SchemeConfig.periodic())
    avg = average_rw(run)
    for a in avg:
        vals = [e.matrix.cell(a.k, a.period).metric for e in run.evaluations]
        vals = [v for v in vals if v is not None]
        assert a.metric == pytest.approx(sum(vals) / len(vals))
        assert a.workload == run.evaluations[0].matrix.cell(a.k, a.period).workload


def test_average_of_nothing_fails():
    with pytest.raises(InsufficientDataError):
        average_rw([])
