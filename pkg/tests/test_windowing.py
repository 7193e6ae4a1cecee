import warnings

import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import T0, make_stream
from rankload.stream import SynthConfig, generate_stream
from rankload.windowing import (
    InsufficientHistoryWarning,
    SchemeConfig,
    TimeWindow,
    evaluation_instants,
    partition,
    slice_stream,
)

H = 3600


def lengths(windows):
    return [w.minutes for w in windows]


def test_partition_exact_division():
    assert lengths(partition(TimeWindow(T0, T0 + H), 20)) == [20, 20, 20]


def test_partition_truncated_tail():
    assert lengths(partition(TimeWindow(T0, T0 + H), 40)) == [40, 20]


def test_partition_day_by_fifty():
    # 1440 = 28 * 50 + 40
    assert lengths(partition(TimeWindow(T0, T0 + 24 * H), 50)) == [50] * 28 + [40]


def test_partition_rejects_period_longer_than_horizon():
    with pytest.raises(ValueError):
        partition(TimeWindow(T0, T0 + H), 61)


@given(st.integers(1, 2000), st.integers(1, 200))
def test_partition_is_contiguous_and_sums_to_horizon(horizon_min, period):
    if period > horizon_min:
        return
    h = TimeWindow(T0, T0 + horizon_min * 60)
    ws = partition(h, period)
    assert ws[0].start == h.start and ws[-1].end == h.end
    assert all(a.end == b.start for a, b in zip(ws, ws[1:]))
    assert sum(w.seconds for w in ws) == h.seconds
    assert all(w.minutes == period for w in ws[:-1])


@given(st.integers(1, 12), st.integers(1, 6), st.integers(1, 30))
def test_divisible_partition_refines_coarse(fine, mult, horizon_mult):
    coarse = fine * mult
    h = TimeWindow(T0, T0 + coarse * horizon_mult * 60)
    fine_bounds = {w.start for w in partition(h, fine)}
    assert {w.start for w in partition(h, coarse)} <= fine_bounds


def test_slice_half_open():
    s = make_stream([(0, 1, 1), (60, 1, 0), (120, 1, 1)])
    assert len(slice_stream(s, TimeWindow(T0, T0 + 121)).messages) == 3
    assert len(slice_stream(s, TimeWindow(T0 - 100, T0)).messages) == 0
    assert [m.timestamp - T0 for m in slice_stream(s, TimeWindow(T0, T0 + 120)).messages] == [0, 60]


@given(st.lists(st.integers(0, 7200), max_size=40), st.sampled_from([10, 20, 30, 40, 50, 60]))
def test_slice_concatenation_matches_horizon(offsets, period):
    s = make_stream([(o, i, i % 2) for i, o in enumerate(offsets)])
    h = TimeWindow(T0, T0 + 2 * H)
    joined = []
    for w in partition(h, period):
        joined.extend(slice_stream(s, w).messages)
    assert tuple(joined) == slice_stream(s, h).messages


def test_periodic_instants_over_48_hours():
    s = make_stream([(0, 0, 0), (48 * H, 0, 0)])
    instants = evaluation_instants(s, SchemeConfig.periodic())
    # whole hours from 24 h through 48 h
    assert len(instants) == 25
    assert instants[0] == T0 + 24 * H and instants[-1] == T0 + 48 * H


def test_realtime_instants_single_hour():
    s = make_stream([(0, 0, 0), (H, 0, 0)])
    assert evaluation_instants(s, SchemeConfig.realtime()) == [T0 + H]


def test_short_stream_warns_and_returns_nothing():
    s = make_stream([(0, 0, 0), (30 * 60, 0, 0)])
    with pytest.warns(InsufficientHistoryWarning):
        assert evaluation_instants(s, SchemeConfig.periodic()) == []


def test_instants_align_to_wall_clock():
    s = make_stream([(17 * 60 + 5, 0, 0), (30 * H, 0, 0)])
    instants = evaluation_instants(s, SchemeConfig.periodic())
    assert instants[0] == T0 + 25 * H
    assert all((t - T0) % H == 0 for t in instants)


def test_synthetic_48h_stream_has_25_periodic_instants():
    s = generate_stream(SynthConfig(seed=1, duration_minutes=48 * 60))
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        assert len(evaluation_instants(s, SchemeConfig.periodic())) == 25


def test_scheme_config_validation():
    assert SchemeConfig.periodic() == SchemeConfig("periodic", 1440, 60)
    assert SchemeConfig.realtime() == SchemeConfig("realtime", 60, 1)
    with pytest.raises(ValueError):
        SchemeConfig("hourly", 60, 1)
    with pytest.raises(ValueError):
        SchemeConfig("periodic", 30, 60)
    with pytest.raises(ValueError):
        SchemeConfig.realtime(30).validate_periods([10, 60])
