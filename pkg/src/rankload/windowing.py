"""Horizon partitioning and evaluation schedules."""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from typing import Literal

from .stream import Message, Stream

DEFAULT_PERIODS = (10, 20, 30, 40, 50, 60)


class InsufficientHistoryWarning(UserWarning):
    pass


@dataclass(frozen=True, order=True)
class TimeWindow:
    """Half-open interval [start, end) in epoch seconds."""

    start: int
    end: int

    def __post_init__(self):
        if not self.start < self.end:
            raise ValueError(f"window start {self.start} must precede end {self.end}")

    @property
    def seconds(self) -> int:
        return self.end - self.start

    @property
    def minutes(self) -> int:
        return self.seconds // 60

    def __contains__(self, ts: int) -> bool:
        return self.start <= ts < self.end


@dataclass(frozen=True)
class WindowSlice:
    window: TimeWindow
    messages: tuple[Message, ...]


@dataclass(frozen=True)
class SchemeConfig:
    mode: Literal["periodic", "realtime"]
    lookback_minutes: int
    cadence_minutes: int

    def __post_init__(self):
        if self.mode not in ("periodic", "realtime"):
            raise ValueError(f"unknown scheme mode {self.mode!r}")
        if self.lookback_minutes < 1 or self.cadence_minutes < 1:
            raise ValueError("lookback and cadence must be positive")
        if self.cadence_minutes > self.lookback_minutes:
            raise ValueError("cadence must not exceed lookback")

    @classmethod
    def periodic(cls, lookback_minutes: int = 24 * 60) -> "SchemeConfig":
        return cls("periodic", lookback_minutes, 60)

    @classmethod
    def realtime(cls, lookback_minutes: int = 60) -> "SchemeConfig":
        return cls("realtime", lookback_minutes, 1)

    @classmethod
    def for_mode(cls, mode: str, lookback_minutes: int | None = None) -> "SchemeConfig":
        factory = {"periodic": cls.periodic, "realtime": cls.realtime}.get(mode)
        if factory is None:
            raise ValueError(f"unknown scheme mode {mode!r}")
        return factory() if lookback_minutes is None else factory(lookback_minutes)

    def validate_periods(self, periods) -> None:
        if max(periods) > self.lookback_minutes:
            raise ValueError(
                f"lookback {self.lookback_minutes} min is shorter than period {max(periods)} min"
            )


def partition(horizon: TimeWindow, period_minutes: int) -> list[TimeWindow]:
    """Contiguous sub-windows of `period_minutes` anchored at horizon.start.

    A final shorter window absorbs any remainder.
    """
    if period_minutes < 1:
        raise ValueError("period must be at least one minute")
    step = period_minutes * 60
    if step > horizon.seconds:
        raise ValueError(f"period {period_minutes} min is longer than the horizon")
    windows = []
    start = horizon.start
    while start < horizon.end:
        end = min(start + step, horizon.end)
        windows.append(TimeWindow(start, end))
        start = end
    return windows


def slice_stream(stream: Stream, window: TimeWindow) -> WindowSlice:
    return WindowSlice(window, stream.between(window.start, window.end))


def evaluation_instants(stream: Stream, scheme: SchemeConfig) -> list[int]:
    """Wall-clock aligned instants whose full lookback lies inside the stream span.

    Each instant t implies the horizon [t - lookback, t).
    """
    span = stream.span
    if span is None:
        raise ValueError("stream is empty")
    cadence = scheme.cadence_minutes * 60
    lookback = scheme.lookback_minutes * 60
    earliest = span[0] + lookback
    first = -(-earliest // cadence) * cadence
    instants = list(range(first, span[1] + 1, cadence))
    if not instants:
        warnings.warn(
            f"stream span is shorter than the {scheme.lookback_minutes} min lookback",
            InsufficientHistoryWarning,
            stacklevel=2,
        )
    return instants


def horizon_before(instant: int, lookback_minutes: int) -> TimeWindow:
    return TimeWindow(instant - lookback_minutes * 60, instant)
