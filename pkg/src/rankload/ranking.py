"""Top-k rankings per sub-window and horizon-level IR metrics.

Rankings order by score (system belief); metrics count labels (ground truth).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import Optional, Sequence

from .stream import Message, Stream
from .windowing import TimeWindow, WindowSlice, partition, slice_stream


class MetricKind(str, Enum):
    RECALL = "recall_at_k"
    PRECISION = "precision_at_k"
    NDCG = "ndcg_at_k"


@dataclass(frozen=True)
class RankedList:
    window: TimeWindow
    entries: tuple[str, ...]
    k: int


def rank_key(m: Message):
    # Ties: older first, then id.
    return (-m.score, m.timestamp, m.id)


def ranked(messages: Sequence[Message]) -> list[Message]:
    return sorted(messages, key=rank_key)


def rank_top_k(window_slice: WindowSlice, k: int) -> RankedList:
    if k < 1:
        raise ValueError("k must be positive")
    top = ranked(window_slice.messages)[:k]
    return RankedList(window_slice.window, tuple(m.id for m in top), k)


def alert_set(stream: Stream, horizon: TimeWindow, k: int, period_minutes: int) -> set[str]:
    """Union of the per-sub-window top-k lists over the horizon."""
    alerts: set[str] = set()
    for window in partition(horizon, period_minutes):
        alerts.update(rank_top_k(slice_stream(stream, window), k).entries)
    return alerts


def dcg(gains: Sequence[int], k: int) -> float:
    return sum(g / math.log2(i + 2) for i, g in enumerate(gains[:k]))


def ndcg_window(ranked_labels: Sequence[bool], k: int) -> Optional[float]:
    """Binary-gain NDCG@k for one ranked sub-window; None without relevant items."""
    n_rel = sum(ranked_labels)
    if n_rel == 0:
        return None
    ideal = dcg([1] * n_rel, k)
    return dcg([int(x) for x in ranked_labels], k) / ideal


def horizon_metric(
    stream: Stream,
    horizon: TimeWindow,
    k: int,
    period_minutes: int,
    kind: MetricKind | str = MetricKind.RECALL,
) -> Optional[float]:
    """Metric of policy (k, period) over the horizon; None when undefined."""
    kind = MetricKind(kind)
    if kind is MetricKind.NDCG:
        scores = []
        for window in partition(horizon, period_minutes):
            labels = [m.label for m in ranked(stream.between(window.start, window.end))]
            value = ndcg_window(labels, k)
            if value is not None:
                scores.append(value)
        return sum(scores) / len(scores) if scores else None

    alerts = alert_set(stream, horizon, k, period_minutes)
    relevant = {m.id for m in stream.between(horizon.start, horizon.end) if m.label}
    hits = len(alerts & relevant)
    if kind is MetricKind.RECALL:
        return hits / len(relevant) if relevant else None
    return hits / len(alerts) if alerts else None
