"""Ranking-workload matrices and attention-budget frontiers."""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterator, Optional, Sequence

from .ranking import MetricKind, dcg, ranked
from .stream import Stream
from .windowing import DEFAULT_PERIODS, TimeWindow, partition

DEFAULT_K_VALUES = tuple(range(1, 11))
WORKLOAD_HORIZON_MINUTES = 60


class EmptyFrontierWarning(UserWarning):
    pass


def workload(k: int, period_minutes: int, horizon_minutes: int = WORKLOAD_HORIZON_MINUTES) -> Fraction:
    """Alerts a user must review per horizon: k * horizon / period, exactly."""
    if k < 1 or period_minutes < 1 or horizon_minutes < 1:
        raise ValueError("k, period and horizon must be positive")
    if period_minutes > horizon_minutes:
        raise ValueError(f"period {period_minutes} exceeds horizon {horizon_minutes}")
    return Fraction(k * horizon_minutes, period_minutes)


@dataclass(frozen=True)
class RwCell:
    k: int
    period: int
    metric: Optional[float]
    workload: Fraction
    alerts_issued: int = 0

    def __post_init__(self):
        if self.metric is not None and not 0.0 <= self.metric <= 1.0:
            raise ValueError(f"metric {self.metric} outside [0, 1]")

    @property
    def defined(self) -> bool:
        return self.metric is not None


@dataclass(frozen=True)
class RwMatrix:
    cells: dict[tuple[int, int], RwCell]
    k_values: tuple[int, ...] = DEFAULT_K_VALUES
    periods: tuple[int, ...] = DEFAULT_PERIODS
    metric_kind: MetricKind = MetricKind.RECALL
    evaluated_at: Optional[int] = None
    horizon: Optional[TimeWindow] = None
    _order: tuple[RwCell, ...] = field(default=(), init=False, repr=False, compare=False)

    def __post_init__(self):
        expected = {(k, p) for k in self.k_values for p in self.periods}
        if set(self.cells) != expected or len(self.cells) != len(self.k_values) * len(self.periods):
            raise ValueError("matrix grid is incomplete or has stray cells")
        for (k, p), cell in self.cells.items():
            if (cell.k, cell.period) != (k, p):
                raise ValueError(f"cell keyed {(k, p)} holds ({cell.k}, {cell.period})")
        order = tuple(self.cells[(k, p)] for k in sorted(self.k_values) for p in sorted(self.periods))
        object.__setattr__(self, "_order", order)

    def __iter__(self) -> Iterator[RwCell]:
        """Row-major: k ascending, then period ascending."""
        return iter(self._order)

    def __len__(self) -> int:
        return len(self._order)

    def cell(self, k: int, period: int) -> RwCell:
        return self.cells[(k, period)]

    def defined_cells(self) -> list[RwCell]:
        return [c for c in self._order if c.defined]

    @property
    def max_workload(self) -> Fraction:
        return max(c.workload for c in self._order)

    @classmethod
    def from_cells(cls, cells: Sequence[RwCell], **kwargs) -> "RwMatrix":
        k_values = tuple(sorted({c.k for c in cells}))
        periods = tuple(sorted({c.period for c in cells}))
        return cls({(c.k, c.period): c for c in cells}, k_values, periods, **kwargs)


def _window_rankings(stream: Stream, horizon: TimeWindow, period: int) -> list[list[bool]]:
    return [[m.label for m in ranked(stream.between(w.start, w.end))] for w in partition(horizon, period)]


def _column(windows: list[list[bool]], k_values: Sequence[int], kind: MetricKind) -> dict[int, tuple]:
    # Sub-windows are disjoint, so the union of top-k lists has size sum(min(k, n_w)).
    total_relevant = sum(sum(labels) for labels in windows)
    prefix = []
    for labels in windows:
        acc = [0]
        for x in labels:
            acc.append(acc[-1] + x)
        prefix.append(acc)
    out = {}
    for k in k_values:
        issued = sum(min(k, len(labels)) for labels in windows)
        hits = sum(acc[min(k, len(acc) - 1)] for acc in prefix)
        if kind is MetricKind.RECALL:
            metric = hits / total_relevant if total_relevant else None
        elif kind is MetricKind.PRECISION:
            metric = hits / issued if issued else None
        else:
            vals = []
            for labels, acc in zip(windows, prefix):
                n_rel = acc[-1]
                if n_rel:
                    vals.append(dcg([int(x) for x in labels], k) / dcg([1] * n_rel, k))
            metric = sum(vals) / len(vals) if vals else None
        out[k] = (metric, issued)
    return out


def build_rw_matrix(
    stream: Stream,
    horizon: TimeWindow,
    metric_kind: MetricKind | str = MetricKind.RECALL,
    k_values: Sequence[int] = DEFAULT_K_VALUES,
    periods: Sequence[int] = DEFAULT_PERIODS,
    evaluated_at: Optional[int] = None,
) -> RwMatrix:
    """Evaluate every (k, period) policy over one horizon.

    Workload is always normalized to a 60-minute hour so matrices built over
    different lookbacks share one workload grid.
    """
    kind = MetricKind(metric_kind)
    k_values = tuple(sorted(set(k_values)))
    periods = tuple(sorted(set(periods)))
    cells = {}
    for p in periods:
        column = _column(_window_rankings(stream, horizon, p), k_values, kind)
        for k in k_values:
            metric, issued = column[k]
            cells[(k, p)] = RwCell(k, p, metric, workload(k, p), issued)
    return RwMatrix(
        cells,
        k_values,
        periods,
        kind,
        evaluated_at=horizon.end if evaluated_at is None else evaluated_at,
        horizon=horizon,
    )


@dataclass(frozen=True)
class BudgetPoint:
    budget: Fraction
    best_metric: float


def budget_frontier(matrix: RwMatrix) -> list[BudgetPoint]:
    """Best attainable metric for each workload budget present in the matrix."""
    defined = sorted(matrix.defined_cells(), key=lambda c: c.workload)
    if not defined:
        warnings.warn("matrix has no defined cells; frontier is empty", EmptyFrontierWarning, stacklevel=2)
        return []
    points: list[BudgetPoint] = []
    best = 0.0
    for cell in defined:
        best = max(best, cell.metric)
        if points and points[-1].budget == cell.workload:
            points[-1] = BudgetPoint(cell.workload, best)
        else:
            points.append(BudgetPoint(cell.workload, best))
    return points
