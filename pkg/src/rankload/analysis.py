"""Scheme replay, periodic-vs-realtime error series, redundancy and averages."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Sequence

from .ranking import MetricKind, ranked
from .rw_model import DEFAULT_K_VALUES, RwCell, RwMatrix, build_rw_matrix
from .selection import NoDefinedCellsError, ParetoFront, Recommendation, pareto_front, recommend
from .stream import Stream
from .windowing import DEFAULT_PERIODS, SchemeConfig, evaluation_instants, horizon_before

MOVING_WINDOW = 5


class InsufficientDataError(ValueError):
    pass


@dataclass(frozen=True)
class Evaluation:
    instant: int
    matrix: RwMatrix
    front: Optional[ParetoFront]
    recommendation: Optional[Recommendation]


@dataclass(frozen=True)
class SchemeRun:
    scheme: SchemeConfig
    evaluations: tuple[Evaluation, ...]
    stream: Optional[Stream] = None
    desired_recall: float = 0.0
    epsilon: float = 0.0

    @property
    def instants(self) -> list[int]:
        return [e.instant for e in self.evaluations]


def evaluate_at(
    stream: Stream,
    instant: int,
    lookback_minutes: int,
    metric_kind=MetricKind.RECALL,
    desired_recall: float = 0.0,
    epsilon: float = 0.0,
    k_values: Sequence[int] = DEFAULT_K_VALUES,
    periods: Sequence[int] = DEFAULT_PERIODS,
) -> Evaluation:
    horizon = horizon_before(instant, lookback_minutes)
    matrix = build_rw_matrix(stream, horizon, metric_kind, k_values, periods, evaluated_at=instant)
    try:
        front = pareto_front(matrix, epsilon)
    except NoDefinedCellsError:
        return Evaluation(instant, matrix, None, None)
    return Evaluation(instant, matrix, front, recommend(front, desired_recall))


def run_scheme(
    stream: Stream,
    scheme: SchemeConfig,
    metric_kind=MetricKind.RECALL,
    desired_recall: float = 0.0,
    epsilon: float = 0.0,
    k_values: Sequence[int] = DEFAULT_K_VALUES,
    periods: Sequence[int] = DEFAULT_PERIODS,
) -> SchemeRun:
    """Build a matrix, front and recommendation at every evaluation instant.

    Horizons with no defined metric keep their matrix but carry no front.
    """
    scheme.validate_periods(periods)
    if not len(stream):
        raise InsufficientDataError("stream is empty")
    instants = evaluation_instants(stream, scheme)
    if not instants:
        raise InsufficientDataError(
            f"stream spans less than the {scheme.lookback_minutes} min lookback"
        )
    evaluations = tuple(
        evaluate_at(stream, t, scheme.lookback_minutes, metric_kind, desired_recall, epsilon, k_values, periods)
        for t in instants
    )
    return SchemeRun(scheme, evaluations, stream, desired_recall, epsilon)


@dataclass(frozen=True)
class ErrorSeries:
    instants: tuple[int, ...]
    periodic_value: tuple[Optional[float], ...]
    realtime_value: tuple[Optional[float], ...]
    difference: tuple[Optional[float], ...]
    moving_avg: tuple[Optional[float], ...]
    periodic_recall: tuple[Optional[float], ...] = ()
    realtime_recall: tuple[Optional[float], ...] = ()
    recall_difference: tuple[Optional[float], ...] = ()
    recall_moving_avg: tuple[Optional[float], ...] = ()


def forward_moving_average(values: Sequence[Optional[float]], width: int = MOVING_WINDOW) -> list[Optional[float]]:
    """Mean of values[i:i+width] ignoring missing entries; missing points stay missing."""
    out: list[Optional[float]] = []
    for i, v in enumerate(values):
        if v is None:
            out.append(None)
            continue
        window = [x for x in values[i : i + width] if x is not None]
        out.append(sum(window) / len(window))
    return out


def _pick(evaluation: Optional[Evaluation], desired_recall: float) -> Optional[Recommendation]:
    if evaluation is None or evaluation.front is None:
        return None
    return recommend(evaluation.front, desired_recall)


def error_series(periodic: SchemeRun, realtime: SchemeRun, desired_recall: float) -> ErrorSeries:
    """Periodic minus realtime recommended workload on the periodic time axis."""
    by_instant = {e.instant: e for e in realtime.evaluations}
    pw, rw, pr, rr = [], [], [], []
    for e in periodic.evaluations:
        p = _pick(e, desired_recall)
        r = _pick(by_instant.get(e.instant), desired_recall)
        pw.append(None if p is None else float(p.workload))
        rw.append(None if r is None else float(r.workload))
        pr.append(None if p is None else p.cell.metric)
        rr.append(None if r is None else r.cell.metric)

    def diff(a, b):
        return [None if x is None or y is None else x - y for x, y in zip(a, b)]

    d = diff(pw, rw)
    rd = diff(pr, rr)
    return ErrorSeries(
        tuple(periodic.instants),
        tuple(pw),
        tuple(rw),
        tuple(d),
        tuple(forward_moving_average(d)),
        tuple(pr),
        tuple(rr),
        tuple(rd),
        tuple(forward_moving_average(rd)),
    )


@dataclass(frozen=True)
class RedundancyPoint:
    instant: int
    jaccard: float
    containment: float


def overlap(probe: set, base: set) -> tuple[float, float]:
    """(Jaccard, containment of probe in base); empty probe counts as no overlap."""
    inter = len(probe & base)
    union = len(probe | base)
    jaccard = inter / union if union else 0.0
    containment = inter / len(probe) if probe else 0.0
    return jaccard, containment


def redundancy_series(run: SchemeRun, base_depth: int = 50, probe_depth: int = 10) -> list[RedundancyPoint]:
    """Overlap of each evaluation's top-base_depth alerts with the next two
    evaluations' top-probe_depth alerts, ranked over each full horizon."""
    if len(run.evaluations) < 3:
        raise InsufficientDataError("redundancy needs at least three evaluations")
    if run.stream is None:
        raise ValueError("run does not carry its stream")
    lookback = run.scheme.lookback_minutes

    def top(instant: int, depth: int) -> set[str]:
        h = horizon_before(instant, lookback)
        return {m.id for m in ranked(run.stream.between(h.start, h.end))[:depth]}

    instants = run.instants
    points = []
    for s in range(len(instants) - 2):
        base = top(instants[s], base_depth)
        probe = top(instants[s + 1], probe_depth) | top(instants[s + 2], probe_depth)
        j, c = overlap(probe, base)
        points.append(RedundancyPoint(instants[s], j, c))
    return points


@dataclass(frozen=True)
class AveragedCell:
    k: int
    period: int
    metric: Optional[float]
    workload: Fraction
    alerts_issued: float
    n_samples: int


def average_rw(run: SchemeRun | Sequence[RwMatrix]) -> list[AveragedCell]:
    """Per-(k, period) mean metric over the evaluations where it is defined."""
    matrices = [e.matrix for e in run.evaluations] if isinstance(run, SchemeRun) else list(run)
    if not matrices:
        raise InsufficientDataError("no evaluations to average")
    out = []
    for cell in matrices[0]:
        key = (cell.k, cell.period)
        entries: list[RwCell] = [m.cells[key] for m in matrices]
        defined = [c.metric for c in entries if c.metric is not None]
        out.append(
            AveragedCell(
                cell.k,
                cell.period,
                sum(defined) / len(defined) if defined else None,
                cell.workload,
                sum(c.alerts_issued for c in entries) / len(entries),
                len(defined),
            )
        )
    return out
