"""Workload-bounded top-k alert policy selection over scored message streams."""

__version__ = "0.1.0"

from .analysis import average_rw, error_series, redundancy_series, run_scheme
from .ranking import MetricKind, alert_set, horizon_metric, rank_top_k
from .rw_model import RwCell, RwMatrix, budget_frontier, build_rw_matrix, workload
from .selection import (
    BudgetConfig,
    ParetoFront,
    Recommendation,
    budgeted_schedule,
    dominates,
    greedy_max_recall,
    greedy_min_workload,
    pareto_front,
    recommend,
)
from .stream import Message, Stream, SynthConfig, dump_stream, generate_stream, load_stream
from .windowing import SchemeConfig, TimeWindow, evaluation_instants, partition, slice_stream

__all__ = [
    "BudgetConfig",
    "Message",
    "MetricKind",
    "ParetoFront",
    "Recommendation",
    "RwCell",
    "RwMatrix",
    "SchemeConfig",
    "Stream",
    "SynthConfig",
    "TimeWindow",
    "alert_set",
    "average_rw",
    "budget_frontier",
    "budgeted_schedule",
    "build_rw_matrix",
    "dominates",
    "dump_stream",
    "error_series",
    "evaluation_instants",
    "generate_stream",
    "greedy_max_recall",
    "greedy_min_workload",
    "horizon_metric",
    "load_stream",
    "pareto_front",
    "partition",
    "rank_top_k",
    "recommend",
    "redundancy_series",
    "run_scheme",
    "slice_stream",
    "workload",
]
