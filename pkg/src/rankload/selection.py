"""Pareto-optimal policy selection and greedy baselines.

Objectives: maximize the metric, minimize workload. Epsilon is applied in a
normalized space where workload is divided by the matrix's largest workload.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Sequence

from .rw_model import RwCell, RwMatrix

PARETO = "pareto"
GREEDY_MAX_RECALL = "greedy_max_recall"
GREEDY_MIN_WORKLOAD = "greedy_min_workload"


class NoDefinedCellsError(ValueError):
    pass


def dominates(a: RwCell, b: RwCell, epsilon: float = 0.0, workload_scale=60) -> bool:
    """True when `a` (epsilon-)dominates `b`.

    With epsilon == 0 this is strict Pareto dominance on exact values. With
    epsilon > 0 it is additive epsilon-dominance, which is reflexive.
    """
    if a.metric is None or b.metric is None:
        raise ValueError("dominance is undefined for cells without a metric")
    if epsilon < 0:
        raise ValueError("epsilon must be non-negative")
    if epsilon == 0:
        return (
            a.metric >= b.metric
            and a.workload <= b.workload
            and (a.metric > b.metric or a.workload < b.workload)
        )
    scale = float(workload_scale)
    return a.metric + epsilon >= b.metric and float(a.workload) / scale - epsilon <= float(b.workload) / scale


def preference_key(cell: RwCell):
    """Among otherwise equal cells prefer fewer interruptions, then fewer alerts."""
    return (-cell.period, cell.k)


@dataclass(frozen=True)
class ParetoFront:
    cells: tuple[RwCell, ...]
    epsilon: float = 0.0
    workload_scale: Fraction = Fraction(60)

    def __len__(self) -> int:
        return len(self.cells)

    def __iter__(self):
        return iter(self.cells)

    def __contains__(self, cell) -> bool:
        return any((c.k, c.period) == (cell.k, cell.period) for c in self.cells)


def _exact_front(cells: Sequence[RwCell]) -> list[RwCell]:
    """Non-dominated cells via a workload-ordered sweep (exact arithmetic)."""
    by_workload: dict[Fraction, list[RwCell]] = {}
    for c in cells:
        by_workload.setdefault(c.workload, []).append(c)
    front = []
    best_below = None
    for w in sorted(by_workload):
        group = by_workload[w]
        top = max(c.metric for c in group)
        if best_below is None or top > best_below:
            front.extend(c for c in group if c.metric == top)
            best_below = top
    return front


def _thin(front: list[RwCell], epsilon: float, scale: float) -> list[RwCell]:
    """Pick a subset of an exact 2-D front that is mutually non-epsilon-dominated
    yet epsilon-dominates every dropped member.

    On a front sorted by workload each member covers a contiguous run of
    neighbours, so a valid subset is a chain of members whose runs tile the
    front without any member falling into another's run. The shortest such
    chain is found by dynamic programming; ties resolve by preference_key.
    """
    # Collapse exact duplicates; they epsilon-dominate each other.
    unique: dict[tuple, RwCell] = {}
    for c in sorted(front, key=preference_key):
        unique.setdefault((c.workload, c.metric), c)
    pts = sorted(unique.values(), key=lambda c: (c.workload, c.metric))
    n = len(pts)
    wn = [float(c.workload) / scale for c in pts]
    m = [c.metric for c in pts]
    # Same float expressions as dominates() so both agree on every pair.
    lo = [min(j for j in range(i + 1) if wn[i] - epsilon <= wn[j]) for i in range(n)]
    hi = [max(j for j in range(i, n) if m[i] + epsilon >= m[j]) for i in range(n)]

    # best[i]: (chain length, preference keys) of the best chain from i to the end.
    best: list[Optional[tuple]] = [None] * n
    nxt: list[Optional[int]] = [None] * n
    for i in range(n - 1, -1, -1):
        if hi[i] == n - 1:
            best[i] = (1, (preference_key(pts[i]),))
            continue
        for j in range(hi[i] + 1, n):
            if lo[j] > hi[i] + 1:
                break
            if lo[j] <= i or best[j] is None:
                continue
            cand = (best[j][0] + 1, (preference_key(pts[i]),) + best[j][1])
            if best[i] is None or cand < best[i]:
                best[i], nxt[i] = cand, j
    starts = [i for i in range(n) if lo[i] == 0 and best[i] is not None]
    if not starts:
        raise RuntimeError("no epsilon-kernel exists for this front")
    i = min(starts, key=lambda s: best[s])
    chosen = []
    while i is not None:
        chosen.append(pts[i])
        i = nxt[i]
    return chosen


def pareto_front(matrix: RwMatrix | Sequence[RwCell], epsilon: float = 0.0, workload_scale=None) -> ParetoFront:
    """Epsilon-non-dominated subset of the matrix's defined cells.

    Members are ordered by workload ascending.
    """
    if epsilon < 0:
        raise ValueError("epsilon must be non-negative")
    cells = list(matrix.defined_cells() if isinstance(matrix, RwMatrix) else [c for c in matrix if c.defined])
    if not cells:
        raise NoDefinedCellsError("no defined cells to select from")
    if workload_scale is None:
        if isinstance(matrix, RwMatrix):
            workload_scale = matrix.max_workload
        else:
            workload_scale = max(c.workload for c in matrix)
    scale = Fraction(workload_scale)
    front = _exact_front(cells)
    if epsilon > 0:
        front = _thin(front, epsilon, float(scale))
    front.sort(key=lambda c: (c.workload, -c.metric, preference_key(c)))
    return ParetoFront(tuple(front), epsilon, scale)


@dataclass(frozen=True)
class Recommendation:
    cell: Optional[RwCell]
    policy: str
    feasible: bool
    desired_recall: Optional[float] = None
    budget: Optional[Fraction] = None
    skipped: bool = False

    @property
    def workload(self) -> Fraction:
        return self.cell.workload if self.cell is not None else Fraction(0)

    def to_dict(self) -> dict:
        c = self.cell
        return {
            "k": c.k if c else None,
            "period_min": c.period if c else None,
            "metric": c.metric if c else None,
            "workload": float(c.workload) if c else 0.0,
            "policy": self.policy,
            "feasible": self.feasible,
        }


def _best_effort_key(c: RwCell):
    return (-c.metric, c.workload, *preference_key(c))


def recommend(front: ParetoFront, desired_recall: float) -> Recommendation:
    """Cheapest front cell reaching the desired metric, else the best-effort maximum."""
    if not len(front):
        raise NoDefinedCellsError("front is empty")
    qualifying = [c for c in front if c.metric >= desired_recall]
    if qualifying:
        cell = min(qualifying, key=lambda c: (c.workload, *preference_key(c)))
        return Recommendation(cell, PARETO, True, desired_recall)
    cell = min(front, key=_best_effort_key)
    return Recommendation(cell, PARETO, False, desired_recall)


def greedy_max_recall(matrix: RwMatrix, desired_recall: float = 0.0) -> Recommendation:
    """Workload-blind baseline: the highest-metric cell anywhere in the matrix."""
    cells = matrix.defined_cells()
    if not cells:
        raise NoDefinedCellsError("no defined cells to select from")
    cell = min(cells, key=_best_effort_key)
    return Recommendation(cell, GREEDY_MAX_RECALL, cell.metric >= desired_recall, desired_recall)


def greedy_min_workload(matrix: RwMatrix, desired_recall: float = 0.0) -> Recommendation:
    """Metric-blind baseline: the first minimum-workload cell in row-major order."""
    cells = matrix.defined_cells()
    if not cells:
        raise NoDefinedCellsError("no defined cells to select from")
    lowest = min(c.workload for c in cells)
    cell = next(c for c in cells if c.workload == lowest)
    return Recommendation(cell, GREEDY_MIN_WORKLOAD, cell.metric >= desired_recall, desired_recall)


@dataclass(frozen=True)
class BudgetConfig:
    total_budget: Fraction
    horizon_count: int

    def __post_init__(self):
        object.__setattr__(self, "total_budget", Fraction(self.total_budget))
        if self.total_budget <= 0:
            raise ValueError("total budget must be positive")
        if self.horizon_count < 1:
            raise ValueError("horizon_count must be positive")

    @property
    def allowance(self) -> Fraction:
        return self.total_budget / self.horizon_count


@dataclass
class _Ledger:
    spent: Fraction = Fraction(0)
    carry: Fraction = Fraction(0)
    log: list = field(default_factory=list)


def budgeted_schedule(
    matrices: Sequence[RwMatrix],
    budget: BudgetConfig,
    desired_recall: float,
    epsilon: float = 0.0,
) -> list[Recommendation]:
    """Per-evaluation Pareto recommendations under a cumulative workload budget.

    Each evaluation may spend its uniform allowance plus whatever earlier
    evaluations left unspent; the running total never exceeds the budget.
    """
    state = _Ledger()
    out = []
    for matrix in matrices:
        available = min(state.carry + budget.allowance, budget.total_budget - state.spent)
        affordable = [c for c in matrix.defined_cells() if c.workload <= available]
        if affordable:
            front = pareto_front(affordable, epsilon, workload_scale=matrix.max_workload)
            rec = recommend(front, desired_recall)
            rec = Recommendation(rec.cell, rec.policy, rec.feasible, desired_recall, available)
        else:
            rec = Recommendation(None, PARETO, False, desired_recall, available, skipped=True)
        state.spent += rec.workload
        state.carry = available - rec.workload
        out.append(rec)
    assert state.spent <= budget.total_budget
    return out
