"""CSV / JSON file formats shared by the CLI and library callers."""

from __future__ import annotations

import csv
import hashlib
import io
import json
import os
import tempfile
from fractions import Fraction
from pathlib import Path
from typing import Iterable, Optional, Sequence

from .analysis import AveragedCell, ErrorSeries, RedundancyPoint
from .ranking import MetricKind
from .rw_model import BudgetPoint, RwCell, RwMatrix, workload
from .selection import ParetoFront, Recommendation
from .stream import format_timestamp, parse_timestamp

MATRIX_HEADER = ["k", "period_min", "metric", "workload", "alerts_issued"]
FRONT_HEADER = ["k", "period_min", "metric", "workload", "on_front"]
ERROR_HEADER = ["ts", "periodic_workload", "realtime_workload", "diff", "moving_avg"]
REDUNDANCY_HEADER = ["ts", "jaccard", "containment"]
AVERAGES_HEADER = MATRIX_HEADER + ["n_samples"]
FRONTIER_HEADER = ["budget", "best_metric"]


class FormatError(ValueError):
    pass


def format_fraction(value: Fraction) -> str:
    """Terminating decimals print as decimals ("1.5"), others as "n/d"."""
    value = Fraction(value)
    den = value.denominator
    for p in (2, 5):
        while den % p == 0:
            den //= p
    if den != 1:
        return f"{value.numerator}/{value.denominator}"
    if value.denominator == 1:
        return str(value.numerator)
    digits = 0
    scaled = value
    while scaled.denominator != 1:
        scaled *= 10
        digits += 1
    sign = "-" if scaled < 0 else ""
    s = str(abs(scaled.numerator)).rjust(digits + 1, "0")
    return f"{sign}{s[:-digits]}.{s[-digits:]}"


def format_float(value: Optional[float]) -> str:
    return "" if value is None else repr(float(value))


def parse_float(text: str) -> Optional[float]:
    return None if text == "" else float(text)


def _write_rows(header: Sequence[str], rows: Iterable[Sequence]) -> str:
    buf = io.StringIO(newline="")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    writer.writerows(rows)
    return buf.getvalue()


def _read_rows(text: str, header: Sequence[str]) -> list[list[str]]:
    reader = csv.reader(io.StringIO(text, newline=""))
    got = next(reader, None)
    if got != list(header):
        raise FormatError(f"expected header {','.join(header)}, got {got}")
    return [row for row in reader if row]


def _matrix_row(c: RwCell) -> list[str]:
    return [str(c.k), str(c.period), format_float(c.metric), format_fraction(c.workload), str(c.alerts_issued)]


def matrix_to_csv(matrix: RwMatrix) -> str:
    return _write_rows(MATRIX_HEADER, (_matrix_row(c) for c in matrix))


def _cell_from_row(row: list[str], width: int) -> RwCell:
    if len(row) != width:
        raise FormatError(f"expected {width} fields, got {len(row)}")
    k, period = int(row[0]), int(row[1])
    w = Fraction(row[3])
    if w != workload(k, period):
        raise FormatError(f"workload {row[3]} for (k={k}, period={period}) disagrees with k*60/period")
    return RwCell(k, period, parse_float(row[2]), w, int(row[4]) if width == 5 and row[4] != "" else 0)


def matrix_from_csv(text: str, metric_kind=MetricKind.RECALL) -> RwMatrix:
    cells = [_cell_from_row(row, len(MATRIX_HEADER)) for row in _read_rows(text, MATRIX_HEADER)]
    if not cells:
        raise FormatError("matrix CSV has no rows")
    return RwMatrix.from_cells(cells, metric_kind=MetricKind(metric_kind))


def front_to_csv(matrix: RwMatrix, front: Optional[ParetoFront]) -> str:
    rows = []
    for c in matrix:
        on = front is not None and c in front
        rows.append([str(c.k), str(c.period), format_float(c.metric), format_fraction(c.workload), "1" if on else "0"])
    return _write_rows(FRONT_HEADER, rows)


def recommendation_json(rec: Recommendation, **extra) -> str:
    return json.dumps({**extra, **rec.to_dict()}, sort_keys=False)


def error_to_csv(series: ErrorSeries) -> str:
    rows = zip(
        (format_timestamp(t) for t in series.instants),
        map(format_float, series.periodic_value),
        map(format_float, series.realtime_value),
        map(format_float, series.difference),
        map(format_float, series.moving_avg),
    )
    return _write_rows(ERROR_HEADER, rows)


def error_from_csv(text: str) -> list[dict]:
    return [
        {
            "ts": parse_timestamp(r[0]),
            "periodic_workload": parse_float(r[1]),
            "realtime_workload": parse_float(r[2]),
            "diff": parse_float(r[3]),
            "moving_avg": parse_float(r[4]),
        }
        for r in _read_rows(text, ERROR_HEADER)
    ]


def redundancy_to_csv(points: Sequence[RedundancyPoint]) -> str:
    return _write_rows(
        REDUNDANCY_HEADER,
        ([format_timestamp(p.instant), format_float(p.jaccard), format_float(p.containment)] for p in points),
    )


def averages_to_csv(cells: Sequence[AveragedCell]) -> str:
    rows = (
        [
            str(c.k),
            str(c.period),
            format_float(c.metric),
            format_fraction(c.workload),
            format_float(c.alerts_issued),
            str(c.n_samples),
        ]
        for c in cells
    )
    return _write_rows(AVERAGES_HEADER, rows)


def averages_to_matrix(cells: Sequence[AveragedCell]) -> RwMatrix:
    return RwMatrix.from_cells([RwCell(c.k, c.period, c.metric, c.workload) for c in cells])


def frontier_to_csv(points: Sequence[BudgetPoint]) -> str:
    return _write_rows(FRONTIER_HEADER, ([format_fraction(p.budget), format_float(p.best_metric)] for p in points))


def frontier_from_csv(text: str) -> list[BudgetPoint]:
    return [BudgetPoint(Fraction(r[0]), float(r[1])) for r in _read_rows(text, FRONTIER_HEADER)]


# Replay output: per-evaluation rows prefixed with the evaluation timestamp.

def timed_matrices_to_csv(items: Sequence[tuple[int, RwMatrix]]) -> str:
    rows = ([format_timestamp(ts)] + _matrix_row(c) for ts, m in items for c in m)
    return _write_rows(["ts"] + MATRIX_HEADER, rows)


def timed_matrices_from_csv(text: str, metric_kind=MetricKind.RECALL) -> list[tuple[int, RwMatrix]]:
    grouped: dict[int, list[RwCell]] = {}
    for row in _read_rows(text, ["ts"] + MATRIX_HEADER):
        grouped.setdefault(parse_timestamp(row[0]), []).append(_cell_from_row(row[1:], len(MATRIX_HEADER)))
    return [
        (ts, RwMatrix.from_cells(cells, metric_kind=MetricKind(metric_kind), evaluated_at=ts))
        for ts, cells in sorted(grouped.items())
    ]


def timed_fronts_to_csv(items: Sequence[tuple[int, RwMatrix, Optional[ParetoFront]]]) -> str:
    lines = []
    for ts, matrix, front in items:
        body = front_to_csv(matrix, front).splitlines()[1:]
        lines.extend(f"{format_timestamp(ts)},{line}" for line in body)
    header = ",".join(["ts"] + FRONT_HEADER)
    return "".join(line + "\n" for line in [header] + lines)


def digest_bytes(data: bytes) -> str:
    return "sha256:" + hashlib.sha256(data).hexdigest()


def atomic_write(path: Path | str, data: str | bytes) -> None:
    """Write via a sibling temp file and rename so readers never see partial output."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    payload = data.encode("utf-8") if isinstance(data, str) else data
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(payload)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
