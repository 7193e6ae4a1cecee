import random
from fractions import Fraction

import pytest

from rankload.rw_model import RwCell, RwMatrix, workload
from rankload.stream import Message, Stream

T0 = 1371686400  # 2013-06-20T00:00:00Z, hour aligned


def make_stream(rows):
    """rows: (ts_offset_seconds, score, label[, id])"""
    msgs = []
    for i, row in enumerate(rows):
        off, score, label = row[:3]
        mid = row[3] if len(row) > 3 else f"x{i:04d}"
        msgs.append(Message(mid, T0 + off, float(score), bool(label)))
    return Stream(tuple(msgs))


def random_matrix(rng: random.Random, k_values=range(1, 11), periods=(10, 20, 30, 40, 50, 60), undefined=0.0):
    cells = []
    for k in k_values:
        for p in periods:
            m = None if rng.random() < undefined else rng.random()
            cells.append(RwCell(k, p, m, workload(k, p)))
    return RwMatrix.from_cells(cells)


def matrix_from_metrics(metric_fn, k_values=range(1, 11), periods=(10, 20, 30, 40, 50, 60)):
    return RwMatrix.from_cells([RwCell(k, p, metric_fn(k, p), workload(k, p)) for k in k_values for p in periods])


@pytest.fixture
def rng():
    return random.Random(12345)


ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)
