"""Scored message streams: loading, serialization and synthetic generation."""

from __future__ import annotations

import bisect
import csv
import io
import json
import math
from dataclasses import dataclass, field
from datetime import datetime, timezone
from typing import Iterable, Optional, Sequence

import numpy as np

FORMATS = ("jsonl", "csv")
CSV_COLUMNS = ["id", "ts", "score", "label", "text"]

# 2013-06-20T00:00:00Z
DEFAULT_SYNTH_START = 1371686400


class StreamError(ValueError):
    """Raised when a stream source violates the record contract."""


@dataclass(frozen=True)
class Message:
    id: str
    timestamp: int  # epoch seconds, UTC
    score: float
    label: bool
    text: Optional[str] = None

    def __post_init__(self):
        if not isinstance(self.id, str) or not self.id:
            raise StreamError("message id must be a non-empty string")
        if not math.isfinite(self.score):
            raise StreamError(f"non-finite score for message {self.id!r}")


@dataclass(frozen=True)
class Stream:
    """Immutable, timestamp-ordered collection of messages."""

    messages: tuple[Message, ...] = ()
    _timestamps: list[int] = field(default_factory=list, init=False, repr=False, compare=False)

    def __post_init__(self):
        ordered = tuple(sorted(self.messages, key=lambda m: (m.timestamp, m.id)))
        seen: set[str] = set()
        for m in ordered:
            if m.id in seen:
                raise StreamError(f"duplicate id {m.id!r}")
            seen.add(m.id)
        object.__setattr__(self, "messages", ordered)
        object.__setattr__(self, "_timestamps", [m.timestamp for m in ordered])

    def __len__(self) -> int:
        return len(self.messages)

    def __iter__(self):
        return iter(self.messages)

    @property
    def span(self) -> Optional[tuple[int, int]]:
        """(first, last) timestamp, or None for an empty stream."""
        if not self.messages:
            return None
        return self._timestamps[0], self._timestamps[-1]

    def between(self, start: int, end: int) -> tuple[Message, ...]:
        """Messages with start <= ts < end, in stream order."""
        lo = bisect.bisect_left(self._timestamps, start)
        hi = bisect.bisect_left(self._timestamps, end)
        return self.messages[lo:hi]


def parse_timestamp(value) -> int:
    """Accept RFC 3339 strings or integer epoch seconds; floor to whole seconds."""
    if isinstance(value, bool):
        raise StreamError(f"unparseable timestamp {value!r}")
    if isinstance(value, int):
        return value
    if isinstance(value, str):
        text = value.strip()
        if text.lstrip("-").isdigit():
            return int(text)
        if text.endswith(("Z", "z")):
            text = text[:-1] + "+00:00"
        try:
            dt = datetime.fromisoformat(text)
        except ValueError:
            raise StreamError(f"unparseable timestamp {value!r}") from None
        if dt.tzinfo is None:
            raise StreamError(f"timestamp without UTC offset {value!r}")
        return math.floor(dt.timestamp())
    raise StreamError(f"unparseable timestamp {value!r}")


def format_timestamp(ts: int) -> str:
    return datetime.fromtimestamp(ts, tz=timezone.utc).strftime("%Y-%m-%dT%H:%M:%SZ")


def _parse_score(value, rid: str) -> float:
    if isinstance(value, bool):
        raise StreamError(f"invalid score for {rid!r}")
    try:
        score = float(value)
    except (TypeError, ValueError):
        raise StreamError(f"invalid score {value!r} for {rid!r}") from None
    if not math.isfinite(score):
        raise StreamError(f"non-finite score for {rid!r}")
    return score


def _records_jsonl(text: str) -> Iterable[tuple[int, dict]]:
    # split on "\n" only; splitlines() would also break on U+0085 etc. inside text fields
    for lineno, line in enumerate(text.split("\n"), start=1):
        if not line.strip():
            continue
        try:
            rec = json.loads(line)
        except json.JSONDecodeError as exc:
            raise StreamError(f"line {lineno}: invalid JSON ({exc.msg})") from None
        if not isinstance(rec, dict):
            raise StreamError(f"line {lineno}: record is not an object")
        label = rec.get("label")
        if not isinstance(label, bool):
            raise StreamError(f"line {lineno}: unknown label token {label!r}")
        yield lineno, rec


def _records_csv(text: str) -> Iterable[tuple[int, dict]]:
    reader = csv.reader(io.StringIO(text, newline=""))
    header = next(reader, None)
    if header is None:
        return
    if [h.strip() for h in header] != CSV_COLUMNS:
        raise StreamError(f"CSV header must be {','.join(CSV_COLUMNS)}")
    for lineno, row in enumerate(reader, start=2):
        if not row:
            continue
        if len(row) != len(CSV_COLUMNS):
            raise StreamError(f"line {lineno}: expected {len(CSV_COLUMNS)} fields")
        rid, ts, score, label, text_field = row
        if label not in ("0", "1"):
            raise StreamError(f"line {lineno}: unknown label token {label!r}")
        yield lineno, {
            "id": rid,
            "ts": ts,
            "score": score,
            "label": label == "1",
            "text": text_field if text_field != "" else None,
        }


def load_stream(source: bytes, format: str = "jsonl") -> Stream:
    """Parse a JSONL or CSV byte source into a validated, sorted Stream."""
    if format not in FORMATS:
        raise StreamError(f"unknown format {format!r}")
    try:
        text = source.decode("utf-8")
    except UnicodeDecodeError:
        raise StreamError("source is not valid UTF-8") from None
    records = _records_jsonl(text) if format == "jsonl" else _records_csv(text)
    messages = []
    for lineno, rec in records:
        for key in ("id", "ts", "score", "label"):
            if key not in rec:
                raise StreamError(f"line {lineno}: missing field {key!r}")
        rid = rec["id"]
        if not isinstance(rid, str) or not rid:
            raise StreamError(f"line {lineno}: id must be a non-empty string")
        text_value = rec.get("text")
        if text_value is not None and not isinstance(text_value, str):
            raise StreamError(f"line {lineno}: text must be a string")
        messages.append(
            Message(
                id=rid,
                timestamp=parse_timestamp(rec["ts"]),
                score=_parse_score(rec["score"], rid),
                label=rec["label"],
                text=text_value,
            )
        )
    return Stream(tuple(messages))


def dump_stream(stream: Stream, format: str = "jsonl") -> bytes:
    """Serialize so that load_stream(dump_stream(s, f), f) == s."""
    if format == "jsonl":
        lines = []
        for m in stream:
            rec = {"id": m.id, "ts": format_timestamp(m.timestamp), "score": m.score, "label": m.label}
            if m.text is not None:
                rec["text"] = m.text
            lines.append(json.dumps(rec, ensure_ascii=False))
        return "".join(line + "\n" for line in lines).encode("utf-8")
    if format == "csv":
        buf = io.StringIO(newline="")
        # CRLF terminator makes the writer quote bare CR/LF inside text fields
        writer = csv.writer(buf, lineterminator="\r\n")
        writer.writerow(CSV_COLUMNS)
        for m in stream:
            if m.text and "\x00" in m.text:
                raise StreamError(f"CSV cannot carry NUL characters (message {m.id!r})")
            writer.writerow(
                [m.id, format_timestamp(m.timestamp), repr(m.score), "1" if m.label else "0", m.text or ""]
            )
        return buf.getvalue().encode("utf-8")
    raise StreamError(f"unknown format {format!r}")


@dataclass(frozen=True)
class SynthConfig:
    seed: int = 0
    duration_minutes: int = 1440
    arrival_rate: float = 2.0
    relevance_prob: float = 0.3
    relevant_mean: float = 1.0
    other_mean: float = 0.0
    score_sigma: float = 1.0
    start: int = DEFAULT_SYNTH_START

    def __post_init__(self):
        if not 0 <= self.seed < 2**64:
            raise ValueError("seed must be a 64-bit unsigned integer")
        if self.duration_minutes < 1:
            raise ValueError("duration_minutes must be positive")
        if not self.arrival_rate > 0:
            raise ValueError("arrival_rate must be positive")
        if not 0 <= self.relevance_prob <= 1:
            raise ValueError("relevance_prob must lie in [0, 1]")
        if not self.relevant_mean > self.other_mean:
            raise ValueError("relevant_mean must exceed other_mean")
        if not self.score_sigma > 0:
            raise ValueError("score_sigma must be positive")


def generate_stream(config: SynthConfig) -> Stream:
    """Stationary Poisson arrivals with Gaussian class-conditional scores.

    The total count is Poisson(rate * duration); given the count, arrivals
    are uniform over the duration at second resolution. The first and last
    arrivals are pinned to the boundaries so the span equals the duration.
    Scores are rounded to six decimals for stable serialized output.
    """
    rng = np.random.default_rng(config.seed)
    seconds = config.duration_minutes * 60
    total = max(2, int(rng.poisson(config.arrival_rate * config.duration_minutes)))
    inner = np.sort(rng.integers(0, seconds + 1, size=total - 2))
    stamps = config.start + np.concatenate(([0], inner, [seconds]))
    labels = rng.random(total) < config.relevance_prob
    means = np.where(labels, config.relevant_mean, config.other_mean)
    scores = np.round(rng.normal(means, config.score_sigma), 6)
    width = max(6, len(str(total)))
    messages = [
        Message(id=f"m{i:0{width}d}", timestamp=int(stamps[i]), score=float(scores[i]), label=bool(labels[i]))
        for i in range(total)
    ]
    return Stream(tuple(messages))


def relevant_ids(messages: Sequence[Message]) -> set[str]:
    return {m.id for m in messages if m.label}
