"""rankload command line.

Exit codes: 0 ok, 2 usage or bad input, 3 infeasible recommendation,
4 insufficient data.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import warnings
from fractions import Fraction
from pathlib import Path
from typing import Optional, Sequence

from . import __version__
from .analysis import (
    Evaluation,
    InsufficientDataError,
    SchemeRun,
    average_rw,
    error_series,
    redundancy_series,
    run_scheme,
)
from .formats import (
    FormatError,
    atomic_write,
    averages_to_csv,
    averages_to_matrix,
    digest_bytes,
    error_to_csv,
    frontier_to_csv,
    matrix_from_csv,
    matrix_to_csv,
    recommendation_json,
    redundancy_to_csv,
    timed_fronts_to_csv,
    timed_matrices_from_csv,
    timed_matrices_to_csv,
)
from .ranking import MetricKind
from .rw_model import DEFAULT_K_VALUES, budget_frontier, build_rw_matrix
from .selection import BudgetConfig, NoDefinedCellsError, budgeted_schedule, pareto_front, recommend
from .stream import StreamError, SynthConfig, dump_stream, format_timestamp, generate_stream, load_stream, parse_timestamp
from .windowing import DEFAULT_PERIODS, SchemeConfig, evaluation_instants, horizon_before

EXIT_OK, EXIT_USAGE, EXIT_INFEASIBLE, EXIT_INSUFFICIENT = 0, 2, 3, 4
SEED_ENV = "RANKLOAD_SEED"
MANIFEST = "manifest.json"


class CliError(Exception):
    def __init__(self, message: str, code: int = EXIT_USAGE):
        super().__init__(message)
        self.code = code


def _int_list(text: str) -> tuple[int, ...]:
    """"1-10" or "10,20,30" (ranges may be mixed in)."""
    values = []
    try:
        for part in text.split(","):
            if "-" in part:
                lo, hi = part.split("-", 1)
                values.extend(range(int(lo), int(hi) + 1))
            else:
                values.append(int(part))
    except ValueError:
        raise argparse.ArgumentTypeError(f"invalid integer list {text!r}") from None
    if not values or min(values) < 1:
        raise argparse.ArgumentTypeError("values must be positive integers")
    return tuple(sorted(set(values)))


def _unit_interval(text: str) -> float:
    value = float(text)
    if not 0.0 <= value <= 1.0:
        raise argparse.ArgumentTypeError(f"{text} is not in [0, 1]")
    return value


def _non_negative(text: str) -> float:
    value = float(text)
    if value < 0:
        raise argparse.ArgumentTypeError(f"{text} must be non-negative")
    return value


def _fraction(text: str) -> Fraction:
    try:
        value = Fraction(text)
    except (ValueError, ZeroDivisionError):
        raise argparse.ArgumentTypeError(f"invalid number {text!r}") from None
    if value <= 0:
        raise argparse.ArgumentTypeError("budget must be positive")
    return value


def _stream_format(path: Path, fmt: Optional[str]) -> str:
    if fmt:
        return fmt
    return "csv" if path.suffix.lower() == ".csv" else "jsonl"


def _read_input(path: str, fmt: Optional[str]):
    p = Path(path)
    try:
        data = p.read_bytes()
    except OSError as exc:
        raise CliError(f"cannot read {path}: {exc.strerror}") from None
    try:
        stream = load_stream(data, _stream_format(p, fmt))
    except StreamError as exc:
        raise CliError(f"{path}: {exc}") from None
    return stream, digest_bytes(data)


def _manifest(argv: Sequence[str], config: dict, digest: Optional[str], seed, outputs: list[str]) -> str:
    body = {
        "tool": "rankload",
        "version": __version__,
        "command": list(argv),
        "config": config,
        "input_digest": digest,
        "seed": seed,
        "outputs": sorted(outputs),
    }
    return json.dumps(body, indent=2, sort_keys=True) + "\n"


def _read_manifest(run_dir: str) -> dict:
    path = Path(run_dir) / MANIFEST
    try:
        return json.loads(path.read_text())
    except OSError:
        raise CliError(f"{run_dir} has no {MANIFEST}") from None


def cmd_synth(args, argv) -> int:
    seed = args.seed
    if os.environ.get(SEED_ENV):
        try:
            seed = int(os.environ[SEED_ENV])
        except ValueError:
            raise CliError(f"{SEED_ENV} must be an integer") from None
    try:
        start = parse_timestamp(args.start) if args.start else SynthConfig.start
        config = SynthConfig(
            seed=seed,
            duration_minutes=args.minutes,
            arrival_rate=args.rate,
            relevance_prob=args.prob,
            relevant_mean=args.relevant_mean,
            other_mean=args.other_mean,
            score_sigma=args.sigma,
            start=start,
        )
    except (ValueError, StreamError) as exc:
        raise CliError(str(exc)) from None
    out = Path(args.out)
    fmt = _stream_format(out, args.format)
    data = dump_stream(generate_stream(config), fmt)
    atomic_write(out, data)
    snapshot = {k: getattr(config, k) for k in config.__dataclass_fields__}
    snapshot["format"] = fmt
    manifest_path = out.with_name(out.name + ".manifest.json")
    atomic_write(manifest_path, _manifest(argv, snapshot, digest_bytes(data), seed, [out.name]))
    return EXIT_OK


def cmd_matrix(args, argv) -> int:
    stream, digest = _read_input(args.input, args.format)
    if not len(stream):
        raise CliError("input stream is empty", EXIT_INSUFFICIENT)
    span = stream.span
    if args.at is not None:
        at = parse_timestamp(args.at)
    else:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            instants = evaluation_instants(stream, SchemeConfig("periodic", args.lookback, min(60, args.lookback)))
        if not instants:
            raise CliError("stream is shorter than the lookback", EXIT_INSUFFICIENT)
        at = instants[-1]
    if at - args.lookback * 60 < span[0] or at > span[1]:
        raise CliError(
            f"horizon [{format_timestamp(at - args.lookback * 60)}, {format_timestamp(at)}) "
            f"is not inside the stream span",
            EXIT_INSUFFICIENT,
        )
    try:
        matrix = build_rw_matrix(
            stream, horizon_before(at, args.lookback), args.metric, args.k_values, args.periods, evaluated_at=at
        )
    except ValueError as exc:
        raise CliError(str(exc)) from None
    out = Path(args.out)
    atomic_write(out, matrix_to_csv(matrix))
    config = {
        "at": format_timestamp(at),
        "lookback_min": args.lookback,
        "metric": MetricKind(args.metric).value,
        "k_values": list(args.k_values),
        "periods": list(args.periods),
    }
    atomic_write(out.with_name(out.name + ".manifest.json"), _manifest(argv, config, digest, None, [out.name]))
    return EXIT_OK


def cmd_replay(args, argv) -> int:
    stream, digest = _read_input(args.input, args.format)
    scheme = SchemeConfig.for_mode(args.scheme, args.lookback)
    try:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            run = run_scheme(
                stream, scheme, args.metric, args.desired_recall, args.epsilon, args.k_values, args.periods
            )
    except InsufficientDataError as exc:
        raise CliError(str(exc), EXIT_INSUFFICIENT) from None
    except ValueError as exc:
        raise CliError(str(exc)) from None

    recs = [e.recommendation for e in run.evaluations]
    if args.budget is not None:
        budget = BudgetConfig(args.budget, len(run.evaluations))
        recs = budgeted_schedule([e.matrix for e in run.evaluations], budget, args.desired_recall, args.epsilon)

    lines = []
    for e, rec in zip(run.evaluations, recs):
        record = {"ts": format_timestamp(e.instant)}
        if rec is None:
            record.update(k=None, period_min=None, metric=None, workload=0.0, policy="pareto", feasible=False)
        else:
            record.update(rec.to_dict())
        record["skipped"] = rec is None or rec.skipped
        lines.append(json.dumps(record))

    out_dir = Path(args.out_dir)
    outputs = {
        "matrices.csv": timed_matrices_to_csv([(e.instant, e.matrix) for e in run.evaluations]),
        "fronts.csv": timed_fronts_to_csv([(e.instant, e.matrix, e.front) for e in run.evaluations]),
        "recommendations.jsonl": "".join(line + "\n" for line in lines),
    }
    for name, text in outputs.items():
        atomic_write(out_dir / name, text)
    config = {
        "scheme": scheme.mode,
        "lookback_min": scheme.lookback_minutes,
        "cadence_min": scheme.cadence_minutes,
        "metric": MetricKind(args.metric).value,
        "desired_recall": args.desired_recall,
        "epsilon": args.epsilon,
        "budget": None if args.budget is None else str(args.budget),
        "k_values": list(args.k_values),
        "periods": list(args.periods),
        "evaluations": len(run.evaluations),
    }
    atomic_write(out_dir / MANIFEST, _manifest(argv, config, digest, None, list(outputs)))
    return EXIT_OK


def _load_run(run_dir: str, desired_recall: Optional[float] = None) -> tuple[dict, SchemeRun]:
    manifest = _read_manifest(run_dir)
    cfg = manifest["config"]
    try:
        timed = timed_matrices_from_csv((Path(run_dir) / "matrices.csv").read_text(), cfg["metric"])
    except OSError:
        raise CliError(f"{run_dir} has no matrices.csv") from None
    except (FormatError, ValueError) as exc:
        raise CliError(f"{run_dir}/matrices.csv: {exc}") from None
    scheme = SchemeConfig(cfg["scheme"], cfg["lookback_min"], cfg["cadence_min"])
    dr = cfg["desired_recall"] if desired_recall is None else desired_recall
    evaluations = []
    for ts, matrix in timed:
        try:
            front = pareto_front(matrix, cfg["epsilon"])
        except NoDefinedCellsError:
            evaluations.append(Evaluation(ts, matrix, None, None))
            continue
        evaluations.append(Evaluation(ts, matrix, front, recommend(front, dr)))
    return manifest, SchemeRun(scheme, tuple(evaluations), None, dr, cfg["epsilon"])


def cmd_analyze(args, argv) -> int:
    out = Path(args.out)
    if args.analysis == "error":
        pm, periodic = _load_run(args.periodic, args.desired_recall)
        rm, realtime = _load_run(args.realtime, args.desired_recall)
        if pm["input_digest"] != rm["input_digest"]:
            raise CliError("runs were produced from different inputs (digest mismatch)")
        atomic_write(out, error_to_csv(error_series(periodic, realtime, args.desired_recall)))
    elif args.analysis == "redundancy":
        stream, digest = _read_input(args.input, args.format)
        if args.run:
            manifest, run = _load_run(args.run)
            if manifest["input_digest"] != digest:
                raise CliError("input does not match the run's input digest")
            run = SchemeRun(run.scheme, run.evaluations, stream)
        else:
            try:
                with warnings.catch_warnings():
                    warnings.simplefilter("ignore")
                    run = run_scheme(stream, SchemeConfig.for_mode(args.scheme, args.lookback))
            except InsufficientDataError as exc:
                raise CliError(str(exc), EXIT_INSUFFICIENT) from None
        try:
            points = redundancy_series(run, args.base_depth, args.probe_depth)
        except InsufficientDataError as exc:
            raise CliError(str(exc), EXIT_INSUFFICIENT) from None
        atomic_write(out, redundancy_to_csv(points))
    elif args.analysis == "frontier":
        if bool(args.matrix) == bool(args.run):
            raise CliError("give exactly one of --matrix or --run")
        if args.matrix:
            matrix = _read_matrix(args.matrix)
        else:
            matrix = averages_to_matrix(average_rw(_load_run(args.run)[1]))
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            points = budget_frontier(matrix)
        if not points:
            raise CliError("matrix has no defined cells", EXIT_INSUFFICIENT)
        atomic_write(out, frontier_to_csv(points))
    elif args.analysis == "averages":
        _, run = _load_run(args.run)
        atomic_write(out, averages_to_csv(average_rw(run)))
    return EXIT_OK


def _read_matrix(path: str):
    try:
        return matrix_from_csv(Path(path).read_text())
    except OSError as exc:
        raise CliError(f"cannot read {path}: {exc.strerror}") from None
    except (FormatError, ValueError) as exc:
        raise CliError(f"{path}: {exc}") from None


def cmd_recommend(args, argv) -> int:
    matrix = _read_matrix(args.matrix)
    try:
        front = pareto_front(matrix, args.epsilon)
    except NoDefinedCellsError as exc:
        raise CliError(str(exc), EXIT_INSUFFICIENT) from None
    rec = recommend(front, args.desired_recall)
    print(recommendation_json(rec))
    return EXIT_OK if rec.feasible else EXIT_INFEASIBLE


def _add_grid_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--metric", default=MetricKind.RECALL.value, choices=[m.value for m in MetricKind])
    p.add_argument("--k-values", type=_int_list, default=DEFAULT_K_VALUES, help="e.g. 1-10")
    p.add_argument("--periods", type=_int_list, default=DEFAULT_PERIODS, help="minutes, e.g. 10,20,30,40,50,60")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="rankload", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"rankload {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth", help="write a seeded synthetic stream")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--minutes", type=int, default=1440)
    p.add_argument("--rate", type=float, default=2.0, help="mean messages per minute")
    p.add_argument("--prob", type=float, default=0.3, help="probability a message is relevant")
    p.add_argument("--relevant-mean", type=float, default=1.0)
    p.add_argument("--other-mean", type=float, default=0.0)
    p.add_argument("--sigma", type=float, default=1.0)
    p.add_argument("--start", help="RFC 3339 start instant")
    p.add_argument("--format", choices=["jsonl", "csv"])
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("matrix", help="build one RW matrix")
    p.add_argument("--input", required=True)
    p.add_argument("--format", choices=["jsonl", "csv"])
    p.add_argument("--at", help="evaluation instant (default: last whole hour with full history)")
    p.add_argument("--lookback", type=int, default=24 * 60, help="minutes")
    _add_grid_flags(p)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_matrix)

    p = sub.add_parser("replay", help="replay a periodic or realtime scheme")
    p.add_argument("--input", required=True)
    p.add_argument("--format", choices=["jsonl", "csv"])
    p.add_argument("--scheme", choices=["periodic", "realtime"], default="periodic")
    p.add_argument("--lookback", type=int, help="minutes (default 1440 periodic, 60 realtime)")
    p.add_argument("--desired-recall", type=_unit_interval, default=0.6)
    p.add_argument("--epsilon", type=_non_negative, default=0.0)
    p.add_argument("--budget", type=_fraction, help="total workload budget over the run")
    _add_grid_flags(p)
    p.add_argument("--out-dir", required=True)
    p.set_defaults(func=cmd_replay)

    p = sub.add_parser("analyze", help="derive series from replay outputs")
    asub = p.add_subparsers(dest="analysis", required=True)
    a = asub.add_parser("error")
    a.add_argument("--periodic", required=True, help="periodic replay directory")
    a.add_argument("--realtime", required=True, help="realtime replay directory")
    a.add_argument("--desired-recall", type=_unit_interval, default=0.6)
    a.add_argument("--out", required=True)
    a = asub.add_parser("redundancy")
    a.add_argument("--input", required=True)
    a.add_argument("--format", choices=["jsonl", "csv"])
    a.add_argument("--run", help="replay directory to take instants from")
    a.add_argument("--scheme", choices=["periodic", "realtime"], default="periodic")
    a.add_argument("--lookback", type=int)
    a.add_argument("--base-depth", type=int, default=50)
    a.add_argument("--probe-depth", type=int, default=10)
    a.add_argument("--out", required=True)
    a = asub.add_parser("frontier")
    a.add_argument("--matrix", help="matrix CSV")
    a.add_argument("--run", help="replay directory (frontier of the averaged matrix)")
    a.add_argument("--out", required=True)
    a = asub.add_parser("averages")
    a.add_argument("--run", required=True)
    a.add_argument("--out", required=True)
    for a in asub.choices.values():
        a.set_defaults(func=cmd_analyze)

    p = sub.add_parser("recommend", help="recommend a policy from a matrix CSV")
    p.add_argument("--matrix", required=True)
    p.add_argument("--desired-recall", type=_unit_interval, required=True)
    p.add_argument("--epsilon", type=_non_negative, default=0.0)
    p.set_defaults(func=cmd_recommend)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args, argv)
    except CliError as exc:
        print(f"rankload: error: {exc}", file=sys.stderr)
        return exc.code


if __name__ == "__main__":
    sys.exit(main())
