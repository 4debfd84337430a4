"""Command line interface.

Exit codes: 0 success, 2 bad arguments, 3 refused long run, 4 invalid
protocol file.
"""

from __future__ import annotations

import argparse
import csv
import io
import logging
import sys
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path

from . import __version__
from .game import SearchTooLarge, classical_optimum, noncontextual_bound
from .linalg import TOL
from .optimizer import OptConfig, seesaw_optimize
from .protocols import SUPPORTED, builtin_protocol
from .quantum import (
    InvalidProtocol,
    QuantumProtocol,
    check_parity_oblivious,
    load_protocol,
    per_string_success,
    success_probability,
    violation_ratio,
)

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_TOO_LONG = 3
EXIT_INVALID = 4


def fmt6(x: float) -> str:
    return f"{float(x):.6g}"


def fmt_exact(q: Fraction) -> str:
    """``"5/8 = 0.625"`` when six digits are exact, ``"2/3 ≈ 0.666667"`` otherwise."""
    dec = fmt6(q)
    sign = "=" if Fraction(dec) == q else "≈"
    return f"{q.numerator}/{q.denominator} {sign} {dec}"


@dataclass
class ReportRow:
    d: int
    classical: Fraction
    quantum: float
    ratio: float
    parity_deviation: float
    source: str


@dataclass
class RunReport:
    rows: list[ReportRow]

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["d", "classical", "quantum", "ratio"])
        for r in self.rows:
            writer.writerow([r.d, repr(float(r.classical)), repr(r.quantum), repr(r.ratio)])
        return buf.getvalue()

    def to_markdown(self) -> str:
        lines = [
            "| d | classical | quantum | ratio | parity deviation | source |",
            "|---|---|---|---|---|---|",
        ]
        for r in self.rows:
            lines.append(
                f"| {r.d} | {fmt_exact(r.classical)} | {fmt6(r.quantum)} | {fmt6(r.ratio)} "
                f"| {r.parity_deviation:.2e} | {r.source} |"
            )
        return "\n".join(lines) + "\n"


def build_report(d_list, source: str = "auto", restarts: int | None = None, seed: int = 0) -> RunReport:
    """Recompute classical bound, quantum value and ratio for each d.

    ``source="auto"`` uses the built-in protocol where one exists and the
    optimizer otherwise.
    """
    rows = []
    for d in d_list:
        classical = noncontextual_bound(d)
        use_builtin = source == "builtin" or (source == "auto" and d in SUPPORTED)
        if use_builtin:
            proto = builtin_protocol(d)
            label = "builtin"
        else:
            cfg = OptConfig(d, seed=seed) if restarts is None else OptConfig(d, restarts=restarts, seed=seed)
            proto = seesaw_optimize(cfg).best_protocol
            label = "optimized"
        q = success_probability(proto)
        dev = check_parity_oblivious(proto).max_deviation
        rows.append(ReportRow(d, classical, q, violation_ratio(q, classical), dev, label))
    return RunReport(rows)


def _d_arg(text: str) -> int:
    try:
        d = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}") from None
    if d < 2:
        raise argparse.ArgumentTypeError(f"d must be >= 2, got {d}")
    return d


def _d_list(text: str) -> list[int]:
    return [_d_arg(part) for part in text.split(",") if part.strip()]


def _load(source: str, tol: float | None) -> QuantumProtocol:
    if source.startswith("builtin:"):
        d = int(source.split(":", 1)[1])
        proto = builtin_protocol(d)
    else:
        proto = load_protocol(source, TOL if tol is None else tol)
    if tol is not None:
        proto = QuantumProtocol(proto.d, proto.dim, proto.states, proto.measurements, tol)
    proto.validate()
    return proto


def cmd_bound(args) -> int:
    print(fmt_exact(noncontextual_bound(args.d)))
    return EXIT_OK


def cmd_classical(args) -> int:
    try:
        value, strategy = classical_optimum(
            args.d, not args.no_parity, allow_long=args.allow_long, workers=args.workers
        )
    except SearchTooLarge as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_TOO_LONG
    print(f"{value.numerator}/{value.denominator}")
    print(f"# {fmt_exact(value)}; bound (d+1)/2d = {fmt_exact(noncontextual_bound(args.d))}")
    print(strategy.to_text(), end="")
    if args.out:
        Path(args.out).write_text(strategy.to_text())
    return EXIT_OK


def cmd_eval(args) -> int:
    try:
        proto = _load(args.source, args.tol)
        value = success_probability(proto)
        report = check_parity_oblivious(proto)
    except InvalidProtocol as exc:
        print(f"invalid protocol: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    bound = noncontextual_bound(proto.d)
    print(f"d: {proto.d}  dim: {proto.dim}  tolerance: {proto.tol:g}")
    print(f"success: {fmt6(value)}")
    print(f"parity deviation: {report.max_deviation:.3e} ({'ok' if report.ok else 'FAILS'})")
    print(f"noncontextual bound: {fmt_exact(bound)}")
    print(f"ratio: {fmt6(violation_ratio(value, bound))}")
    print("string  P(guess x1)  P(guess x2)")
    for label, (p1, p2) in per_string_success(proto).items():
        print(f"{label:>6}  {p1:11.6f}  {p2:11.6f}")
    return EXIT_OK


def cmd_optimize(args) -> int:
    cfg = OptConfig(
        args.d,
        restarts=args.restarts,
        max_iters=args.max_iters,
        seed=args.seed,
    )
    result = seesaw_optimize(cfg, workers=args.workers)
    bound = noncontextual_bound(args.d)
    print(f"best: {fmt6(result.best_value)} (restart {result.best_restart})")
    print(f"noncontextual bound: {fmt_exact(bound)}")
    print(f"ratio: {fmt6(violation_ratio(result.best_value, bound))}")
    print(f"converged restarts: {sum(result.converged_flags)}/{cfg.restarts}")
    if args.out:
        sidecar = result.save(args.out)
        print(f"wrote {args.out} and {sidecar}")
    return EXIT_OK


def cmd_report(args) -> int:
    report = build_report(args.d_list, args.source, args.restarts, args.seed)
    print(report.to_csv() if args.format == "csv" else report.to_markdown(), end="")
    return EXIT_OK


def make_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="porac", description="Parity-oblivious d-level random access codes.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("bound", help="exact noncontextual bound (d+1)/(2d)")
    p.add_argument("d", type=_d_arg)
    p.set_defaults(func=cmd_bound)

    p = sub.add_parser("classical", help="exhaustive classical optimum with a witness strategy")
    p.add_argument("d", type=_d_arg)
    p.add_argument("--allow-long", action="store_true", help="permit the d=4 search (4**16 encodings)")
    p.add_argument("--no-parity", action="store_true", help="drop the parity-oblivious constraint")
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--out", help="write the optimal strategy here")
    p.set_defaults(func=cmd_classical)

    p = sub.add_parser("eval", help="evaluate a protocol file or builtin:<d>")
    p.add_argument("source")
    p.add_argument("--tol", type=float, default=None, help="validation tolerance")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("optimize", help="search for a violating protocol")
    p.add_argument("d", type=_d_arg)
    p.add_argument("--restarts", type=int, default=OptConfig.restarts)
    p.add_argument("--seed", type=int, default=OptConfig.seed)
    p.add_argument("--max-iters", type=int, default=OptConfig.max_iters)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--out", help="protocol JSON path; a .meta.json sidecar is written next to it")
    p.set_defaults(func=cmd_optimize)

    p = sub.add_parser("report", help="classical / quantum / ratio table")
    p.add_argument("--d-list", type=_d_list, default=[3, 4, 5])
    p.add_argument("--format", choices=("md", "csv"), default="md")
    p.add_argument("--source", choices=("auto", "builtin", "optimized"), default="auto")
    p.add_argument("--restarts", type=int, default=None)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_report)
    return parser


def main(argv=None) -> int:
    parser = make_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    try:
        return args.func(args)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
