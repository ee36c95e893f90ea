"""Command-line front end.

Exit codes: 0 success; 1 findings (model violations, printed-score
discrepancies, or a nonempty diff); 2 parse or I/O error; 3 bad
invocation. Standard output is byte-identical across runs on identical
inputs; ``report --stamp`` opts in to a timestamp. ANSI styling on stderr
is dropped when TMDL_NO_COLOR is set or stderr is not a terminal.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from datetime import datetime, timezone
from decimal import Decimal, InvalidOperation
from pathlib import Path

from tmdl import corpus_path
from tmdl.dread import band_of, compute_score, rank_threats, verify_printed
from tmdl.figures import render_figures
from tmdl.model import ThreatModel, tenths_to_decimal, validate_model
from tmdl.parser import TmdlParseError, parse_model
from tmdl.report import (
    DREAD_HEADER,
    csv_table,
    markdown_table,
    diff_models,
    render_diff,
    render_dot,
    render_dread_table,
    render_report,
)
from tmdl.stride import DEFAULT_MATRIX, generate_candidates, parse_matrix, validate_assignments

EXIT_OK = 0
EXIT_FINDINGS = 1
EXIT_IO = 2
EXIT_USAGE = 3


class _Failure(Exception):
    """Abort the command with a status and a message for stderr."""

    def __init__(self, status: int, message: str):
        super().__init__(message)
        self.status = status


class _ArgumentParser(argparse.ArgumentParser):
    def error(self, message: str):
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _style(text: str, sgr: str) -> str:
    if os.environ.get("TMDL_NO_COLOR") or not sys.stderr.isatty():
        return text
    return f"\x1b[{sgr}m{text}\x1b[0m"


def _read_text(path: str) -> str:
    try:
        return Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise _Failure(EXIT_IO, f"cannot read {path}: {exc.strerror or exc}")


def _parse(path: str) -> ThreatModel:
    try:
        return parse_model(_read_text(path))
    except TmdlParseError as exc:
        raise _Failure(
            EXIT_IO,
            f"{path}:{exc.line}:{exc.column}: expected {exc.expected}, found {exc.found}",
        )


def _load_matrix(path: str | None):
    if path is None:
        return DEFAULT_MATRIX
    try:
        return parse_matrix(_read_text(path))
    except TmdlParseError as exc:
        raise _Failure(
            EXIT_IO,
            f"{path}:{exc.line}:{exc.column}: expected {exc.expected}, found {exc.found}",
        )


def _print_violations(path: str, model: ThreatModel, violations) -> None:
    for v in violations:
        span = model.spans.get(v.offender)
        location = f"{path}:{span[0]}:{span[1]}" if span else path
        print(_style(f"{location}: [{v.rule}] {v.message}", "31"), file=sys.stderr)


def _require_valid(path: str, model: ThreatModel) -> None:
    violations = validate_model(model)
    if violations:
        _print_violations(path, model, violations)
        raise _Failure(EXIT_FINDINGS, f"{path}: model has {len(violations)} violation(s)")


def _write_output(path: str, content: str) -> None:
    try:
        Path(path).write_text(content, encoding="utf-8")
    except OSError as exc:
        raise _Failure(EXIT_IO, f"cannot write {path}: {exc.strerror or exc}")


def cmd_validate(args) -> int:
    model = _parse(args.model)
    violations = validate_model(model)
    if not violations:
        violations = validate_assignments(model, _load_matrix(args.matrix))
    if violations:
        _print_violations(args.model, model, violations)
        return EXIT_FINDINGS
    return EXIT_OK


def _score_rows(model: ThreatModel, args) -> list[dict]:
    """Row dicts for the score table, honoring --rank/--min-score/--top."""
    threats = {t.id: t for t in model.threats}
    if args.rank:
        ordered = [(r.rank, threats[r.threat_id]) for r in rank_threats(model)]
    else:
        ordered = [(None, t) for t in sorted(model.threats, key=lambda t: t.id)]
    rows = []
    for rank, t in ordered:
        score = compute_score(t.dread)
        if args.min_score is not None and Decimal(score.tenths) < args.min_score * 10:
            continue
        row = {
            "id": t.id,
            "title": t.title,
            "target": t.target,
            "category": t.category.value,
            "dread": list(t.dread.components()),
            "score": score.display,
            "severity": band_of(score).value,
        }
        if rank is not None:
            row["rank"] = rank
        rows.append(row)
    if args.top is not None:
        rows = rows[: args.top]
    return rows


def cmd_score(args) -> int:
    model = _parse(args.model)
    _require_valid(args.model, model)
    rows = _score_rows(model, args)
    if args.format == "json":
        print(json.dumps(rows, indent=2, ensure_ascii=False))
        return EXIT_OK
    header = DREAD_HEADER
    cells = [
        [str(r["id"]), r["title"], *[str(c) for c in r["dread"]], r["score"]] for r in rows
    ]
    if args.rank:
        header = ("Rank",) + DREAD_HEADER
        cells = [[str(r["rank"])] + row for r, row in zip(rows, cells)]
    if args.format == "csv":
        sys.stdout.write(csv_table(header, cells))
    else:
        sys.stdout.write(markdown_table(header, cells))
    return EXIT_OK


def cmd_verify(args) -> int:
    model = _parse(args.model)
    _require_valid(args.model, model)
    discrepancies = verify_printed(model)
    for d in discrepancies:
        print(
            f"threat {d.threat_id}: printed {tenths_to_decimal(d.printed_tenths)}, "
            f"computed {d.computed.display}"
        )
    return EXIT_FINDINGS if discrepancies else EXIT_OK


def cmd_generate(args) -> int:
    model = _parse(args.model)
    _require_valid(args.model, model)
    matrix = _load_matrix(args.matrix)
    candidates = [c for c in generate_candidates(model, matrix) if not c.covered]
    next_id = max((t.id for t in model.threats), default=0) + 1
    snippets = []
    for offset, c in enumerate(candidates):
        title = c.template_title.replace("\\", "\\\\").replace('"', '\\"')
        snippets.append(
            f'threat {next_id + offset} "{title}" on {c.target} {{\n'
            f"  # {c.rule}; rate before adopting\n"
            f"  category = {c.category.value}\n"
            f"  dread = [1, 1, 1, 1, 1]\n"
            f"}}"
        )
    if snippets:
        print("\n\n".join(snippets))
    return EXIT_OK


def cmd_report(args) -> int:
    model = _parse(args.model)
    _require_valid(args.model, model)
    stamp = None
    if args.stamp:
        stamp = datetime.now(timezone.utc).isoformat(timespec="seconds")
    wrote_something = False
    if args.output:
        _write_output(args.output, render_report(model, stamp=stamp))
        wrote_something = True
    if args.csv:
        _write_output(args.csv, render_dread_table(model, "csv"))
        wrote_something = True
    if args.dot:
        _write_output(args.dot, render_dot(model))
        wrote_something = True
    if args.figures:
        try:
            render_figures(model, Path(args.figures))
        except OSError as exc:
            raise _Failure(EXIT_IO, f"cannot write figures to {args.figures}: {exc}")
        wrote_something = True
    if not wrote_something:
        sys.stdout.write(render_report(model, stamp=stamp))
    return EXIT_OK


def cmd_diff(args) -> int:
    diff = diff_models(_parse(args.model_a), _parse(args.model_b))
    sys.stdout.write(render_diff(diff))
    return EXIT_OK if diff.is_empty else EXIT_FINDINGS


def _decimal(text: str) -> Decimal:
    try:
        return Decimal(text)
    except InvalidOperation:
        raise argparse.ArgumentTypeError(f"invalid score threshold {text!r}")


def build_parser() -> argparse.ArgumentParser:
    parser = _ArgumentParser(
        prog="tmdl",
        description="Threat-model-as-code: validate, score, and report on TMDL models.",
        epilog=f"Bundled example model: {corpus_path()}",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", help="check model invariants and category assignments")
    p.add_argument("model", help="path to a .tmdl file")
    p.add_argument("--matrix", help="applicability matrix override file")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("score", help="print the DREAD scoring table")
    p.add_argument("model")
    p.add_argument("--format", choices=("md", "csv", "json"), default="md")
    p.add_argument("--rank", action="store_true", help="order by rank instead of id")
    p.add_argument("--min-score", type=_decimal, default=None, metavar="X",
                   help="only rows with computed score >= X")
    p.add_argument("--top", type=int, default=None, metavar="N", help="keep the first N rows")
    p.set_defaults(func=cmd_score)

    p = sub.add_parser("verify", help="compare printed scores against recomputed means")
    p.add_argument("model")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("generate", help="print uncovered candidate threats as TMDL snippets")
    p.add_argument("model")
    p.add_argument("--matrix", help="applicability matrix override file")
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("report", help="write Markdown/CSV/DOT reports and figures")
    p.add_argument("model")
    p.add_argument("-o", "--output", help="Markdown report path")
    p.add_argument("--csv", help="CSV scoring table path")
    p.add_argument("--dot", help="DOT graph path")
    p.add_argument("--figures", help="directory for PNG charts")
    p.add_argument("--stamp", action="store_true", help="include a generation timestamp")
    p.set_defaults(func=cmd_report)

    p = sub.add_parser("diff", help="compare two models")
    p.add_argument("model_a")
    p.add_argument("model_b")
    p.set_defaults(func=cmd_diff)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else EXIT_USAGE
    try:
        return args.func(args)
    except _Failure as failure:
        print(_style(str(failure), "31"), file=sys.stderr)
        return failure.status


if __name__ == "__main__":
    sys.exit(main())
