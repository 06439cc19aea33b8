"""Command-line front end.

Data goes to standard output and diagnostics to standard error. Exit status
is 0 when nothing of warning severity or worse was found, 1 when something
was, and 2 when an input could not be read.
"""

from __future__ import annotations

import argparse
import datetime as dt
import logging
import os
import sys
import time
from dataclasses import replace
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path
from typing import Sequence, TextIO

from . import __version__
from .changelog import diff_workbooks, render_change_table
from .classify import compute_coverage
from .docschema import (
    CellOrigin, DocFinding, DocRecord, Severity, records_from_workbook, validate_doc_record,
)
from .errors import ConfigError, FixtureSyntaxError, IngestError, InvalidEnumValue, UnknownField
from .ingest import IngestReport, load_vba_modules, load_workbook, read_vba_module
from .ingest.common import VBA_SUFFIXES
from .inventory import (
    RISK_METRICS, ManifestEntry, ManifestFile, load_weights, scan_workbook,
)
from .macros import MacroModule, lint_macros, parse_macro_headers
from .reports import (
    DocTable, build_attribute_map, build_doc_table, coverage_code_map, filter_sort, parse_filter,
    render_map, render_table,
)
from .tabular import OutputFormat, render_rows, to_json

log = logging.getLogger("sheetdoc")

EXIT_CLEAN, EXIT_FINDINGS, EXIT_FATAL = 0, 1, 2
FATAL_ERRORS = (OSError, IngestError, FixtureSyntaxError, ConfigError, InvalidEnumValue,
                UnknownField, ValueError)

FINDING_COLUMNS = ("Severity", "Code", "Location", "Message")


class InputError(Exception):
    """An input path is missing or unusable."""


def _load(path: str, err: TextIO) -> IngestReport:
    if not Path(path).exists():
        raise InputError(f"{path}: no such file")
    report = load_workbook(path)
    for note in report.observations:
        print(f"{path}: note: {note}", file=err)
    return report


def _load_many(paths: Sequence[str], jobs: int | None, err: TextIO, fn):
    """Run ``fn(path)`` for every path in parallel; results come back in path order."""
    ordered = sorted(paths)
    for path in ordered:
        if not Path(path).exists():
            raise InputError(f"{path}: no such file")
    workers = max(1, jobs or os.cpu_count() or 1)
    if workers == 1 or len(ordered) == 1:
        return [fn(p) for p in ordered]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, ordered))


def _finding_rows(findings: Sequence[DocFinding]) -> list[list[str]]:
    return [[str(f.severity), f.code, f.location, f.message] for f in findings]


# --------------------------------------------------------------------------
# Commands


def cmd_scan(args, out: TextIO, err: TextIO) -> int:
    weights = load_weights(args.weights)

    def scan(path):
        started = time.perf_counter()
        report = _load(path, err)
        record = scan_workbook(report.workbook, weights, report.observations)
        row = record.row()
        row["ScanTime"] = round(time.perf_counter() - started, 4)
        if args.find:
            hits = _find(report.workbook, args.find)
            row["Find"] = len(hits)
            row["Where"] = hits[0] if hits else ""
        return record, row

    results = _load_many(args.paths, args.jobs, err, scan)
    rows = [row for _, row in results]
    if not rows:
        return EXIT_CLEAN
    header = list(rows[0])
    if args.deterministic:
        for row in rows:
            row.update(ScanTime=0, Created="", Accessed="", Modified="")
    out.write(render_rows(header, [[r[h] for h in header] for r in rows], args.format))
    risky = any(getattr(rec, m) for rec, _ in results for m in RISK_METRICS)
    return EXIT_FINDINGS if risky else EXIT_CLEAN


def _find(wb, text: str) -> list[str]:
    """Cells whose formula or value contains ``text``; the longest formula first."""
    needle = text.casefold()
    hits = []
    for sheet, cell in wb.cells():
        content = cell.formula_text if cell.is_formula else (
            None if cell.cached_value is None else str(cell.cached_value))
        if content is not None and needle in content.casefold():
            hits.append((-len(cell.formula_text or ""), f"{sheet.name}!{cell.address.a1}"))
    return [where for _, where in sorted(hits)]


def doc_findings(report: IngestReport) -> list[DocFinding]:
    """Schema, coverage and macro findings for one workbook."""
    wb = report.workbook
    records, loose = records_from_workbook(wb)
    findings: list[DocFinding] = []
    for rec in records:
        cell = wb.sheet(rec.origin.sheet).get(rec.origin.address)
        findings.extend(validate_doc_record(rec, cell))
    for item in loose:
        findings.append(DocFinding(Severity.INFO, "unstructured-comment", str(item.origin),
                                   "comment does not follow the documentation schema"))
    coverage = compute_coverage(wb, records)
    for sheet_name, addr in coverage.undocumented():
        findings.append(DocFinding(Severity.WARNING, "undocumented-cell",
                                   str(CellOrigin(sheet_name, addr)),
                                   "cell is not covered by any documentation record"))
    for module in wb.vba_modules:
        for _, parsed in parse_macro_headers(module):
            if isinstance(parsed, DocRecord):
                findings.extend(validate_doc_record(parsed))
    findings.extend(_lint_findings(wb.vba_modules))
    return findings


def _lint_findings(modules: Sequence[MacroModule]) -> list[DocFinding]:
    return [DocFinding(Severity.WARNING, f.rule.value, f"{f.module}.{f.procedure}:{f.line}",
                       f.message)
            for f in lint_macros(modules)]


def _exit_for(findings: Sequence[DocFinding]) -> int:
    return EXIT_FINDINGS if any(f.severity >= Severity.WARNING for f in findings) else EXIT_CLEAN


def _emit_findings(findings, fmt, out):
    if OutputFormat.parse(fmt) is OutputFormat.JSON:
        out.write(to_json([{"severity": str(f.severity), "code": f.code,
                            "location": f.location, "message": f.message} for f in findings]))
    else:
        out.write(render_rows(FINDING_COLUMNS, _finding_rows(findings), fmt))


def cmd_doc_check(args, out, err) -> int:
    reports = _load_many(args.paths, args.jobs, err, lambda p: _load(p, err))
    findings = []
    for path, report in zip(sorted(args.paths), reports):
        findings.extend(DocFinding(f.severity, f.code, f"{path}: {f.location}", f.message)
                        if len(args.paths) > 1 else f
                        for f in doc_findings(report))
    _emit_findings(findings, args.format, out)
    return _exit_for(findings)


def cmd_report(args, out, err) -> int:
    filters = [parse_filter(f) for f in args.filter or ()]
    sort_keys = [k.strip() for k in args.sort.split(",") if k.strip()] if args.sort else []
    reports = _load_many(args.paths, args.jobs, err, lambda p: _load(p, err))
    rows, loose = [], []
    for report in reports:
        table = build_doc_table(report.workbook, report.workbook.vba_modules)
        rows.extend(table.rows)
        loose.extend(table.unstructured)
    table = filter_sort(DocTable(tuple(rows), tuple(loose)), filters, sort_keys)
    out.write(render_table(table, args.format))
    print(table.summary(), file=err)
    return EXIT_CLEAN


def cmd_map(args, out, err) -> int:
    report = _load(args.path, err)
    records, _ = records_from_workbook(report.workbook)
    if args.coverage:
        amap = coverage_code_map(report.workbook, records)
    else:
        amap = build_attribute_map(report.workbook, records, args.field)
    out.write(render_map(amap, args.format))
    return EXIT_CLEAN


def _parse_when(text: str | None, fallback: dt.datetime | None) -> dt.datetime:
    if text:
        try:
            return dt.datetime.fromisoformat(text)
        except ValueError:
            raise ValueError(f"--when {text!r} is not an ISO date-time") from None
    return (fallback or dt.datetime.now()).replace(microsecond=0)


def cmd_diff(args, out, err) -> int:
    old = _load(args.old, err).workbook
    new = _load(args.new, err).workbook
    modified = new.file_meta.modified
    when = _parse_when(args.when, modified.astimezone().replace(tzinfo=None) if modified else None)
    records = diff_workbooks(old, new, args.who, when, args.align_rows)
    out.write(render_change_table(records, when, args.format))
    return EXIT_CLEAN


def _macro_modules(path: str, err) -> list[MacroModule]:
    p = Path(path)
    if p.is_dir():
        return load_vba_modules(p)
    if p.suffix.lower() in VBA_SUFFIXES:
        return [read_vba_module(p)]
    return list(_load(path, err).workbook.vba_modules)


def cmd_macro_check(args, out, err) -> int:
    for path in args.paths:
        if not Path(path).exists():
            raise InputError(f"{path}: no such file")
    modules = [m for path in sorted(args.paths) for m in _macro_modules(path, err)]
    findings = _lint_findings(modules)
    _emit_findings(findings, args.format, out)
    return _exit_for(findings)


MANIFEST_COLUMNS = ("Path & name", "Timestamp", "Attribute", "Size", "Author", "Purpose",
                    "Type", "Security", "Access", "Reason of change")


def cmd_manifest(args, out, err) -> int:
    report = _load(args.path, err)
    manual = {"purpose": args.purpose, "lifecycle_type": args.type, "security": args.security,
              "access": args.access, "reason_of_change": args.reason}
    entry = ManifestEntry.from_file(args.path, report.workbook.file_meta,
                                    display_path=args.name, **manual)
    if args.timestamp:
        entry = replace(entry, timestamp=dt.datetime.fromisoformat(args.timestamp))
    manifest = ManifestFile(args.manifest).upsert(entry)
    if OutputFormat.parse(args.format) is OutputFormat.JSON:
        out.write(to_json([e.to_json() for e in manifest]))
    else:
        rows = []
        for e in manifest:
            data = e.to_json()
            rows.append([data[k] for k in ("path_and_name", "timestamp", "attribute", "size",
                                           "author", "purpose", "lifecycle_type", "security",
                                           "access", "reason_of_change")])
        out.write(render_rows(MANIFEST_COLUMNS, rows, args.format))
    return EXIT_CLEAN


# --------------------------------------------------------------------------
# Parser


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="sheetdoc", description="Document, inventory and audit spreadsheet workbooks.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = parser.add_subparsers(dest="command", required=True, metavar="COMMAND")

    def command(name, fn, help_text, jobs=False):
        p = sub.add_parser(name, help=help_text, description=help_text)
        p.add_argument("--format", default="csv", choices=["csv", "md", "json"],
                       help="output format (default csv)")
        if jobs:
            p.add_argument("--jobs", type=int, default=None,
                           help="parallel workers (default: available CPUs)")
        p.set_defaults(fn=fn)
        return p

    p = command("scan", cmd_scan, "inventory metrics and risk score per workbook", jobs=True)
    p.add_argument("paths", nargs="+")
    p.add_argument("--weights", help="JSON weight table (default: $SHEETDOC_WEIGHTS)")
    p.add_argument("--find", help="count cells whose content contains this text")
    p.add_argument("--deterministic", action="store_true",
                   help="blank out scan and access times for reproducible output")

    p = command("doc-check", cmd_doc_check, "validate documentation comments and macros", jobs=True)
    p.add_argument("paths", nargs="+")

    p = command("report", cmd_report, "table of documentation records", jobs=True)
    p.add_argument("paths", nargs="+")
    p.add_argument("--filter", action="append", metavar="FIELD=VALUE",
                   help="keep rows whose field equals the value (repeatable)")
    p.add_argument("--sort", metavar="FIELD,...", help="sort keys, most significant first")

    p = command("map", cmd_map, "per-cell map of one documentation field")
    p.add_argument("path")
    group = p.add_mutually_exclusive_group(required=True)
    group.add_argument("--field", help="documentation field to map, e.g. Update")
    group.add_argument("--coverage", action="store_true",
                       help="cell-type letters, lowercase where undocumented")

    p = command("diff", cmd_diff, "change history between two versions")
    p.add_argument("old")
    p.add_argument("new")
    p.add_argument("--who", default=os.environ.get("USER", "unknown"))
    p.add_argument("--when", help="ISO date-time of the change (default: new file's mtime)")
    p.add_argument("--align-rows", action="store_true", help="detect inserted and deleted rows")

    p = command("macro-check", cmd_macro_check, "lint VBA modules")
    p.add_argument("paths", nargs="+", help="workbooks, module files or module directories")

    p = command("manifest", cmd_manifest, "record a workbook version in the inventory manifest")
    p.add_argument("path")
    p.add_argument("--manifest", required=True, help="JSON-lines manifest file")
    p.add_argument("--name", help="path & name to record (default: the path given)")
    p.add_argument("--timestamp", help="ISO date-time (default: file modification time)")
    p.add_argument("--purpose")
    p.add_argument("--type", help="Current, Active, Standby, Archive or Backup")
    p.add_argument("--security",
                   help="Secret, Confidential, Private, Colleagues, Entity or Public")
    p.add_argument("--access", help="Unique, Restricted or Unrestricted")
    p.add_argument("--reason",
                   help="Creation, Modification, Update, Addition or Deletion")
    return parser


def main(argv: Sequence[str] | None = None, out: TextIO | None = None,
         err: TextIO | None = None) -> int:
    out = out or sys.stdout
    err = err or sys.stderr
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_FATAL if exc.code not in (0, None) else EXIT_CLEAN
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        stream=err, format="%(name)s: %(message)s")
    try:
        return args.fn(args, out, err)
    except InputError as exc:
        print(f"sheetdoc: error: {exc}", file=err)
    except FATAL_ERRORS as exc:
        code = getattr(exc, "code", type(exc).__name__)
        print(f"sheetdoc: error [{code}]: {exc}", file=err)
    return EXIT_FATAL


if __name__ == "__main__":
    sys.exit(main())
