"""Plain-text workbook fixtures.

One record per line; ``#`` starts a comment line::

    PROPERTY Author "Raymond Payette"
    SHEET Sheet1
    CELL A1 TYPE text VALUE "Items"
    CELL A2 TYPE num VALUE 1385.45 FORMAT Currency LOCKED VALIDATED
    CELL A12 TYPE formula VALUE 16246.9 FORMULA "=SUM(A2:A10)" LOCKED
    COMMENT A2 <<<
    Author: Raymond Payette
    >>>
    NAME Receipts Sheet1!$A$2:$A$10

Tokens are whitespace separated; double quotes group a token and ``""``
escapes a quote inside it. Further directives: ``LINK <path>`` (external
workbook), ``FLAG <workbook-flag>``, and sheet options after the name in
``SHEET <name> [PROTECTED] [HIDDEN|VERY-HIDDEN] [FLAG <sheet-flag>]...``.
Cells are unlocked unless marked ``LOCKED``.
"""

from __future__ import annotations

import datetime as dt
import re
from dataclasses import replace
from pathlib import Path

from ..errors import FixtureSyntaxError, MalformedAddress
from ..model import (
    ERROR_CODES, SHEET_FLAGS, WORKBOOK_FLAGS, Cell, CellAddress, CellError,
    CommentText, ContentKind, FileMeta, Sheet, Visibility, Workbook, parse_a1,
)
from .common import IngestReport, file_meta_from_stat, load_sidecar_modules

DEFAULT_DATE_FORMAT = "m/d/yyyy"

_TOKEN = re.compile(r'"((?:[^"]|"")*)"|(\S+)')
_NUMBER = re.compile(r"^[-+]?(?:\d+(?:\.\d*)?|\.\d+)(?:[eE][-+]?\d+)?$")


def _tokens(line: str, number: int) -> list[tuple[str, bool]]:
    out = []
    pos = 0
    for m in _TOKEN.finditer(line):
        if line[pos:m.start()].strip():
            raise FixtureSyntaxError("unbalanced quotes", number)
        pos = m.end()
        if m.group(1) is not None:
            out.append((m.group(1).replace('""', '"'), True))
        else:
            if '"' in m.group(2):
                raise FixtureSyntaxError(f"stray quote in {m.group(2)!r}", number)
            out.append((m.group(2), False))
    return out


def _parse_date_literal(text: str, number: int) -> dt.date | dt.datetime:
    try:
        if "T" in text or " " in text:
            return dt.datetime.fromisoformat(text)
        return dt.date.fromisoformat(text)
    except ValueError:
        raise FixtureSyntaxError(f"bad date literal {text!r}", number) from None


def _literal(kind: ContentKind, text: str, quoted: bool, number: int):
    if kind is ContentKind.TEXT:
        return text
    if kind is ContentKind.NUMBER:
        if not quoted and text.upper() in ("TRUE", "FALSE"):
            return text.upper() == "TRUE"
        if quoted or not _NUMBER.match(text):
            raise FixtureSyntaxError(f"bad number literal {text!r}", number)
        return float(text)
    if kind is ContentKind.DATE:
        return _parse_date_literal(text, number)
    # formula cached value
    if quoted:
        return text
    upper = text.upper()
    if upper == "BLANK":
        return None
    if upper in ERROR_CODES:
        return CellError(upper)
    if upper in ("TRUE", "FALSE"):
        return upper == "TRUE"
    if _NUMBER.match(text):
        return float(text)
    raise FixtureSyntaxError(f"bad cached value {text!r}; quote text values", number)


_KINDS = {"text": ContentKind.TEXT, "num": ContentKind.NUMBER,
          "date": ContentKind.DATE, "formula": ContentKind.FORMULA}


class _SheetBuilder:
    def __init__(self, name: str, protected: bool, hidden: Visibility, flags: frozenset[str]):
        self.name = name
        self.protected = protected
        self.hidden = hidden
        self.flags = flags
        self.cells: dict[CellAddress, dict] = {}
        self.comments: dict[CellAddress, str] = {}

    def build(self) -> Sheet:
        cells = {}
        for addr in sorted(set(self.cells) | set(self.comments)):
            spec = self.cells.get(addr, {"kind": ContentKind.EMPTY})
            comment = self.comments.get(addr)
            cells[addr] = Cell(
                address=addr,
                comment=CommentText.from_body(comment) if comment is not None else None,
                **spec,
            )
        return Sheet(self.name, cells, self.protected, self.hidden, self.flags)


def _address(text: str, number: int) -> CellAddress:
    try:
        return parse_a1(text)
    except MalformedAddress as exc:
        raise FixtureSyntaxError(str(exc), number) from None


def parse_fixture(text: str, source_path: str = "<fixture>") -> Workbook:
    sheets: list[_SheetBuilder] = []
    names: dict[str, str] = {}
    links: list[str] = []
    flags: set[str] = set()
    props: dict[str, str] = {}
    lines = text.splitlines()
    i = 0
    while i < len(lines):
        number = i + 1
        raw = lines[i]
        i += 1
        if not raw.strip() or raw.lstrip().startswith("#"):
            continue
        toks = _tokens(raw, number)
        head = toks[0][0].upper()
        args = toks[1:]
        if head == "SHEET":
            if not args:
                raise FixtureSyntaxError("SHEET needs a name", number)
            name = args[0][0]
            if any(s.name == name for s in sheets):
                raise FixtureSyntaxError(f"duplicate sheet {name!r}", number)
            protected, hidden, sheet_flags = False, Visibility.VISIBLE, set()
            rest = [t for t, _ in args[1:]]
            j = 0
            while j < len(rest):
                word = rest[j].upper()
                if word == "PROTECTED":
                    protected = True
                elif word == "HIDDEN":
                    hidden = Visibility.HIDDEN
                elif word == "VERY-HIDDEN":
                    hidden = Visibility.VERY_HIDDEN
                elif word == "FLAG" and j + 1 < len(rest) and rest[j + 1] in SHEET_FLAGS:
                    sheet_flags.add(rest[j + 1])
                    j += 1
                else:
                    raise FixtureSyntaxError(f"unknown sheet option {rest[j]!r}", number)
                j += 1
            sheets.append(_SheetBuilder(name, protected, hidden, frozenset(sheet_flags)))
        elif head == "CELL":
            if not sheets:
                raise FixtureSyntaxError("CELL before any SHEET", number)
            sheets[-1].cells.update(_cell_spec(args, number, sheets[-1]))
        elif head == "COMMENT":
            if not sheets:
                raise FixtureSyntaxError("COMMENT before any SHEET", number)
            if len(args) != 2 or args[1] != ("<<<", False):
                raise FixtureSyntaxError("expected COMMENT <address> <<<", number)
            addr = _address(args[0][0], number)
            body = []
            while True:
                if i >= len(lines):
                    raise FixtureSyntaxError("unterminated comment block", number)
                line = lines[i]
                i += 1
                if line == ">>>":
                    break
                body.append(line)
            if addr in sheets[-1].comments:
                raise FixtureSyntaxError(f"second comment for {addr.a1}", number)
            sheets[-1].comments[addr] = "\n".join(body)
        elif head == "NAME":
            if len(args) != 2:
                raise FixtureSyntaxError("expected NAME <name> <range>", number)
            if args[0][0].casefold() in (n.casefold() for n in names):
                raise FixtureSyntaxError(f"duplicate name {args[0][0]!r}", number)
            names[args[0][0]] = args[1][0]
        elif head == "LINK":
            if len(args) != 1:
                raise FixtureSyntaxError("expected LINK <path>", number)
            links.append(args[0][0])
        elif head == "FLAG":
            if len(args) != 1 or args[0][0] not in WORKBOOK_FLAGS:
                raise FixtureSyntaxError("expected FLAG <workbook-flag>", number)
            flags.add(args[0][0])
        elif head == "PROPERTY":
            if len(args) != 2 or args[0][0].lower() not in ("author", "manager"):
                raise FixtureSyntaxError("expected PROPERTY Author|Manager <text>", number)
            props[args[0][0].lower()] = args[1][0]
        else:
            raise FixtureSyntaxError(f"unknown record {toks[0][0]!r}", number)

    if not sheets:
        raise FixtureSyntaxError("fixture declares no sheets", max(len(lines), 1))
    return Workbook(
        source_path=source_path,
        sheets=tuple(s.build() for s in sheets),
        defined_names=names,
        external_links=tuple(links),
        flags=frozenset(flags),
        file_meta=FileMeta(author_property=props.get("author"),
                           manager_property=props.get("manager"),
                           file_format="sheetdoc text fixture"),
    )


def _cell_spec(args, number, sheet: _SheetBuilder) -> dict[CellAddress, dict]:
    if len(args) < 5 or args[1][0].upper() != "TYPE" or args[3][0].upper() != "VALUE":
        raise FixtureSyntaxError("expected CELL <address> TYPE <kind> VALUE <literal>", number)
    addr = _address(args[0][0], number)
    if addr in sheet.cells:
        raise FixtureSyntaxError(f"duplicate cell {addr.a1}", number)
    kind = _KINDS.get(args[2][0].lower())
    if kind is None:
        raise FixtureSyntaxError(f"unknown cell type {args[2][0]!r}", number)
    value = _literal(kind, args[4][0], args[4][1], number)
    spec = {"kind": kind, "cached_value": value, "locked": False, "has_validation": False,
            "number_format": DEFAULT_DATE_FORMAT if kind is ContentKind.DATE else "General"}
    rest = args[5:]
    j = 0
    while j < len(rest):
        word = rest[j][0].upper()
        if word in ("FORMULA", "FORMAT"):
            if j + 1 >= len(rest):
                raise FixtureSyntaxError(f"{word} needs a value", number)
            key = "formula_text" if word == "FORMULA" else "number_format"
            spec[key] = rest[j + 1][0]
            j += 2
            continue
        if word == "LOCKED":
            spec["locked"] = True
        elif word == "VALIDATED":
            spec["has_validation"] = True
        else:
            raise FixtureSyntaxError(f"unknown cell option {rest[j][0]!r}", number)
        j += 1
    if kind is ContentKind.FORMULA:
        text = spec.get("formula_text")
        if not text:
            raise FixtureSyntaxError("formula cell needs FORMULA <text>", number)
        if not text.startswith("="):
            spec["formula_text"] = "=" + text
    elif "formula_text" in spec:
        raise FixtureSyntaxError("FORMULA given for a non-formula cell", number)
    return {addr: spec}


def load_fixture(path: str | Path) -> IngestReport:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except UnicodeDecodeError as exc:
        raise FixtureSyntaxError(f"not UTF-8 text: {exc}", 1) from None
    wb = parse_fixture(text, str(path))
    observations: list[str] = []
    modules = load_sidecar_modules(path, observations)
    meta = file_meta_from_stat(path, wb.file_meta, observations)
    return IngestReport(replace(wb, file_meta=meta, vba_modules=tuple(modules)),
                        tuple(observations))
