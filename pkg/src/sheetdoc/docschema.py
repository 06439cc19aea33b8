"""Structured documentation comments.

A documented cell or macro carries a comment made of ``Key: value`` lines::

    Author: Raymond Payette
    Date: 2/20/2006
    Time: 10:43 AM
    Purpose: Daily cash receipts
    Type: Data (Validated)
    Source: Cashiers
    Range: A2:A10
    Format: Currency
    Checked by: Ben Jones
    Date: 2/21/2006
    Update: Daily

Lines that are not recognised keys are kept as free-text notes. A comment
without an ``Author:`` line is treated as a legacy, unstructured comment.
"""

from __future__ import annotations

import datetime as dt
import enum
import re
from dataclasses import dataclass, field
from typing import Union

from .errors import InvariantViolation, MalformedRange
from .model import Cell, CellAddress, CellRange, parse_range


class NAType(enum.Enum):
    NA = "NA"

    def __repr__(self) -> str:
        return "NA"

    def __str__(self) -> str:
        return "NA"


NA = NAType.NA


class DocType(enum.Enum):
    TITLE_LABEL = "Title & Label"
    DATA = "Data"
    DATA_VALIDATED = "Data (Validated)"
    FORMULA = "Formula"
    LINK = "Link"
    MACRO = "Macro"

    @property
    def covers_declared_range(self) -> bool:
        """Title and data records document their Range; formula, link and
        macro records use Range to name what they read."""
        return self in (DocType.TITLE_LABEL, DocType.DATA, DocType.DATA_VALIDATED)


_TYPE_SYNONYMS = {t.value.casefold(): t for t in DocType}


class Severity(enum.IntEnum):
    INFO = 0
    WARNING = 1
    ERROR = 2

    def __str__(self) -> str:
        return self.name.lower()


@dataclass(frozen=True, order=True)
class CellOrigin:
    sheet: str
    address: CellAddress

    def __str__(self) -> str:
        return f"{self.sheet}!{self.address.a1}"


@dataclass(frozen=True, order=True)
class MacroOrigin:
    module: str
    procedure: str

    def __str__(self) -> str:
        return f"{self.module}.{self.procedure}"


Origin = Union[CellOrigin, MacroOrigin]


@dataclass(frozen=True)
class DocRecord:
    author: str
    date: dt.date | None = None
    time: dt.time | None = None
    purpose: str = ""
    cell_type: DocType | None = None
    source: str | NAType | None = None
    range: CellRange | NAType | None = None
    format: str | None = None
    checked_by: str | None = None
    checked_date: dt.date | None = None
    update: str | NAType | None = None
    notes: tuple[str, ...] = ()
    origin: Origin | None = None
    # Original spellings, kept for faithful re-rendering; not part of equality.
    date_text: str | None = field(default=None, compare=False)
    time_text: str | None = field(default=None, compare=False)
    checked_date_text: str | None = field(default=None, compare=False)
    range_text: str | None = field(default=None, compare=False)
    parse_issues: tuple[tuple[Severity, str, str], ...] = field(default=(), compare=False)

    def invariant_errors(self) -> list[str]:
        errors = []
        if not self.author.strip():
            errors.append("author is empty")
        if not self.purpose.strip():
            errors.append("purpose is empty")
        if self.cell_type is DocType.TITLE_LABEL:
            if self.source not in (None, NA) or self.update not in (None, NA):
                errors.append("a title record has no source and no update")
        if self.checked_date is not None and not self.checked_by:
            errors.append("checked date given without a reviewer")
        return errors


@dataclass(frozen=True)
class Unstructured:
    """A comment that does not follow the documentation schema."""

    body: str
    origin: Origin | None = None


@dataclass(frozen=True)
class DocFinding:
    severity: Severity
    code: str
    location: str
    message: str


# --------------------------------------------------------------------------
# Parsing

KEYS = ("Author", "Date", "Time", "Purpose", "Type", "Source", "Range",
        "Format", "Checked by", "Update")
_KEY_LOOKUP = {k.casefold(): k for k in KEYS}
_KEY_RE = re.compile(
    r"^(author|date|time|purpose|type|source|range|format|checked\s+by|update)\s*:\s*(.*)$",
    re.IGNORECASE)
_INLINE_KEY_RE = re.compile(
    r"(?<=\s)(?:author|date|time|purpose|type|source|range|format|checked\s+by|update):\s",
    re.IGNORECASE)

_DATE_MDY = re.compile(r"^(\d{1,2})/(\d{1,2})/(\d{4})$")
_DATE_ISO = re.compile(r"^(\d{4})-(\d{2})-(\d{2})$")
_TIME = re.compile(r"^(\d{1,2}):(\d{2})(?::(\d{2}))?\s*([AaPp])?\.?(?:[Mm]\.?)?$")


def parse_date(text: str) -> dt.date | None:
    text = text.strip()
    m = _DATE_MDY.match(text)
    try:
        if m:
            return dt.date(int(m.group(3)), int(m.group(1)), int(m.group(2)))
        m = _DATE_ISO.match(text)
        if m:
            return dt.date(int(m.group(1)), int(m.group(2)), int(m.group(3)))
    except ValueError:
        return None
    return None


def parse_time(text: str) -> dt.time | None:
    m = _TIME.match(text.strip())
    if not m:
        return None
    hour, minute, second = int(m.group(1)), int(m.group(2)), int(m.group(3) or 0)
    meridiem = (m.group(4) or "").upper()
    if meridiem:
        if not 1 <= hour <= 12:
            return None
        hour = hour % 12 + (12 if meridiem == "P" else 0)
    try:
        return dt.time(hour, minute, second)
    except ValueError:
        return None


def format_date(value: dt.date) -> str:
    """M/D/YYYY without zero padding."""
    return f"{value.month}/{value.day}/{value.year}"


def format_time(value: dt.time) -> str:
    hour = value.hour % 12 or 12
    suffix = "AM" if value.hour < 12 else "PM"
    if value.second:
        return f"{hour}:{value.minute:02d}:{value.second:02d} {suffix}"
    return f"{hour}:{value.minute:02d} {suffix}"


def _is_na(text: str) -> bool:
    return text.strip().casefold() in ("na", "n/a")


def _split_inline(line: str) -> list[str]:
    """Split ``"Author: X Date: Y"`` into one line per key."""
    if not _KEY_RE.match(line):
        return [line]
    cuts = [m.start() for m in _INLINE_KEY_RE.finditer(line)]
    if not cuts:
        return [line]
    bounds = [0, *cuts, len(line)]
    return [line[a:b].strip() for a, b in zip(bounds, bounds[1:])]


def _author_prefix_line(line: str) -> bool:
    return line.endswith(":") and ":" not in line[:-1] and not _KEY_RE.match(line)


def parse_doc_comment(body: str, origin: Origin | None = None) -> DocRecord | Unstructured:
    """Parse a comment body; never raises.

    A ``Date:`` line whose nearest preceding key is ``Checked by:`` is the
    review date; any other ``Date:`` is the authoring date. Repeated keys
    produce a ``duplicate-key`` issue and the last value wins.
    """
    lines: list[str] = []
    for raw in body.splitlines():
        line = raw.strip()
        if line:
            lines.extend(_split_inline(line))
    if lines and _author_prefix_line(lines[0]):
        lines = lines[1:]

    values: dict[str, str] = {}
    notes: list[str] = []
    issues: list[tuple[Severity, str, str]] = []
    previous_key = None
    for line in lines:
        m = _KEY_RE.match(line)
        if not m:
            notes.append(line)
            continue
        key = _KEY_LOOKUP[re.sub(r"\s+", " ", m.group(1)).casefold()]
        value = m.group(2).strip()
        slot = key
        if key == "Date" and previous_key == "Checked by":
            slot = "Checked date"
        previous_key = key
        if slot in values:
            issues.append((Severity.WARNING, "duplicate-key",
                           f"key {slot!r} appears more than once; last value kept"))
        if value:
            values[slot] = value
        else:
            values.pop(slot, None)

    if "Author" not in values:
        return Unstructured(body, origin)

    kwargs: dict = {"author": values["Author"], "purpose": values.get("Purpose", "")}

    for slot, name in (("Date", "date"), ("Checked date", "checked_date")):
        if slot in values:
            kwargs[f"{name}_text"] = values[slot]
            parsed = parse_date(values[slot])
            kwargs[name] = parsed
            if parsed is None:
                issues.append((Severity.WARNING, "bad-date", f"cannot read date {values[slot]!r}"))
    if "Time" in values:
        kwargs["time_text"] = values["Time"]
        kwargs["time"] = parse_time(values["Time"])
        if kwargs["time"] is None:
            issues.append((Severity.WARNING, "bad-time", f"cannot read time {values['Time']!r}"))

    if "Type" in values:
        doc_type = _TYPE_SYNONYMS.get(re.sub(r"\s+", " ", values["Type"]).casefold())
        if doc_type is None:
            notes.append(f"Type: {values['Type']}")
            issues.append((Severity.WARNING, "unknown-type", f"unknown type {values['Type']!r}"))
        kwargs["cell_type"] = doc_type

    for key, name in (("Source", "source"), ("Update", "update")):
        if key in values:
            kwargs[name] = NA if _is_na(values[key]) else values[key]

    if "Range" in values:
        text = values["Range"]
        if _is_na(text):
            kwargs["range"] = NA
        else:
            try:
                kwargs["range"] = parse_range(text)
            except MalformedRange:
                # e.g. "Entire Workbook" on a macro: not a cell range
                kwargs["range"] = NA
                kwargs["range_text"] = text
                issues.append((Severity.INFO, "range-not-cells",
                               f"range {text!r} is not a cell range; recorded as NA"))

    if "Format" in values:
        kwargs["format"] = values["Format"]
    if "Checked by" in values:
        kwargs["checked_by"] = values["Checked by"]

    return DocRecord(**kwargs, notes=tuple(notes), origin=origin, parse_issues=tuple(issues))


# --------------------------------------------------------------------------
# Serialization


def _render_field(value, text: str | None, formatter=str) -> str:
    if value is None:
        return text or ""
    if value is NA:
        return "NA"
    if text is not None:
        # keep the author's spelling when it still means the same thing
        return text
    return formatter(value)


def serialize_doc_record(rec: DocRecord) -> str:
    """Render ``rec`` as a comment body, keys in the canonical order."""
    problems = rec.invariant_errors()
    if problems:
        raise InvariantViolation("; ".join(problems))

    out = [f"Author: {rec.author}"]
    if rec.date is not None or rec.date_text:
        out.append("Date: " + _render_field(rec.date, _same_date(rec.date, rec.date_text), format_date))
    if rec.time is not None or rec.time_text:
        out.append("Time: " + _render_field(rec.time, _same_time(rec.time, rec.time_text), format_time))
    out.append(f"Purpose: {rec.purpose}")
    if rec.cell_type is not None:
        out.append(f"Type: {rec.cell_type.value}")
    if rec.source is not None:
        out.append(f"Source: {rec.source}")
    if rec.range is not None:
        if rec.range is NA:
            out.append(f"Range: {rec.range_text or 'NA'}")
        else:
            out.append(f"Range: {rec.range.a1}")
    if rec.format is not None:
        out.append(f"Format: {rec.format}")
    if rec.checked_by is not None:
        out.append(f"Checked by: {rec.checked_by}")
        if rec.checked_date is not None or rec.checked_date_text:
            out.append("Date: " + _render_field(
                rec.checked_date, _same_date(rec.checked_date, rec.checked_date_text), format_date))
    if rec.update is not None:
        out.append(f"Update: {rec.update}")
    out.extend(rec.notes)
    return "\n".join(out)


def _same_date(value: dt.date | None, text: str | None) -> str | None:
    if text is None:
        return None
    if value is None or parse_date(text) == value:
        return text
    return None


def _same_time(value: dt.time | None, text: str | None) -> str | None:
    if text is None:
        return None
    if value is None or parse_time(text) == value:
        return text
    return None


# --------------------------------------------------------------------------
# Validation

_COMMON_REQUIRED = ("date", "purpose", "cell_type", "format")
_TYPE_REQUIRED = {
    DocType.TITLE_LABEL: (),
    DocType.DATA: ("source", "range", "update"),
    DocType.DATA_VALIDATED: ("source", "range", "update"),
    DocType.FORMULA: ("range", "update"),
    DocType.LINK: ("source", "range", "update"),
    DocType.MACRO: ("source", "update"),
}
_FIELD_LABELS = {"date": "Date", "purpose": "Purpose", "cell_type": "Type",
                 "format": "Format", "source": "Source", "range": "Range",
                 "update": "Update"}


def _location(rec: DocRecord, cell: Cell | None) -> str:
    if rec.origin is not None:
        return str(rec.origin)
    if cell is not None:
        return cell.address.a1
    return "?"


def validate_doc_record(rec: DocRecord, cell: Cell | None = None) -> list[DocFinding]:
    """Check one record against the schema and, when given, the cell it sits on."""
    from .classify import CellType, classify_cell  # classify imports this module

    where = _location(rec, cell)
    findings = [DocFinding(sev, code, where, msg) for sev, code, msg in rec.parse_issues]

    def add(severity, code, message):
        findings.append(DocFinding(severity, code, where, message))

    missing = [f for f in _COMMON_REQUIRED if getattr(rec, f) in (None, "")]
    if rec.cell_type is not None:
        missing += [f for f in _TYPE_REQUIRED[rec.cell_type] if getattr(rec, f) is None]
    for name in missing:
        if name == "date" and rec.date_text:
            continue  # reported as bad-date
        add(Severity.ERROR, "missing-field", f"required field {_FIELD_LABELS[name]!r} is missing")

    if rec.cell_type is DocType.TITLE_LABEL:
        if rec.source not in (None, NA) or rec.update not in (None, NA):
            add(Severity.ERROR, "title-has-source",
                "a title record must have Source and Update set to NA")

    if rec.checked_date is not None and not rec.checked_by:
        add(Severity.ERROR, "review-date-without-reviewer",
            "a review date is given but nobody is named in 'Checked by'")
    if not rec.checked_by:
        add(Severity.INFO, "unreviewed", "no reviewer recorded")

    if cell is not None and not cell.is_empty and rec.cell_type is not None:
        actual = classify_cell(cell)
        expected = {
            DocType.TITLE_LABEL: CellType.TITLE, DocType.DATA: CellType.DATA,
            DocType.DATA_VALIDATED: CellType.DATA, DocType.FORMULA: CellType.FORMULA,
            DocType.LINK: CellType.LINK, DocType.MACRO: None,
        }[rec.cell_type]
        if expected is not actual:
            add(Severity.WARNING, "type-mismatch",
                f"declared type {rec.cell_type.value!r} but the cell is a {actual.value}")
        if rec.cell_type is DocType.DATA_VALIDATED and not cell.has_validation:
            add(Severity.INFO, "validation-missing",
                "declared as validated data but the cell has no validation rule")

    origin_addr = cell.address if cell is not None else (
        rec.origin.address if isinstance(rec.origin, CellOrigin) else None)
    if (isinstance(rec.range, CellRange) and origin_addr is not None
            and rec.cell_type is not None and rec.cell_type.covers_declared_range
            and not rec.range.contains(origin_addr)):
        add(Severity.WARNING, "range-excludes-origin",
            f"declared range {rec.range.a1} does not contain {origin_addr.a1}")

    return findings


def records_from_workbook(wb) -> tuple[list[DocRecord], list[Unstructured]]:
    """Parse every cell comment, in sheet then row/column order."""
    records, loose = [], []
    for sheet, cell in wb.cells():
        if cell.comment is None:
            continue
        parsed = parse_doc_comment(cell.comment.body, CellOrigin(sheet.name, cell.address))
        (records if isinstance(parsed, DocRecord) else loose).append(parsed)
    return records, loose


__all__ = [
    "CellOrigin", "DocFinding", "DocRecord", "DocType", "KEYS", "MacroOrigin",
    "NA", "NAType", "Severity", "Unstructured", "format_date", "format_time",
    "parse_date", "parse_doc_comment", "parse_time", "records_from_workbook",
    "serialize_doc_record",
    "validate_doc_record",
]
