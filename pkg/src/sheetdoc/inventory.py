"""File-level inventory: descriptive counts, risk heuristics and the manifest.

The metric names follow the SCANXLS column catalog. Metrics that need a
running spreadsheet application (routing slip, add-in state and the like)
are listed as unavailable and never enter the score.
"""

from __future__ import annotations

import datetime as dt
import enum
import json
import math
import os
import re
from collections import Counter
from dataclasses import asdict, dataclass, field, fields, replace
from pathlib import Path
from typing import Iterable, Mapping

from .classify import build_precedent_graph, formula_precedents, try_parse
from .errors import ConfigError, InvalidEnumValue, OutOfBoundsReference
from .formula import Call, RangeRef, relative_normal_form
from .model import (
    Cell, CellAddress, CellError, CellRange, ContentKind, Sheet, Visibility, Workbook, value_text,
)

RISK_METRICS = (
    "error_formulas", "error_values", "inconsistent_formulas", "omits_cells",
    "unlocked_formulas", "empty_ref_formulas", "text_date", "text_num", "stale_sums",
)
DESCRIPTIVE_METRICS = (
    "size", "n_links", "names", "worksheets", "code_lines", "validation_cells",
    "comment_cells", "constant_cells", "numeric_cells", "formula_cells",
)
METRICS = DESCRIPTIVE_METRICS + RISK_METRICS

DEFAULT_WEIGHTS: dict[str, float] = {**{m: 0.0 for m in DESCRIPTIVE_METRICS},
                                     **{m: 1.0 for m in RISK_METRICS}}

WEIGHTS_ENV = "SHEETDOC_WEIGHTS"

UNAVAILABLE_METRICS = (
    "Accepts labels in formulas", "Has Routing Slip", "Is running as an Add-In",
    "Multi User Editing", "VBA code has been digitally Signed", "Lotus evaluation rules",
    "Lotus formula entry", "Find1.4", "Where1.4",
)

UNUSUAL_WB_FLAGS = ("custom-document-properties", "excel4-macro-sheets",
                    "precision-as-displayed", "remove-personal-information")

REGION_THRESHOLD = 3
STALE_TOLERANCE = 0.005


def validate_weights(raw: Mapping) -> dict[str, float]:
    """Check a weight table; keys must be metric names, values non-negative numbers."""
    if not isinstance(raw, Mapping):
        raise ConfigError("weight table must be a JSON object")
    table = {}
    for key, value in raw.items():
        if key not in METRICS:
            raise ConfigError(f"unknown metric {key!r} in weight table")
        if isinstance(value, bool) or not isinstance(value, (int, float)) \
                or not math.isfinite(value) or value < 0:
            raise ConfigError(f"weight for {key!r} must be a non-negative number")
        table[key] = float(value)
    return table


def load_weights(path: str | Path | None = None) -> dict[str, float]:
    """Default weights overlaid with the JSON table at ``path`` (or ``$SHEETDOC_WEIGHTS``)."""
    if path is None:
        path = os.environ.get(WEIGHTS_ENV) or None
    weights = dict(DEFAULT_WEIGHTS)
    if path is None:
        return weights
    try:
        raw = json.loads(Path(path).read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read weight table {path}: {exc}") from None
    weights.update(validate_weights(raw))
    return weights


# --------------------------------------------------------------------------
# The inventory row


@dataclass(frozen=True)
class Located:
    """A count together with the cells that produced it."""

    cells: tuple[tuple[str, CellAddress], ...] = ()
    observations: tuple[str, ...] = ()

    @property
    def count(self) -> int:
        return len(self.cells)


@dataclass(frozen=True)
class InventoryRecord:
    full_path: str
    filename: str
    scan_time: float
    size: int
    created: dt.datetime | None
    accessed: dt.datetime | None
    modified: dt.datetime | None
    attributes: tuple[str, ...]
    observations: tuple[str, ...]
    file_format: str
    contents: str | None
    author: str | None
    manager: str | None
    n_links: int
    linked_files: tuple[str, ...]
    need_recalc: bool
    backup: bool
    unusual_wb: tuple[str, ...]
    unusual_ws_flags: dict[str, tuple[str, ...]]
    names: int
    worksheets: int
    code_lines: int
    validation_cells: int
    comment_cells: int
    constant_cells: int
    numeric_cells: int
    formula_cells: int
    error_formulas: int
    error_values: int
    text_date: int
    text_num: int
    inconsistent_formulas: int
    omits_cells: int
    unlocked_formulas: int
    empty_ref_formulas: int
    stale_sums: int
    score: float
    unavailable: tuple[str, ...] = UNAVAILABLE_METRICS
    locations: dict[str, tuple[str, ...]] = field(default_factory=dict, compare=False)

    @property
    def n_unusual_ws(self) -> int:
        return sum(1 for flags in self.unusual_ws_flags.values() if flags)

    def row(self) -> dict[str, object]:
        """The record under SCANXLS column names, values rendered as text or numbers."""
        def stamp(value):
            return value.isoformat() if value is not None else ""

        attr_letters = {"archive": "A", "hidden": "H", "read-only": "R", "system": "S"}
        return {
            "FullPath": self.full_path,
            "Filename": self.filename,
            "ScanTime": round(self.scan_time, 4),
            "Size": self.size,
            "Created": stamp(self.created),
            "Accessed": stamp(self.accessed),
            "Modified": stamp(self.modified),
            "Attributes": "".join(sorted(attr_letters[a] for a in self.attributes)),
            "Observations": "; ".join(self.observations),
            "FileFormat": self.file_format,
            "Contents": self.contents or "",
            "Author": self.author or "",
            "Manager": self.manager or "",
            "No. Links": self.n_links,
            "Linked files": "; ".join(self.linked_files),
            "NeedRecalc": self.need_recalc,
            "Backup": self.backup,
            "NrUWB": 1 if self.unusual_wb else 0,
            "UnusualWB": ", ".join(self.unusual_wb),
            "NrUWS": self.n_unusual_ws,
            "UnusualWS": "; ".join(f"{s}: {', '.join(f)}" for s, f in self.unusual_ws_flags.items() if f),
            "Names": self.names,
            "Worksheets": self.worksheets,
            "Code": self.code_lines,
            "Validation": self.validation_cells,
            "Comments": self.comment_cells,
            "Constants": self.constant_cells,
            "Numbers": self.numeric_cells,
            "Formulas": self.formula_cells,
            "Errors": self.error_formulas,
            "ErrorVal": self.error_values,
            "TextDate": self.text_date,
            "TextNum": self.text_num,
            "Inconsis": self.inconsistent_formulas,
            "OmitsCells": self.omits_cells,
            "ULformula": self.unlocked_formulas,
            "EmptyRef": self.empty_ref_formulas,
            "StaleSums": self.stale_sums,
            "Scoring": self.score,
            "Unavailable": ", ".join(self.unavailable),
        }


def _where(sheet: str, addr: CellAddress) -> str:
    return f"{sheet}!{addr.a1}"


def _located(cells: Iterable[tuple[str, CellAddress]], observations: Iterable[str] = ()) -> Located:
    order = {}
    for key in cells:
        order.setdefault(key, None)
    return Located(tuple(order), tuple(observations))


# --------------------------------------------------------------------------
# Risk heuristics


def _normal_forms(sheet: Sheet) -> dict[CellAddress, str]:
    forms = {}
    for cell in sheet:
        if not cell.is_formula:
            continue
        ast = try_parse(cell)
        if ast is None:
            forms[cell.address] = "unparsed:" + cell.formula_text
            continue
        try:
            forms[cell.address] = relative_normal_form(ast, cell.address)
        except OutOfBoundsReference:
            forms[cell.address] = "unparsed:" + cell.formula_text
    return forms


def _runs(addresses: set[CellAddress], along_column: bool) -> list[list[CellAddress]]:
    """Maximal runs of consecutive addresses down a column or across a row."""
    def key(a):
        return (a.col, a.row) if along_column else (a.row, a.col)

    runs: list[list[CellAddress]] = []
    for addr in sorted(addresses, key=key):
        if runs:
            prev = runs[-1][-1]
            fixed, step = (prev.col, prev.row) if along_column else (prev.row, prev.col)
            here_fixed, here_step = key(addr)
            if here_fixed == fixed and here_step == step + 1:
                runs[-1].append(addr)
                continue
        runs.append([addr])
    return runs


def count_inconsistent(wb: Workbook) -> Located:
    """Formulas that differ from the majority normal form of their region."""
    hits, notes = [], []
    for sheet in wb.sheets:
        forms = _normal_forms(sheet)
        for along_column in (True, False):
            for run in _runs(set(forms), along_column):
                if len(run) < REGION_THRESHOLD:
                    continue
                tally = Counter(forms[a] for a in run)
                (top, n), *rest = tally.most_common()
                if n * 2 <= len(run):
                    span = CellRange.spanning(run[0], run[-1]).a1
                    notes.append(f"{sheet.name}!{span}: no majority formula in region; not scored")
                    continue
                hits.extend((sheet.name, a) for a in run if forms[a] != top)
    return _located(sorted(hits, key=lambda k: (wb.sheets.index(wb.sheet(k[0])), k[1])), notes)


def _numeric_constant(cell: Cell | None) -> bool:
    return (cell is not None and cell.kind in (ContentKind.NUMBER, ContentKind.DATE)
            and not isinstance(cell.cached_value, bool))


def _adjacent_toward(rng: CellRange, addr: CellAddress) -> CellAddress | None:
    tl, br = rng.top_left, rng.bottom_right
    try:
        if rng.n_cols == 1 and rng.n_rows > 1:
            if addr.row > br.row:
                return CellAddress(br.row + 1, tl.col)
            if addr.row < tl.row:
                return CellAddress(tl.row - 1, tl.col)
        elif rng.n_rows == 1 and rng.n_cols > 1:
            if addr.col > br.col:
                return CellAddress(tl.row, br.col + 1)
            if addr.col < tl.col:
                return CellAddress(tl.row, tl.col - 1)
    except ValueError:
        return None
    return None


def count_omits(wb: Workbook) -> Located:
    """Formulas whose one-dimensional range stops one cell short of a number."""
    hits, notes = [], []
    for sheet in wb.sheets:
        for cell in sheet:
            if not cell.is_formula:
                continue
            ast = try_parse(cell)
            if ast is None:
                continue
            internal, _ = formula_precedents(wb, sheet.name, cell, notes)
            for ref in ast.references():
                if not isinstance(ref, RangeRef) or ref.book is not None:
                    continue
                try:
                    rng = ref.resolve(cell.address)
                except OutOfBoundsReference:
                    continue
                if ref.sheet is not None and wb.sheet(ref.sheet) is not sheet:
                    # "toward the formula cell" only has meaning on the formula's own sheet
                    continue
                adjacent = _adjacent_toward(rng, cell.address)
                if adjacent is None or not _numeric_constant(sheet.get(adjacent)):
                    continue
                if any((s or sheet.name) == sheet.name and r.contains(adjacent) for s, r in internal):
                    continue
                hits.append((sheet.name, cell.address))
                break
    return _located(hits, dict.fromkeys(notes))


_CURRENCY = "$€£¥"
_TEXT_NUM = re.compile(
    rf"^[-+]?[{_CURRENCY}]?\s*[-+]?(?:\d{{1,3}}(?:,\d{{3}})+|\d+)(?:\.\d*)?%?$|^[-+]?[{_CURRENCY}]?\.\d+%?$")
_MONTHS = "jan|feb|mar|apr|may|jun|jul|aug|sep|sept|oct|nov|dec"
_TEXT_DATE = re.compile(
    rf"^\d{{1,2}}/\d{{1,2}}/\d{{2,4}}$|^\d{{1,2}}-(?:{_MONTHS})[a-z]*-\d{{2,4}}$|^\d{{4}}-\d{{1,2}}-\d{{1,2}}$",
    re.IGNORECASE)


def text_lookalike(text: str) -> str | None:
    """'date', 'num' or None for the trimmed content of a text cell."""
    stripped = text.strip()
    if _TEXT_DATE.match(stripped):
        return "date"
    if _TEXT_NUM.match(stripped):
        return "num"
    return None


def count_text_lookalikes(wb: Workbook) -> tuple[Located, Located]:
    dates, nums = [], []
    for sheet in wb.sheets:
        for cell in sheet:
            if cell.kind is not ContentKind.TEXT or not isinstance(cell.cached_value, str):
                continue
            kind = text_lookalike(cell.cached_value)
            if kind == "date":
                dates.append((sheet.name, cell.address))
            elif kind == "num":
                nums.append((sheet.name, cell.address))
    return _located(dates), _located(nums)


def count_empty_refs(wb: Workbook) -> Located:
    """Formulas with a referenced cell, or a corner of a referenced range, that is empty."""
    hits, notes = [], []
    for sheet in wb.sheets:
        for cell in sheet:
            if not cell.is_formula:
                continue
            internal, _ = formula_precedents(wb, sheet.name, cell, notes)
            for target_name, rng in sorted(internal, key=lambda t: (t[0] or "", t[1].a1)):
                target = wb.sheet(target_name or sheet.name)
                if target is None or any(target.is_blank(c) for c in rng.corners()):
                    hits.append((sheet.name, cell.address))
                    break
    return _located(hits, dict.fromkeys(notes))


@dataclass(frozen=True)
class StaleSum:
    sheet: str
    address: CellAddress
    cached: float
    recomputed: float


def _plain_number(value) -> bool:
    return isinstance(value, (int, float)) and not isinstance(value, bool)


def stale_sums(wb: Workbook) -> list[StaleSum]:
    """SUM(range) formulas whose cached total disagrees with their constant operands."""
    out = []
    for sheet in wb.sheets:
        for cell in sheet:
            if not cell.is_formula or not _plain_number(cell.cached_value):
                continue
            ast = try_parse(cell)
            if ast is None:
                continue
            root = ast.root
            if not (isinstance(root, Call) and root.name.upper() == "SUM" and len(root.args) == 1
                    and isinstance(root.args[0], RangeRef) and root.args[0].book is None):
                continue
            ref = root.args[0]
            target = wb.sheet(ref.sheet) if ref.sheet else sheet
            if target is None:
                continue
            try:
                rng = ref.resolve(cell.address)
            except OutOfBoundsReference:
                continue
            total, mixed = 0.0, False
            for addr in rng.addresses():
                operand = target.get(addr)
                if operand is None or operand.is_empty:
                    continue
                if operand.kind is not ContentKind.NUMBER or not _plain_number(operand.cached_value):
                    mixed = True
                    break
                total += operand.cached_value
            if mixed:
                continue
            if abs(total - cell.cached_value) > STALE_TOLERANCE:
                out.append(StaleSum(sheet.name, cell.address, float(cell.cached_value), total))
    return out


def check_stale_sums(wb: Workbook) -> Located:
    return _located((s.sheet, s.address) for s in stale_sums(wb))


# --------------------------------------------------------------------------
# Scan


def _sheet_flags(sheet: Sheet, circular: bool) -> tuple[str, ...]:
    flags = set(sheet.flags)
    if sheet.protected:
        flags.add("protected")
    if sheet.hidden is Visibility.HIDDEN:
        flags.add("hidden")
    elif sheet.hidden is Visibility.VERY_HIDDEN:
        flags.add("very-hidden")
    if circular:
        flags.add("circular-reference")
    return tuple(sorted(flags))


def _contents(wb: Workbook) -> str | None:
    for sheet in wb.sheets:
        if sheet.hidden is Visibility.VISIBLE:
            cell = sheet.get(CellAddress(1, 1))
            return None if cell is None else value_text(cell.cached_value)
    return None


def score_of(metrics: Mapping[str, float], weights: Mapping[str, float]) -> float:
    return float(sum(weights.get(name, 0.0) * metrics[name] for name in METRICS))


def scan_workbook(wb: Workbook, weights: Mapping[str, float] | None = None,
                  observations: Iterable[str] = (), scan_time: float = 0.0) -> InventoryRecord:
    """Compute the inventory row for one loaded workbook."""
    weights = DEFAULT_WEIGHTS if weights is None else validate_weights(weights)
    notes = list(observations)

    cells = [(s, c) for s, c in wb.cells() if not c.is_empty]
    formulas = [(s, c) for s, c in cells if c.is_formula]
    for s, c in formulas:
        if try_parse(c) is None:
            notes.append(f"{s.name}!{c.address.a1}: formula could not be parsed; "
                         "excluded from reference-based checks")

    inconsistent = count_inconsistent(wb)
    omits = count_omits(wb)
    text_dates, text_nums = count_text_lookalikes(wb)
    empty_refs = count_empty_refs(wb)
    stale = check_stale_sums(wb)
    graph = build_precedent_graph(wb)
    cyclic_sheets = {key[0] for group in graph.cycles(wb) for key in group}
    for part in (inconsistent, omits, empty_refs):
        notes.extend(part.observations)
    notes.extend(graph.observations)

    metrics = {
        "size": wb.file_meta.size_bytes,
        "n_links": len(wb.external_links),
        "names": len(wb.defined_names),
        "worksheets": len(wb.sheets),
        "code_lines": sum(m.line_count for m in wb.vba_modules),
        "validation_cells": sum(1 for _, c in wb.cells() if c.has_validation),
        "comment_cells": sum(1 for _, c in wb.cells() if c.comment is not None),
        "constant_cells": sum(1 for _, c in cells if c.is_constant),
        "numeric_cells": sum(1 for _, c in cells if c.kind in (ContentKind.NUMBER, ContentKind.DATE)),
        "formula_cells": len(formulas),
        "error_formulas": sum(1 for _, c in formulas if isinstance(c.cached_value, CellError)),
        "error_values": sum(1 for _, c in cells if isinstance(c.cached_value, CellError)),
        "text_date": text_dates.count,
        "text_num": text_nums.count,
        "inconsistent_formulas": inconsistent.count,
        "omits_cells": omits.count,
        "unlocked_formulas": sum(1 for _, c in formulas if not c.locked),
        "empty_ref_formulas": empty_refs.count,
        "stale_sums": stale.count,
    }
    locations = {
        name: tuple(_where(s, a) for s, a in part.cells)
        for name, part in (("inconsistent_formulas", inconsistent), ("omits_cells", omits),
                           ("text_date", text_dates), ("text_num", text_nums),
                           ("empty_ref_formulas", empty_refs), ("stale_sums", stale))
        if part.cells
    }
    meta = wb.file_meta
    path = Path(wb.source_path)
    return InventoryRecord(
        full_path=str(path),
        filename=path.name,
        scan_time=scan_time,
        created=meta.created,
        accessed=meta.accessed,
        modified=meta.modified,
        attributes=tuple(sorted(meta.attributes)),
        observations=tuple(dict.fromkeys(notes)),
        file_format=meta.file_format,
        contents=_contents(wb),
        author=meta.author_property,
        manager=meta.manager_property,
        linked_files=tuple(wb.external_links),
        need_recalc=stale.count > 0,
        backup="backup" in wb.flags,
        unusual_wb=tuple(f for f in UNUSUAL_WB_FLAGS if f in wb.flags),
        unusual_ws_flags={s.name: _sheet_flags(s, s.name in cyclic_sheets) for s in wb.sheets},
        score=score_of(metrics, weights),
        locations=locations,
        **metrics,
    )


# --------------------------------------------------------------------------
# Manifest


class FileAttribute(enum.Enum):
    READ_WRITE = "read-write"
    READ_ONLY = "read-only"
    ARCHIVE = "archive"
    HIDE = "hide"


class Lifecycle(enum.Enum):
    CURRENT = "Current"
    ACTIVE = "Active"
    STANDBY = "Standby"
    ARCHIVE = "Archive"
    BACKUP = "Backup"


class Security(enum.Enum):
    SECRET = "Secret"
    CONFIDENTIAL = "Confidential"
    PRIVATE = "Private"
    COLLEAGUES = "Colleagues"
    ENTITY = "Entity"
    PUBLIC = "Public"


class Access(enum.Enum):
    UNIQUE = "Unique"
    RESTRICTED = "Restricted"
    UNRESTRICTED = "Unrestricted"


class ChangeReason(enum.Enum):
    CREATION = "Creation"
    MODIFICATION = "Modification"
    UPDATE = "Update"
    ADDITION = "Addition"
    DELETION = "Deletion"


_ENUM_FIELDS = {"attribute": FileAttribute, "lifecycle_type": Lifecycle, "security": Security,
                "access": Access, "reason_of_change": ChangeReason}
MANUAL_FIELDS = ("purpose", "lifecycle_type", "security", "access", "reason_of_change")


def parse_enum(kind: type[enum.Enum], text: str | enum.Enum | None):
    """Member of ``kind`` named by ``text`` (case-insensitive); None passes through."""
    if text is None or isinstance(text, kind):
        return text
    for member in kind:
        if member.value.casefold() == str(text).casefold():
            return member
    allowed = ", ".join(m.value for m in kind)
    raise InvalidEnumValue(f"{text!r} is not one of: {allowed}")


@dataclass(frozen=True)
class ManifestEntry:
    path_and_name: str
    timestamp: dt.datetime
    attribute: FileAttribute | None = None
    size: int | None = None
    author: str | None = None
    purpose: str | None = None
    lifecycle_type: Lifecycle | None = None
    security: Security | None = None
    access: Access | None = None
    reason_of_change: ChangeReason | None = None

    def __post_init__(self) -> None:
        if not self.path_and_name.strip():
            raise ValueError("path_and_name must be non-empty")
        for name, kind in _ENUM_FIELDS.items():
            object.__setattr__(self, name, parse_enum(kind, getattr(self, name)))

    @property
    def key(self) -> tuple[str, str]:
        return (self.path_and_name, self.timestamp.isoformat())

    def to_json(self) -> dict:
        out = asdict(self)
        out["timestamp"] = self.timestamp.isoformat()
        for name in _ENUM_FIELDS:
            value = getattr(self, name)
            out[name] = value.value if value is not None else None
        return out

    @classmethod
    def from_json(cls, data: Mapping) -> ManifestEntry:
        known = {f.name for f in fields(cls)}
        extra = set(data) - known
        if extra:
            raise ValueError(f"unknown manifest fields {sorted(extra)}")
        values = dict(data)
        values["timestamp"] = dt.datetime.fromisoformat(values["timestamp"])
        return cls(**values)

    @classmethod
    def from_file(cls, path: str | Path, meta, display_path: str | None = None,
                  **manual) -> ManifestEntry:
        """Entry whose computed fields come from a file's metadata."""
        attrs = meta.attributes
        if "hidden" in attrs:
            attribute = FileAttribute.HIDE
        elif "read-only" in attrs:
            attribute = FileAttribute.READ_ONLY
        elif "archive" in attrs:
            attribute = FileAttribute.ARCHIVE
        else:
            attribute = FileAttribute.READ_WRITE
        return cls(display_path or str(path), meta.modified or dt.datetime.now(dt.timezone.utc),
                   attribute, meta.size_bytes, meta.author_property, **manual)


def upsert_manifest(manifest: list[ManifestEntry], entry: ManifestEntry) -> list[ManifestEntry]:
    """Add ``entry`` to the manifest without losing history.

    A new (path, timestamp) appends an entry; manual fields left unset are
    carried over from the newest earlier entry for the same path. Re-recording
    an existing key refreshes that entry in place, keeping its manual fields
    unless new values are supplied.
    """
    same_key = [e for e in manifest if e.key == entry.key]
    same_path = [e for e in manifest if e.path_and_name == entry.path_and_name]
    base = same_key[-1] if same_key else (
        max(same_path, key=lambda e: e.timestamp) if same_path else None)
    if base is not None:
        carried = {n: getattr(base, n) for n in MANUAL_FIELDS if getattr(entry, n) is None}
        entry = replace(entry, **carried)
    if same_key:
        return [entry if e.key == entry.key else e for e in manifest]
    return [*manifest, entry]


class ManifestFile:
    """JSON-lines manifest; every upsert appends a line, reading folds them by key."""

    def __init__(self, path: str | Path) -> None:
        self.path = Path(path)

    def read(self) -> list[ManifestEntry]:
        manifest: list[ManifestEntry] = []
        if not self.path.exists():
            return manifest
        for number, line in enumerate(self.path.read_text(encoding="utf-8").splitlines(), 1):
            if not line.strip():
                continue
            try:
                entry = ManifestEntry.from_json(json.loads(line))
            except (ValueError, KeyError, TypeError) as exc:
                raise ConfigError(f"{self.path}:{number}: bad manifest line: {exc}") from None
            manifest = upsert_manifest(manifest, entry)
        return manifest

    def upsert(self, entry: ManifestEntry) -> list[ManifestEntry]:
        manifest = upsert_manifest(self.read(), entry)
        stored = next(e for e in manifest if e.key == entry.key)
        self.path.parent.mkdir(parents=True, exist_ok=True)
        with open(self.path, "a", encoding="utf-8") as fh:
            fh.write(json.dumps(stored.to_json(), sort_keys=True) + "\n")
        return manifest


__all__ = [
    "Access", "ChangeReason", "DEFAULT_WEIGHTS", "FileAttribute", "InventoryRecord", "Lifecycle",
    "Located", "METRICS", "ManifestEntry", "ManifestFile", "RISK_METRICS", "Security",
    "StaleSum", "check_stale_sums", "count_empty_refs", "count_inconsistent", "count_omits",
    "count_text_lookalikes", "load_weights", "scan_workbook", "stale_sums", "text_lookalike",
    "upsert_manifest", "validate_weights",
]
