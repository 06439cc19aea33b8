"""Documentation tables, attribute maps and coverage maps."""

from __future__ import annotations

import datetime as dt
from dataclasses import dataclass, field
from typing import Iterable, Sequence

from .classify import classify_cell, compute_coverage, covering_records
from .docschema import (
    NA, DocRecord, Unstructured, format_date, format_time,
    records_from_workbook,
)
from .errors import UnknownField
from .macros import MacroModule, parse_macro_headers
from .model import CellAddress, CellRange, Workbook, column_letters
from .tabular import OutputFormat, render_rows, to_json, to_markdown

DOC_COLUMNS = ("Author", "Date", "Time", "Purpose", "Type", "Source", "Range", "Format",
               "Checked by", "Date", "Update")
FIELDS = ("author", "date", "time", "purpose", "cell_type", "source", "range", "format",
          "checked_by", "checked_date", "update")

_ALIASES = {
    **{f: f for f in FIELDS},
    "type": "cell_type", "checked by": "checked_by", "checked-by": "checked_by",
    "reviewer": "checked_by", "checked date": "checked_date", "checked-date": "checked_date",
    "review date": "checked_date", "notes": "notes",
}


def resolve_field(name: str) -> str:
    """Record attribute for a column or field name; raises UnknownField."""
    key = name.strip().casefold().replace("_", " ")
    for candidate in (key, key.replace(" ", "_")):
        if candidate in _ALIASES:
            return _ALIASES[candidate]
    raise UnknownField(f"unknown field {name!r}; expected one of: {', '.join(FIELDS)}")


def field_text(record: DocRecord, name: str) -> str:
    """A record field as it appears in a report cell."""
    attr = resolve_field(name)
    value = getattr(record, attr)
    if attr == "notes":
        return " / ".join(value)
    if value is None:
        return ""
    if value is NA:
        if attr == "range" and record.range_text and record.range_text.strip().casefold() not in ("na", "n/a"):
            return record.range_text
        return "NA"
    if attr in ("date", "checked_date"):
        return format_date(value)
    if attr == "time":
        return format_time(value)
    if attr == "cell_type":
        return value.value
    if isinstance(value, CellRange):
        return value.a1
    return str(value)


def _sort_value(record: DocRecord, attr: str):
    value = getattr(record, attr)
    if attr in ("date", "checked_date", "time"):
        # missing values sort last
        return (value is None, value if value is not None else (dt.time() if attr == "time" else dt.date.min))
    return (False, field_text(record, attr).casefold())


@dataclass(frozen=True)
class DocTable:
    rows: tuple[DocRecord, ...] = ()
    unstructured: tuple[Unstructured, ...] = field(default=(), compare=False)

    @property
    def columns(self) -> tuple[str, ...]:
        return DOC_COLUMNS

    def summary(self) -> str:
        n = len(self.unstructured)
        return f"{len(self.rows)} documented record(s); {n} unstructured comment(s) not tabulated"

    def text_rows(self) -> list[list[str]]:
        return [[field_text(r, f) for f in FIELDS] for r in self.rows]


def build_doc_table(wb: Workbook, macros: Iterable[MacroModule] = ()) -> DocTable:
    """Every structured record: cells in sheet and address order, then macros."""
    records, loose = records_from_workbook(wb)
    for module in macros:
        for _, parsed in parse_macro_headers(module):
            if isinstance(parsed, DocRecord):
                records.append(parsed)
            elif parsed.body.strip():
                loose.append(parsed)
    return DocTable(tuple(records), tuple(loose))


def filter_sort(table: DocTable, filters: Sequence[tuple[str, str]] = (),
                sort_keys: Sequence[str] = ()) -> DocTable:
    """Keep rows whose fields equal the filter values (case-insensitive), then stable-sort."""
    resolved = [(resolve_field(f), v.strip().casefold()) for f, v in filters]
    keys = [resolve_field(k) for k in sort_keys]
    rows = [r for r in table.rows
            if all(field_text(r, attr).strip().casefold() == want for attr, want in resolved)]
    if keys:
        rows.sort(key=lambda r: tuple(_sort_value(r, k) for k in keys))
    return DocTable(tuple(rows), table.unstructured)


def parse_filter(text: str) -> tuple[str, str]:
    name, sep, value = text.partition("=")
    if not sep:
        raise ValueError(f"filter {text!r} must look like <field>=<value>")
    resolve_field(name)
    return name.strip(), value.strip()


# --------------------------------------------------------------------------
# Maps

SheetCell = tuple[str, CellAddress]


@dataclass(frozen=True)
class AttributeMap:
    field: str
    grid: dict[SheetCell, str]
    sheets: tuple[str, ...] = ()


def build_attribute_map(wb: Workbook, records: Iterable[DocRecord], field_name: str) -> AttributeMap:
    """Each documented cell carries its covering record's value for ``field_name``."""
    attr = resolve_field(field_name)
    covering = covering_records(wb, records)
    grid = {key: field_text(rec, attr) for key, rec in covering.items()}
    return AttributeMap(attr, grid, tuple(s.name for s in wb.sheets))


def coverage_code_map(wb: Workbook, records: Iterable[DocRecord]) -> AttributeMap:
    """Cell-type letters, uppercase for documented cells and lowercase otherwise."""
    coverage = compute_coverage(wb, records)
    grid = {}
    for sheet in wb.sheets:
        for cell in sheet.non_empty():
            code = classify_cell(cell).code
            key = (sheet.name, cell.address)
            grid[key] = code if key in coverage.covering else code.lower()
    return AttributeMap("coverage", grid, tuple(s.name for s in wb.sheets))


def map_rows(amap: AttributeMap) -> list[list[str]]:
    order = {name: i for i, name in enumerate(amap.sheets)}
    keys = sorted(amap.grid, key=lambda k: (order.get(k[0], len(order)), k[1].row, k[1].col))
    return [[sheet, addr.a1, amap.grid[(sheet, addr)]] for sheet, addr in keys]


def map_grid(amap: AttributeMap, sheet: str) -> list[list[str]]:
    """Rows 1..n and columns A..m of one sheet, blank where undocumented."""
    cells = {addr: v for (s, addr), v in amap.grid.items() if s == sheet}
    if not cells:
        return []
    n_rows = max(a.row for a in cells)
    n_cols = max(a.col for a in cells)
    return [[str(r)] + [cells.get(CellAddress(r, c), "") for c in range(1, n_cols + 1)]
            for r in range(1, n_rows + 1)]


def _map_label(amap: AttributeMap) -> str:
    if amap.field == "coverage":
        return "Type"
    return DOC_COLUMNS[FIELDS.index(amap.field)] if amap.field in FIELDS else amap.field


# --------------------------------------------------------------------------
# Rendering


def _record_json(record: DocRecord) -> dict:
    def iso(value):
        return value.isoformat() if value is not None else None

    return {
        "origin": str(record.origin) if record.origin is not None else None,
        "author": record.author,
        "date": iso(record.date),
        "time": iso(record.time),
        "purpose": record.purpose,
        "type": record.cell_type.value if record.cell_type is not None else None,
        "source": field_text(record, "source") or None,
        "range": field_text(record, "range") or None,
        "format": record.format,
        "checked_by": record.checked_by,
        "checked_date": iso(record.checked_date),
        "update": field_text(record, "update") or None,
        "notes": list(record.notes),
    }


def render_table(table: DocTable, fmt: OutputFormat | str = OutputFormat.CSV) -> str:
    """CSV and Markdown hold the table alone; JSON also carries the unstructured count.

    Callers report ``table.summary()`` next to text renderings.
    """
    fmt = OutputFormat.parse(fmt)
    if fmt is OutputFormat.JSON:
        return to_json({"columns": list(DOC_COLUMNS),
                        "rows": [_record_json(r) for r in table.rows],
                        "unstructured": len(table.unstructured)})
    return render_rows(DOC_COLUMNS, table.text_rows(), fmt)


def render_map(amap: AttributeMap, fmt: OutputFormat | str = OutputFormat.CSV) -> str:
    """CSV and JSON list one documented cell per row; Markdown draws a grid per sheet."""
    fmt = OutputFormat.parse(fmt)
    label = _map_label(amap)
    if fmt is OutputFormat.JSON:
        return to_json({"field": label,
                        "cells": [{"sheet": s, "cell": a, "value": v} for s, a, v in map_rows(amap)]})
    if fmt is OutputFormat.CSV:
        return render_rows(("Sheet", "Cell", label), map_rows(amap), fmt)
    parts = []
    for sheet in amap.sheets:
        grid = map_grid(amap, sheet)
        if not grid:
            continue
        header = [""] + [column_letters(c) for c in range(1, len(grid[0]))]
        parts.append(f"{sheet} ({label})\n\n" + to_markdown(header, grid))
    return "\n".join(parts)


__all__ = [
    "AttributeMap", "DOC_COLUMNS", "DocTable", "FIELDS", "build_attribute_map",
    "build_doc_table", "coverage_code_map", "field_text", "filter_sort", "map_grid",
    "map_rows", "parse_filter", "render_map", "render_table", "resolve_field",
]
