"""Differences between two saved versions of a workbook, as a change history.

Sheets are matched by name. Rows can optionally be aligned first, so that an
inserted row shows up as one insertion instead of a cascade of cell changes
below it. Columns always compare positionally.
"""

from __future__ import annotations

import datetime as dt
import enum
from dataclasses import dataclass
from typing import Sequence

from .docschema import format_date, format_time
from .errors import FormulaSyntaxError, OutOfBoundsReference
from .formula import parse_formula, relative_normal_form
from .model import Cell, CellAddress, Sheet, Workbook, _canon_scalar, value_text
from .tabular import OutputFormat, render_rows, to_json


class ChangeKind(enum.Enum):
    CELL_CHANGE = "Cell Change"
    ROW_INSERT = "Row Insert"
    ROW_DELETE = "Row Delete"
    COL_INSERT = "Column Insert"
    COL_DELETE = "Column Delete"
    SHEET_ADDED = "Sheet Added"
    SHEET_REMOVED = "Sheet Removed"

    @property
    def mirror(self) -> ChangeKind:
        return _MIRROR.get(self, self)


_MIRROR = {
    ChangeKind.ROW_INSERT: ChangeKind.ROW_DELETE, ChangeKind.ROW_DELETE: ChangeKind.ROW_INSERT,
    ChangeKind.COL_INSERT: ChangeKind.COL_DELETE, ChangeKind.COL_DELETE: ChangeKind.COL_INSERT,
    ChangeKind.SHEET_ADDED: ChangeKind.SHEET_REMOVED, ChangeKind.SHEET_REMOVED: ChangeKind.SHEET_ADDED,
}


@dataclass(frozen=True)
class ChangeRecord:
    action_number: int
    date: dt.date
    time: dt.time
    who: str
    change: ChangeKind
    sheet: str
    range: str
    new_value: str | None = None
    old_value: str | None = None

    def __post_init__(self) -> None:
        if self.action_number < 1:
            raise ValueError("action numbers start at 1")
        if self.change is ChangeKind.CELL_CHANGE and not (self.old_value or self.new_value):
            raise ValueError("a cell change needs an old or a new value")


# --------------------------------------------------------------------------
# Cell content


def display_text(cell: Cell | None) -> str | None:
    """What a change table shows for a cell: formula text, else the cached value."""
    if cell is None or cell.is_empty:
        return None
    if cell.is_formula:
        return cell.formula_text
    return value_text(cell.cached_value)


def content_key(cell: Cell | None, address: CellAddress | None = None):
    """Comparable content of a cell; formulas compare in relative normal form."""
    if cell is None or cell.is_empty:
        return None
    if cell.is_formula:
        try:
            return ("formula", relative_normal_form(parse_formula(cell.formula_text),
                                                    address or cell.address))
        except (FormulaSyntaxError, OutOfBoundsReference):
            return ("formula-text", cell.formula_text)
    return (cell.kind.value, _canon_scalar(cell.cached_value))


def _row_cells(sheet: Sheet) -> dict[int, dict[int, Cell]]:
    rows: dict[int, dict[int, Cell]] = {}
    for cell in sheet.non_empty():
        rows.setdefault(cell.address.row, {})[cell.address.col] = cell
    return rows


def _row_keys(cells: dict[int, Cell]) -> dict[int, object]:
    return {col: content_key(cell) for col, cell in sorted(cells.items())}


def _row_distance(old: dict[int, object], new: dict[int, object]) -> int:
    """Cell changes needed to turn one populated row into the other."""
    return sum(1 for col in set(old) | set(new) if old.get(col) != new.get(col))


def _best_alignment(old: list[dict[int, object]], new: list[dict[int, object]]) -> list[tuple[int, int]]:
    """Order-preserving pairing of row indices.

    Priorities, in order: most identical rows matched, most rows paired,
    fewest cell changes. All three ignore argument order, so swapping the
    inputs yields the mirrored alignment counts.
    """
    old_fp = [tuple(r.items()) for r in old]
    new_fp = [tuple(r.items()) for r in new]
    # identical leading and trailing rows are always matched by some optimum
    head = 0
    while head < min(len(old), len(new)) and old_fp[head] == new_fp[head]:
        head += 1
    tail = 0
    while (tail < min(len(old), len(new)) - head
           and old_fp[len(old) - 1 - tail] == new_fp[len(new) - 1 - tail]):
        tail += 1
    n, m = len(old) - head - tail, len(new) - head - tail
    o, w = old[head:head + n], new[head:head + m]
    o_fp, w_fp = old_fp[head:head + n], new_fp[head:head + m]

    def paired(i, j):
        a, b, c = best[i + 1][j + 1]
        if o_fp[i] == w_fp[j]:
            return a + 1, b + 1, c
        return a, b + 1, c - _row_distance(o[i], w[j])

    best = [[(0, 0, 0)] * (m + 1) for _ in range(n + 1)]
    for i in range(n - 1, -1, -1):
        best[i][m] = (0, 0, best[i + 1][m][2] - len(o[i]))
    for j in range(m - 1, -1, -1):
        best[n][j] = (0, 0, best[n][j + 1][2] - len(w[j]))
    for i in range(n - 1, -1, -1):
        for j in range(m - 1, -1, -1):
            pair = paired(i, j)
            a, b, c = best[i + 1][j]
            drop = (a, b, c - len(o[i]))
            a, b, c = best[i][j + 1]
            add = (a, b, c - len(w[j]))
            best[i][j] = max(pair, drop, add)

    pairs = [(k, k) for k in range(head)]
    i = j = 0
    while i < n and j < m:
        if best[i][j] == paired(i, j):
            pairs.append((head + i, head + j))
            i += 1
            j += 1
        elif best[i][j] == (best[i][j + 1][0], best[i][j + 1][1], best[i][j + 1][2] - len(w[j])):
            j += 1
        else:
            i += 1
    pairs.extend((len(old) - tail + k, len(new) - tail + k) for k in range(tail))
    return pairs


def align_rows(old: Sheet, new: Sheet) -> tuple[list[tuple[int, int]], list[int], list[int]]:
    """(paired old/new rows, inserted new rows, deleted old rows) over populated rows.

    Identical rows are matched first; remaining rows are paired as edits
    where order allows, and the rest are inserted or deleted.
    """
    old_rows, new_rows = _row_cells(old), _row_cells(new)
    old_keys, new_keys = sorted(old_rows), sorted(new_rows)
    index_pairs = _best_alignment([_row_keys(old_rows[r]) for r in old_keys],
                                  [_row_keys(new_rows[r]) for r in new_keys])
    pairs = [(old_keys[i], new_keys[j]) for i, j in index_pairs]
    paired_old = {o for o, _ in pairs}
    paired_new = {n for _, n in pairs}
    inserted = [r for r in new_keys if r not in paired_new]
    deleted = [r for r in old_keys if r not in paired_old]
    return pairs, inserted, deleted


# --------------------------------------------------------------------------
# Diff


def _cell_changes(old_cells, new_cells, old_row, new_row, sheet_name, out):
    for col in sorted(set(old_cells) | set(new_cells)):
        before, after = old_cells.get(col), new_cells.get(col)
        old_addr = CellAddress(old_row, col) if old_row else None
        new_addr = CellAddress(new_row, col) if new_row else None
        if content_key(before, old_addr) == content_key(after, new_addr):
            continue
        row = new_row or old_row
        out.append(((row, col, 1), ChangeKind.CELL_CHANGE, sheet_name,
                    CellAddress(row, col).r1c1, display_text(after), display_text(before)))


def _diff_sheet(old: Sheet, new: Sheet, align: bool) -> list[tuple]:
    out: list[tuple] = []
    old_rows, new_rows = _row_cells(old), _row_cells(new)
    if not align:
        for row in sorted(set(old_rows) | set(new_rows)):
            _cell_changes(old_rows.get(row, {}), new_rows.get(row, {}), row, row, new.name, out)
        return out
    pairs, inserted, deleted = align_rows(old, new)
    for o, n in pairs:
        _cell_changes(old_rows[o], new_rows[n], o, n, new.name, out)
    for n in inserted:
        out.append(((n, 0, 0), ChangeKind.ROW_INSERT, new.name, f"R{n}", None, None))
        _cell_changes({}, new_rows[n], None, n, new.name, out)
    for o in deleted:
        out.append(((o, 0, 0), ChangeKind.ROW_DELETE, new.name, f"R{o}", None, None))
        _cell_changes(old_rows[o], {}, o, None, new.name, out)
    out.sort(key=lambda t: t[0])
    return out


def diff_workbooks(old: Workbook, new: Workbook, who: str, when: dt.datetime,
                   align_rows: bool = False) -> list[ChangeRecord]:
    """Change records turning ``old`` into ``new``, numbered from 1."""
    raw: list[tuple] = []
    for sheet in new.sheets:
        before = old.sheet(sheet.name)
        if before is None or before.name != sheet.name:
            raw.append((ChangeKind.SHEET_ADDED, sheet.name, "", None, None))
            continue
        raw.extend(r[1:] for r in _diff_sheet(before, sheet, align_rows))
    new_names = {s.name for s in new.sheets}
    for sheet in old.sheets:
        if sheet.name not in new_names:
            raw.append((ChangeKind.SHEET_REMOVED, sheet.name, "", None, None))
    date, time = when.date(), when.time().replace(microsecond=0)
    return [ChangeRecord(n, date, time, who, kind, sheet, rng, new_value, old_value)
            for n, (kind, sheet, rng, new_value, old_value) in enumerate(raw, start=1)]


# --------------------------------------------------------------------------
# Rendering

CHANGE_COLUMNS = ("Action Number", "Date", "Time", "Who", "Change", "Sheet", "Range",
                  "New Value", "Old Value", "Action Type", "Losing Action")
BLANK = "<blank>"


def history_footer(saved_at: dt.datetime) -> str:
    return (f"The history ends with the changes saved on {format_date(saved_at.date())} "
            f"at {format_time(saved_at.time())}.")


def change_rows(records: Sequence[ChangeRecord]) -> list[list[object]]:
    rows = []
    for r in records:
        if r.change is ChangeKind.CELL_CHANGE:
            new, old = r.new_value or BLANK, r.old_value or BLANK
        else:
            new, old = r.new_value or "", r.old_value or ""
        rows.append([r.action_number, format_date(r.date), format_time(r.time), r.who,
                     r.change.value, r.sheet, r.range, new, old, "", ""])
    return rows


def render_change_table(records: Sequence[ChangeRecord], saved_at: dt.datetime,
                        fmt: OutputFormat | str = OutputFormat.CSV) -> str:
    """The 11-column change table followed by the history-end sentence."""
    fmt = OutputFormat.parse(fmt)
    footer = history_footer(saved_at)
    if fmt is OutputFormat.JSON:
        return to_json({
            "changes": [
                {"action_number": r.action_number, "date": r.date.isoformat(),
                 "time": r.time.isoformat(), "who": r.who, "change": r.change.value,
                 "sheet": r.sheet, "range": r.range, "new_value": r.new_value,
                 "old_value": r.old_value}
                for r in records
            ],
            "history_end": saved_at.isoformat(),
            "footer": footer,
        })
    table = render_rows(CHANGE_COLUMNS, change_rows(records), fmt)
    if fmt is OutputFormat.MARKDOWN:
        return table + "\n" + footer + "\n"
    return table + footer + "\n"


__all__ = [
    "CHANGE_COLUMNS", "ChangeKind", "ChangeRecord", "align_rows", "content_key",
    "diff_workbooks", "display_text", "history_footer", "render_change_table",
]
