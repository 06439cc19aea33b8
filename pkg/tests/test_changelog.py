from __future__ import annotations

import datetime as dt
from collections import Counter

import pytest
from hypothesis import given, settings, strategies as st

from conftest import FIXTURES, load
from sheetdoc.changelog import (
    BLANK, CHANGE_COLUMNS, ChangeKind, ChangeRecord, align_rows, diff_workbooks,
    history_footer, render_change_table,
)
from sheetdoc.ingest import load_fixture
from sheetdoc.model import Cell, CellAddress, ContentKind, Sheet, Workbook

WHEN = dt.datetime(2006, 2, 26, 11, 39)


def test_single_cell_change():
    (rec,) = diff_workbooks(load("amounts_before.fixture"), load("amounts_stale.fixture"),
                            "Raymond Payette", WHEN)
    assert rec.change is ChangeKind.CELL_CHANGE
    assert (rec.range, rec.new_value, rec.old_value) == ("R5C1", "1250", "1150")
    assert (rec.action_number, rec.sheet, rec.who) == (1, "Sheet1", "Raymond Payette")
    assert (rec.date, rec.time) == (WHEN.date(), WHEN.time())


@pytest.mark.parametrize("path", FIXTURES, ids=lambda p: p.stem)
@pytest.mark.parametrize("align", [False, True])
def test_identity_diff_is_empty(path, align):
    wb = load_fixture(path).workbook
    assert diff_workbooks(wb, wb, "x", WHEN, align_rows=align) == []


def test_empty_to_receipts_with_alignment():
    old, new = load("empty.fixture"), load("receipts.fixture")
    records = diff_workbooks(old, new, "Raymond Payette", WHEN, align_rows=True)
    populated = sorted({c.address.row for c in new.sheets[0].non_empty()})
    inserts = [r for r in records if r.change is ChangeKind.ROW_INSERT]
    changes = [r for r in records if r.change is ChangeKind.CELL_CHANGE]
    assert [r.range for r in inserts] == [f"R{n}" for n in populated]
    assert len(changes) == 11
    assert all(r.old_value is None and r.new_value for r in changes)
    assert {r.range for r in changes} == {c.address.r1c1 for c in new.sheets[0].non_empty()}
    # each row's insertion comes before the cells filled into it
    seen_rows = set()
    for r in records:
        if r.change is ChangeKind.ROW_INSERT:
            seen_rows.add(r.range)
        else:
            assert r.range.split("C")[0] in seen_rows
    assert [r.action_number for r in records] == list(range(1, len(records) + 1))


def test_formula_shown_as_text():
    records = diff_workbooks(load("empty.fixture"), load("receipts.fixture"), "x", WHEN)
    assert [r.new_value for r in records if r.range == "R12C1"] == ["=SUM(A2:A10)"]


def test_inserted_row_aligned():
    old = load("receipts.fixture")
    sheet = old.sheets[0]
    shifted = {}
    for cell in sheet:
        row = cell.address.row + (1 if cell.address.row >= 5 else 0)
        addr = CellAddress(row, cell.address.col)
        text = "=SUM(A2:A11)" if cell.is_formula else None
        shifted[addr] = Cell(addr, cell.kind, cell.cached_value, text, cell.number_format,
                             cell.locked, cell.has_validation, cell.comment)
    shifted[CellAddress(5, 1)] = Cell(CellAddress(5, 1), ContentKind.NUMBER, 100.0)
    new = Workbook(old.source_path, (Sheet("Sheet1", shifted),))
    records = diff_workbooks(old, new, "x", WHEN, align_rows=True)
    # the total's range grew to take in the new row, which is a real edit
    assert [(r.change, r.range) for r in records] == [
        (ChangeKind.ROW_INSERT, "R5"), (ChangeKind.CELL_CHANGE, "R5C1"),
        (ChangeKind.CELL_CHANGE, "R13C1")]
    assert len(diff_workbooks(old, new, "x", WHEN)) > 2


def test_sheet_added_and_removed():
    a = Workbook("a", (Sheet("One"),))
    b = Workbook("b", (Sheet("Two"),))
    kinds = [(r.change, r.sheet) for r in diff_workbooks(a, b, "x", WHEN)]
    assert kinds == [(ChangeKind.SHEET_ADDED, "Two"), (ChangeKind.SHEET_REMOVED, "One")]


def test_change_record_validation():
    with pytest.raises(ValueError):
        ChangeRecord(0, WHEN.date(), WHEN.time(), "x", ChangeKind.ROW_INSERT, "S", "R1")
    with pytest.raises(ValueError):
        ChangeRecord(1, WHEN.date(), WHEN.time(), "x", ChangeKind.CELL_CHANGE, "S", "R1C1")


# --------------------------------------------------------------------------
# Rendering


def _record(n, new="1250", old="1150"):
    return ChangeRecord(n, WHEN.date(), WHEN.time(), "Raymond Payette", ChangeKind.CELL_CHANGE,
                        "Sheet1", "R5C1", new, old)


def test_footer():
    assert history_footer(dt.datetime(2006, 2, 13, 21, 45)) == \
        "The history ends with the changes saved on 2/13/2006 at 9:45 PM."


def test_render_one_change():
    lines = render_change_table([_record(1)], WHEN).splitlines()
    assert lines[0] == ",".join(CHANGE_COLUMNS)
    assert lines[1] == "1,2/26/2006,11:39 AM,Raymond Payette,Cell Change,Sheet1,R5C1,1250,1150,,"
    assert lines[2] == history_footer(WHEN)
    assert len(lines) == 3


def test_render_empty():
    lines = render_change_table([], WHEN).splitlines()
    assert lines == [",".join(CHANGE_COLUMNS), history_footer(WHEN)]


def test_render_blank_old_value():
    row = render_change_table([_record(1, old=None)], WHEN).splitlines()[1]
    assert row.endswith(f",1250,{BLANK},,")


def test_render_twenty_rows():
    lines = render_change_table([_record(n) for n in range(1, 21)], WHEN).splitlines()
    assert [int(line.split(",")[0]) for line in lines[1:-1]] == list(range(1, 21))


def test_render_markdown_and_json():
    md = render_change_table([_record(1)], WHEN, "md")
    assert md.startswith("| Action Number |") and md.rstrip().endswith(history_footer(WHEN))
    import json
    data = json.loads(render_change_table([_record(1)], WHEN, "json"))
    assert data["changes"][0]["range"] == "R5C1"
    assert data["footer"] == history_footer(WHEN)


# --------------------------------------------------------------------------
# Properties

_VALUES = st.sampled_from([1.0, 2.0, 3.0, "a", "b"])


@st.composite
def sheets(draw):
    cells = {}
    for row in draw(st.sets(st.integers(1, 8), max_size=6)):
        for col in draw(st.sets(st.integers(1, 2), min_size=1)):
            value = draw(_VALUES)
            kind = ContentKind.TEXT if isinstance(value, str) else ContentKind.NUMBER
            addr = CellAddress(row, col)
            cells[addr] = Cell(addr, kind, value)
    return Workbook("w", (Sheet("S", cells),))


def _signature(records, swap):
    out = Counter()
    for r in records:
        kind = r.change.mirror if swap else r.change
        values = (r.old_value, r.new_value) if swap else (r.new_value, r.old_value)
        out[(kind, r.range if r.change is ChangeKind.CELL_CHANGE else "", values)] += 1
    return out


@settings(max_examples=200, deadline=None)
@given(sheets(), sheets())
def test_symmetry_positional(a, b):
    forward = diff_workbooks(a, b, "x", WHEN)
    backward = diff_workbooks(b, a, "x", WHEN)
    assert _signature(forward, False) == _signature(backward, True)


@settings(max_examples=200, deadline=None)
@given(sheets(), sheets())
def test_symmetry_aligned_kinds(a, b):
    forward = Counter(r.change for r in diff_workbooks(a, b, "x", WHEN, align_rows=True))
    backward = Counter(r.change.mirror for r in diff_workbooks(b, a, "x", WHEN, align_rows=True))
    assert forward == backward


@settings(max_examples=200, deadline=None)
@given(sheets(), sheets())
def test_alignment_partitions_rows(a, b):
    pairs, inserted, deleted = align_rows(a.sheets[0], b.sheets[0])
    old_rows = {c.address.row for c in a.sheets[0].non_empty()}
    new_rows = {c.address.row for c in b.sheets[0].non_empty()}
    assert sorted([o for o, _ in pairs] + deleted) == sorted(old_rows)
    assert sorted([n for _, n in pairs] + inserted) == sorted(new_rows)
    assert [n for _, n in pairs] == sorted(n for _, n in pairs)
