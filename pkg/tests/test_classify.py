from __future__ import annotations

from hypothesis import given, settings, strategies as st

from conftest import load
from sheetdoc.classify import (
    CellType, Coverage, build_precedent_graph, classify_cell, compute_coverage, covering_records,
    formula_precedents,
)
from sheetdoc.docschema import CellOrigin, DocRecord, DocType, records_from_workbook
from sheetdoc.model import CellAddress, CellRange, parse_a1, parse_range

FEATURES = load("features.fixture")
RECEIPTS = load("receipts.fixture")


def _cell(wb, sheet, a1):
    return wb.sheet(sheet).get(parse_a1(a1))


def test_classify_types():
    assert classify_cell(_cell(FEATURES, "Sheet1", "A1")) is CellType.TITLE
    assert classify_cell(_cell(FEATURES, "Sheet1", "A2")) is CellType.DATA
    assert classify_cell(_cell(FEATURES, "Sheet1", "C2")) is CellType.DATA
    assert classify_cell(_cell(FEATURES, "Sheet1", "B2")) is CellType.FORMULA
    assert classify_cell(_cell(FEATURES, "Sheet1", "E4")) is CellType.LINK
    assert CellType.LINK.code == "L"


def test_precedents_expand_defined_names():
    internal, external = formula_precedents(FEATURES, "Sheet1", _cell(FEATURES, "Sheet1", "E3"))
    assert internal == {("Sheet1", parse_range("A2:A5"))}
    assert external == set()


def test_precedents_report_external():
    internal, external = formula_precedents(FEATURES, "Sheet1", _cell(FEATURES, "Sheet1", "E4"))
    assert external == {("Rates.xlsx", "Rates", "A1")}
    assert internal == {("Sheet1", parse_range("A2"))}


def test_graph_and_cycles():
    graph = build_precedent_graph(FEATURES)
    assert graph.precedents("Sheet1", parse_a1("A7")) == {("Sheet1", parse_range("A2:A4"))}
    cycles = graph.cycles(FEATURES)
    assert cycles == [[("Cycle", parse_a1("A1")), ("Cycle", parse_a1("B1"))]]
    assert build_precedent_graph(RECEIPTS).cycles(RECEIPTS) == []


def test_transitive_precedents():
    graph = build_precedent_graph(FEATURES)
    hits = graph.transitive_precedents(FEATURES, "Sheet1", parse_a1("B2"))
    assert hits == {("Sheet1", parse_a1("A2"))}


def test_receipts_fully_documented():
    records, _ = records_from_workbook(RECEIPTS)
    coverage = compute_coverage(RECEIPTS, records)
    assert coverage.undocumented() == []
    assert len(coverage.documented()) == 11
    assert coverage.status_of("Sheet1", parse_a1("A11")) is Coverage.NOT_APPLICABLE_EMPTY


def test_formula_range_does_not_cover_inputs():
    records, _ = records_from_workbook(RECEIPTS)
    formula_only = [r for r in records if r.cell_type is DocType.FORMULA]
    covering = covering_records(RECEIPTS, formula_only)
    assert list(covering) == [("Sheet1", parse_a1("A12"))]


def test_smallest_region_wins():
    wide = DocRecord("a", purpose="wide", cell_type=DocType.DATA, range=parse_range("A2:A10"),
                     origin=CellOrigin("Sheet1", parse_a1("A2")))
    narrow = DocRecord("a", purpose="narrow", cell_type=DocType.DATA, range=parse_range("A5:A6"),
                       origin=CellOrigin("Sheet1", parse_a1("A5")))
    covering = covering_records(RECEIPTS, [wide, narrow])
    assert covering[("Sheet1", parse_a1("A5"))] is narrow
    assert covering[("Sheet1", parse_a1("A3"))] is wide


_ADDR = st.builds(CellAddress, st.integers(1, 13), st.integers(1, 3))


@st.composite
def cell_records(draw):
    origin = draw(_ADDR)
    rng = CellRange.spanning(draw(_ADDR), draw(_ADDR))
    return DocRecord("a", purpose="p", cell_type=draw(st.sampled_from(list(DocType))),
                     range=rng, origin=CellOrigin("Sheet1", origin))


@settings(max_examples=200, deadline=None)
@given(st.lists(cell_records(), max_size=5), cell_records())
def test_coverage_monotone_under_addition(records, extra):
    before = set(compute_coverage(RECEIPTS, records).documented())
    after = set(compute_coverage(RECEIPTS, records + [extra]).documented())
    assert before <= after
