from __future__ import annotations

import datetime as dt
import json

import pytest
from hypothesis import given, strategies as st

from conftest import load
from sheetdoc.errors import ConfigError, InvalidEnumValue
from sheetdoc.ingest import parse_fixture
from sheetdoc.inventory import (
    DEFAULT_WEIGHTS, METRICS, RISK_METRICS, ChangeReason, FileAttribute, ManifestEntry,
    ManifestFile, Security, check_stale_sums, count_empty_refs, count_inconsistent, count_omits,
    count_text_lookalikes, load_weights, scan_workbook, stale_sums, text_lookalike,
    upsert_manifest, validate_weights,
)
from sheetdoc.model import parse_a1


def book(*cells: str, sheet: str = "Sheet1"):
    return parse_fixture("\n".join([f"SHEET {sheet}", *cells]))


def num(a1, value):
    return f"CELL {a1} TYPE num VALUE {value}"


def formula(a1, text, cached=0):
    return f'CELL {a1} TYPE formula VALUE {cached} FORMULA "{text}" LOCKED'


def _cells(located):
    return [(s, a.a1) for s, a in located.cells]


# --------------------------------------------------------------------------
# Whole-workbook scans


def test_scan_receipts():
    rec = scan_workbook(load("receipts.fixture"))
    assert (rec.worksheets, rec.constant_cells, rec.numeric_cells, rec.formula_cells,
            rec.comment_cells, rec.names, rec.n_links) == (1, 10, 9, 1, 3, 0, 0)
    assert rec.validation_cells == 9
    assert rec.score == 0
    assert rec.contents == "Items"
    assert not rec.need_recalc


def test_scan_empty():
    rec = scan_workbook(load("empty.fixture"))
    assert all(getattr(rec, m) == 0 for m in METRICS if m not in ("worksheets", "size"))
    assert rec.score == 0


def test_scan_error_formula():
    rec = scan_workbook(book('CELL A1 TYPE formula VALUE #DIV/0! FORMULA "=1/0" LOCKED'))
    assert (rec.error_formulas, rec.error_values) == (1, 1)


def test_scan_features():
    rec = scan_workbook(load("features.fixture"))
    expected = {
        "constant_cells": 16, "numeric_cells": 7, "formula_cells": 13, "error_formulas": 1,
        "error_values": 1, "text_date": 1, "text_num": 1, "inconsistent_formulas": 1,
        "omits_cells": 1, "unlocked_formulas": 3, "empty_ref_formulas": 1, "names": 2,
        "code_lines": 18, "n_links": 1, "worksheets": 3,
    }
    assert {k: getattr(rec, k) for k in expected} == expected
    assert rec.score == 10
    assert set(rec.unusual_ws_flags["Cycle"]) == {"very-hidden", "circular-reference",
                                                 "consolidation-sources"}
    assert "protected" in rec.unusual_ws_flags["Sheet1"]
    assert rec.n_unusual_ws == 3
    assert rec.backup
    assert rec.unusual_wb == ("custom-document-properties", "excel4-macro-sheets",
                              "precision-as-displayed", "remove-personal-information")
    assert rec.locations["inconsistent_formulas"] == ("Sheet1!B5",)
    row = rec.row()
    assert row["Scoring"] == 10 and row["Inconsis"] == 1


# --------------------------------------------------------------------------
# Heuristics


def test_inconsistent_column():
    wb = book(*(num(f"A{r}", r) for r in range(2, 6)),
              formula("B2", "=A2*2"), formula("B3", "=A3*2"), formula("B4", "=A4*2"),
              formula("B5", "=A5*3"))
    assert _cells(count_inconsistent(wb)) == [("Sheet1", "B5")]


def test_uniform_column_is_consistent():
    wb = book(*(formula(f"B{r}", f"=A{r}*2") for r in range(1, 20)))
    assert count_inconsistent(wb).count == 0


def test_two_cell_region_below_threshold():
    wb = book(formula("B2", "=A2*2"), formula("B3", "=A3*3"))
    assert count_inconsistent(wb).count == 0


def test_no_majority_is_observed_not_scored():
    wb = book(formula("B1", "=A1*2"), formula("B2", "=A2*3"), formula("B3", "=A3*4"),
              formula("B4", "=A4*5"))
    located = count_inconsistent(wb)
    assert located.count == 0
    assert any("no majority" in o for o in located.observations)


def test_omits_adjacent_numeric():
    wb = book(*(num(f"A{r}", r) for r in range(1, 6)), formula("A6", "=SUM(A1:A4)"))
    assert _cells(count_omits(wb)) == [("Sheet1", "A6")]


def test_omits_receipts_clean():
    assert count_omits(load("receipts.fixture")).count == 0


def test_omits_without_ranges():
    assert count_omits(book(num("A1", 1), formula("A2", "=A1+1"))).count == 0


@pytest.mark.parametrize("text,kind", [
    ("1,385.45", "num"), ("$1,385", "num"), ("-12", "num"), ("45%", "num"),
    ("2/20/2006", "date"), ("2006-02-20", "date"), ("20-Feb-2006", "date"),
    ("Items", None), ("", None), ("A2:A10", None),
])
def test_text_lookalike(text, kind):
    assert text_lookalike(text) == kind


def test_count_text_lookalikes():
    wb = book('CELL A1 TYPE text VALUE "1,385.45"', 'CELL A2 TYPE text VALUE "2/20/2006"',
              'CELL A3 TYPE text VALUE "Items"')
    dates, nums = count_text_lookalikes(wb)
    assert (_cells(dates), _cells(nums)) == ([("Sheet1", "A2")], [("Sheet1", "A1")])


def test_empty_refs():
    assert count_empty_refs(book(formula("A1", "=B1+1"))).count == 1
    assert count_empty_refs(load("receipts.fixture")).count == 0
    wb = book(*(num(f"A{r}", r) for r in range(2, 11)), formula("A12", "=SUM(A2:A11)"))
    assert _cells(count_empty_refs(wb)) == [("Sheet1", "A12")]


AMOUNTS = (1000, 1250, 1350, 1250, 1000)


def test_stale_sum_detected():
    (stale,) = stale_sums(load("amounts_stale.fixture"))
    assert stale.cached == 5750
    assert stale.recomputed == pytest.approx(sum(AMOUNTS), abs=0.005)
    assert stale.address == parse_a1("A7")


def test_fresh_sum_not_stale():
    wb = book(*(num(f"A{r}", v) for r, v in enumerate(AMOUNTS, start=2)),
              formula("A7", "=SUM(A2:A6)", sum(AMOUNTS)))
    assert check_stale_sums(wb).count == 0
    assert check_stale_sums(load("empty.fixture")).count == 0


def test_stale_sum_needs_recalc():
    rec = scan_workbook(load("amounts_stale.fixture"))
    assert rec.stale_sums == 1 and rec.need_recalc


def test_stale_check_skips_text_operands():
    wb = book(num("A1", 1), 'CELL A2 TYPE text VALUE "x"', formula("A3", "=SUM(A1:A2)", 99))
    assert check_stale_sums(wb).count == 0


# --------------------------------------------------------------------------
# Weights and score


def test_default_weights_score_risk_only():
    assert all(DEFAULT_WEIGHTS[m] == 1.0 for m in RISK_METRICS)
    assert sum(DEFAULT_WEIGHTS.values()) == len(RISK_METRICS)


@pytest.mark.parametrize("raw", [{"bogus": 1}, {"text_num": -1}, {"text_num": "1"},
                                 {"text_num": True}, {"text_num": float("nan")}, [1]])
def test_validate_weights_rejects(raw):
    with pytest.raises(ConfigError):
        validate_weights(raw)


def test_load_weights_overlays_defaults(tmp_path, monkeypatch):
    path = tmp_path / "w.json"
    path.write_text(json.dumps({"text_num": 5, "size": 0.5}))
    weights = load_weights(path)
    assert weights["text_num"] == 5 and weights["size"] == 0.5 and weights["text_date"] == 1
    monkeypatch.setenv("SHEETDOC_WEIGHTS", str(path))
    assert load_weights() == weights
    path.write_text("{not json")
    with pytest.raises(ConfigError):
        load_weights(path)


FEATURES = load("features.fixture")
_WEIGHTS = st.fixed_dictionaries({m: st.floats(0, 100, allow_nan=False) for m in METRICS})


@given(_WEIGHTS, st.floats(0, 50, allow_nan=False))
def test_score_linear_in_weights(weights, k):
    base = scan_workbook(FEATURES, weights).score
    scaled = scan_workbook(FEATURES, {m: k * w for m, w in weights.items()}).score
    assert scaled == pytest.approx(k * base, rel=1e-9, abs=1e-6)


@given(_WEIGHTS, _WEIGHTS)
def test_score_additive_in_weights(w1, w2):
    total = scan_workbook(FEATURES, {m: w1[m] + w2[m] for m in METRICS}).score
    parts = scan_workbook(FEATURES, w1).score + scan_workbook(FEATURES, w2).score
    assert total == pytest.approx(parts, rel=1e-9, abs=1e-6)


# --------------------------------------------------------------------------
# Manifest

T0 = dt.datetime(2006, 2, 22, 9, 38)
T1 = dt.datetime(2006, 2, 26, 11, 39)


def test_manifest_append_only():
    first = ManifestEntry("C:\\MyFile.xls", T0, reason_of_change="Creation", purpose="Receipts")
    manifest = upsert_manifest([], first)
    assert len(manifest) == 1
    manifest = upsert_manifest(manifest, ManifestEntry("C:\\MyFile.xls", T1,
                                                       reason_of_change=ChangeReason.MODIFICATION))
    assert [e.reason_of_change for e in manifest] == [ChangeReason.CREATION, ChangeReason.MODIFICATION]
    assert manifest[1].purpose == "Receipts"


def test_manifest_same_key_refreshes():
    first = ManifestEntry("C:\\MyFile.xls", T0, size=10, security="secret")
    manifest = upsert_manifest([first], ManifestEntry("C:\\MyFile.xls", T0, size=20))
    assert len(manifest) == 1
    assert manifest[0].size == 20 and manifest[0].security is Security.SECRET


def test_manifest_rejects_unknown_enum():
    with pytest.raises(InvalidEnumValue):
        ManifestEntry("C:\\MyFile.xls", T0, security="TopSecret")


def test_manifest_file_roundtrip(tmp_path):
    store = ManifestFile(tmp_path / "m.jsonl")
    store.upsert(ManifestEntry("a.xlsx", T0, attribute=FileAttribute.ARCHIVE))
    store.upsert(ManifestEntry("a.xlsx", T1))
    store.upsert(ManifestEntry("a.xlsx", T1, access="Restricted"))
    lines = (tmp_path / "m.jsonl").read_text().splitlines()
    assert len(lines) == 3
    entries = store.read()
    assert [e.timestamp for e in entries] == [T0, T1]
    assert entries[1].access.value == "Restricted"
    (tmp_path / "m.jsonl").write_text('{"bogus": 1}\n')
    with pytest.raises(ConfigError):
        store.read()


_PATHS = st.sampled_from(["a.xlsx", "b.xlsx"])
_STAMPS = st.sampled_from([T0, T1, T1 + dt.timedelta(days=1)])


@given(st.lists(st.tuples(_PATHS, _STAMPS), max_size=10))
def test_manifest_keys_unique_and_retained(items):
    manifest = []
    for path, stamp in items:
        manifest = upsert_manifest(manifest, ManifestEntry(path, stamp))
    keys = [e.key for e in manifest]
    assert len(keys) == len(set(keys))
    assert set(keys) == {(p, s.isoformat()) for p, s in items}
