from __future__ import annotations

from hypothesis import given, strategies as st

from conftest import macros_for
from sheetdoc.docschema import NA, DocRecord, MacroOrigin, Unstructured
from sheetdoc.macros import (
    LintRule, MacroModule, ProcKind, find_procedures, header_lines, lint_module,
    parse_macro_headers,
)

MANUAL, SAVE_AS = macros_for("amounts_stale.fixture")
(FEATURES_MODULE,) = macros_for("features.fixture")


def _rules(module):
    return {f.rule.value for f in lint_module(module)}


def test_manual_calculation_listing():
    assert _rules(MANUAL) == {"manual-calculation", "undocumented-procedure"}


def test_save_as_listing():
    assert _rules(SAVE_AS) == {"hardcoded-save-path"}
    ((name, rec),) = parse_macro_headers(SAVE_AS)
    assert name == "Worksheet_Activate"
    assert isinstance(rec, DocRecord)
    assert rec.author == "Ken Jones"
    assert rec.origin == MacroOrigin("Sheet2", "Worksheet_Activate")
    assert rec.range is NA and rec.range_text == "Entire Workbook"
    assert rec.checked_by == "Raymond Payette"


def test_procedures_found():
    procs = FEATURES_MODULE.procedures
    assert [(p.name, p.kind) for p in procs] == [("Doubled", ProcKind.FUNCTION),
                                                 ("SaveCopy", ProcKind.SUB)]
    assert MANUAL.procedures[0].kind is ProcKind.EVENT


def test_features_module_findings():
    findings = lint_module(FEATURES_MODULE)
    assert {(f.rule, f.procedure) for f in findings} == {
        (LintRule.UNDOCUMENTED_PROCEDURE, "SaveCopy"),
        (LintRule.HARDCODED_SAVE_PATH, "SaveCopy"),
        (LintRule.PRECISION_AS_DISPLAYED, "SaveCopy"),
    }
    lines = FEATURES_MODULE.lines
    for f in findings:
        assert FEATURES_MODULE.procedures[1].contains(f.line)
        assert lines[f.line - 1]


def test_commented_code_is_ignored():
    module = MacroModule.from_source("M", "Sub X()\n    ' Application.Calculation = xlManual\n"
                                          "    Rem .Calculation = xlManual\nEnd Sub\n")
    assert LintRule.MANUAL_CALCULATION not in {f.rule for f in lint_module(module)}


def test_precision_false_is_harmless():
    module = MacroModule.from_source("M", "Sub X()\n  ActiveWorkbook.PrecisionAsDisplayed = False\nEnd Sub")
    assert {f.rule for f in lint_module(module)} == {LintRule.UNDOCUMENTED_PROCEDURE}


def test_header_stops_at_first_statement():
    module = MacroModule.from_source("M", "Sub X()\n  'Author: a\n  x = 1\n  'Purpose: late\nEnd Sub")
    assert header_lines(module, module.procedures[0]) == ["Author: a"]
    ((_, parsed),) = parse_macro_headers(module)
    assert isinstance(parsed, DocRecord) and parsed.purpose == ""


def test_unstructured_header():
    module = MacroModule.from_source("M", "Sub X()\n  ' saves stuff\nEnd Sub")
    ((_, parsed),) = parse_macro_headers(module)
    assert isinstance(parsed, Unstructured)


def test_unterminated_procedure_runs_to_end():
    (proc,) = find_procedures("Sub X()\n  y = 1\n")
    assert (proc.start_line, proc.end_line) == (1, 2)


_IDENT = st.from_regex(r"[A-Za-z][A-Za-z0-9]{0,6}", fullmatch=True)


@given(st.lists(st.tuples(_IDENT, st.integers(0, 4)), max_size=6))
def test_procedures_partition_lines(specs):
    lines = ["Option Explicit"]
    for name, n_body in specs:
        lines.append(f"Sub P{name}()")
        lines.extend(f"    v = {i}" for i in range(n_body))
        lines.append("End Sub")
    procs = find_procedures("\n".join(lines))
    assert len(procs) == len(specs)
    for a, b in zip(procs, procs[1:]):
        assert a.end_line < b.start_line
    assert sum(p.n_lines for p in procs) == len(lines) - 1
