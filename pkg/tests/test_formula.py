from __future__ import annotations

import pytest
from hypothesis import given, settings, strategies as st

from sheetdoc.errors import FormulaSyntaxError, OutOfBoundsReference
from sheetdoc.formula import (
    Binary, Call, CellRef, Number, RangeRef, Text,
    extract_references, has_external_reference, parse_formula, relative_normal_form,
    translate, translate_text,
)
from sheetdoc.model import CellAddress, CellRange, parse_range


def test_sum_range_ast():
    ast = parse_formula("=SUM(A2:A10)")
    assert isinstance(ast.root, Call) and ast.root.name == "SUM"
    (arg,) = ast.root.args
    assert isinstance(arg, RangeRef)
    assert arg.resolve(None) == parse_range("A2:A10")


def test_precedence():
    root = parse_formula("=1+2*3^2").root
    assert isinstance(root, Binary) and root.op == "+"
    assert isinstance(root.right, Binary) and root.right.op == "*"
    assert isinstance(root.right.right, Binary) and root.right.right.op == "^"


def test_r1c1_relative_range_resolves_at_anchor():
    refs = extract_references(parse_formula("=SUM(R[-10]C:R[-1]C)"), CellAddress(12, 3), "Sheet1")
    assert refs.internal_cells == {("Sheet1", parse_range("C2:C11"))}


def test_relative_r1c1_needs_anchor():
    with pytest.raises(OutOfBoundsReference):
        extract_references(parse_formula("=R[-1]C"), None)
    with pytest.raises(OutOfBoundsReference):
        extract_references(parse_formula("=R[-5]C"), CellAddress(2, 1))


@pytest.mark.parametrize("text,offset", [
    ("=SUM(A1:", 8), ("=1+", 3), ("=SUM(A1", 7), ("=\"abc", 1), ("=1 2", 3),
])
def test_syntax_error_offsets(text, offset):
    with pytest.raises(FormulaSyntaxError) as info:
        parse_formula(text)
    assert info.value.offset == offset


def test_references_kinds():
    ast = parse_formula("='Other Sheet'!B2+[Book2.xlsx]Sheet1!$A$1+Total+C3")
    refs = extract_references(ast, CellAddress(1, 1), "Main")
    assert ("Other Sheet", CellRange.single(CellAddress(2, 2))) in refs.internal_cells
    assert ("Main", CellRange.single(CellAddress(3, 3))) in refs.internal_cells
    assert refs.external_refs == {("Book2.xlsx", "Sheet1", "A1")}
    assert refs.defined_names == {"Total"}
    assert has_external_reference(ast)
    assert not has_external_reference(parse_formula("=A1"))


@pytest.mark.parametrize("text", [
    "=SUM(A2:A10)", "=IF(A1>0,\"yes\",\"no\")", "=-A1%", "=$A$1*B$2+$C3",
    "='My Sheet'!A1&\"x\"", "=IF(A1,,2)", "=#DIV/0!", "=TRUE", "=SUM(R[-10]C:R[-1]C)",
    "=(1+2)*3", "=A1:B2", "=[Book2.xlsx]Sheet1!A1", "=1E+3", "=\"say \"\"hi\"\"\"",
])
def test_render_is_fixpoint(text):
    once = parse_formula(text).render()
    assert parse_formula(once).render() == once
    assert parse_formula(once) == parse_formula(text)


def test_normal_form_ignores_position():
    a = relative_normal_form(parse_formula("=B1*2"), CellAddress(1, 3))
    b = relative_normal_form(parse_formula("=B2*2"), CellAddress(2, 3))
    c = relative_normal_form(parse_formula("=B1*2"), CellAddress(2, 3))
    assert a == b != c


def test_normal_form_keeps_absolute_parts():
    a = relative_normal_form(parse_formula("=$A$1+B1"), CellAddress(1, 3))
    b = relative_normal_form(parse_formula("=$A$1+B5"), CellAddress(5, 3))
    assert a == b
    assert "R1C1" in a


def test_translate_shifts_relative_only():
    assert translate_text("=SUM(A1:A4)+$B$1+C$1", CellAddress(6, 1), CellAddress(7, 2)) \
        == "=SUM(B2:B5)+$B$1+D$1"


# --------------------------------------------------------------------------
# Properties

_ROWS = st.integers(6, 40)
_COLS = st.integers(6, 20)


@st.composite
def cell_refs(draw):
    return CellRef(draw(_ROWS), draw(_COLS), draw(st.booleans()), draw(st.booleans()))


@st.composite
def formulas(draw, depth=3):
    if depth == 0 or draw(st.booleans()):
        choice = draw(st.integers(0, 3))
        if choice == 0:
            return Number(str(draw(st.integers(0, 999))))
        if choice == 1:
            return Text(draw(st.text(alphabet="abc xyz", max_size=5)))
        if choice == 2:
            return draw(cell_refs())
        start, end = draw(cell_refs()), draw(cell_refs())
        return RangeRef(start, end)
    if draw(st.booleans()):
        op = draw(st.sampled_from(["+", "-", "*", "/", "&", "="]))
        return Binary(op, draw(formulas(depth - 1)), draw(formulas(depth - 1)))
    name = draw(st.sampled_from(["SUM", "MAX", "IF", "AVERAGE"]))
    args = tuple(draw(st.lists(formulas(depth - 1), min_size=1, max_size=3)))
    return Call(name, args)


@settings(max_examples=500, deadline=None)
@given(formulas(), st.integers(-5, 5), st.integers(-5, 5))
def test_normal_form_translation_invariance(root, drow, dcol):
    from sheetdoc.formula import FormulaAst, render

    ast = parse_formula("=" + render(root))
    anchor = CellAddress(50, 30)
    moved = translate(ast, drow, dcol)
    assert relative_normal_form(ast, anchor) == \
        relative_normal_form(moved, anchor.offset(drow, dcol))
    assert isinstance(moved, FormulaAst)


@settings(max_examples=300, deadline=None)
@given(formulas())
def test_parse_render_fixpoint_generated(root):
    from sheetdoc.formula import render

    text = "=" + render(root)
    ast = parse_formula(text)
    assert ast.render() == parse_formula(ast.render()).render()


@given(st.text(max_size=30))
def test_parser_never_crashes_unexpectedly(text):
    try:
        parse_formula("=" + text)
    except FormulaSyntaxError as exc:
        assert 0 <= exc.offset <= len(text) + 1
