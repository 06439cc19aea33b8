"""Formula lexing, parsing, reference extraction and relative normal form.

Both A1 (``$A$1``, ``Sheet1!A2:A10``) and R1C1 (``R[-10]C:R[-1]C``) reference
styles are accepted. External references look like ``[Book.xlsx]Sheet1!A1``
or ``'C:\\dir\\[Book.xlsx]My Sheet'!A1``.
"""

from __future__ import annotations

import functools
import re
from dataclasses import dataclass, replace
from typing import Iterator, Union

from .errors import FormulaSyntaxError, OutOfBoundsReference
from .model import (
    ERROR_CODES, MAX_COL, MAX_ROW, CellAddress, CellRange, column_index,
    column_letters,
)

# --------------------------------------------------------------------------
# AST


@dataclass(frozen=True)
class Number:
    text: str

    @property
    def value(self) -> float:
        return float(self.text)


@dataclass(frozen=True)
class Text:
    value: str


@dataclass(frozen=True)
class Bool:
    value: bool


@dataclass(frozen=True)
class ErrorLit:
    code: str


@dataclass(frozen=True)
class Missing:
    """An omitted function argument, as in ``IF(A1,,2)``."""


@dataclass(frozen=True)
class CellRef:
    """One cell reference.

    For A1 style ``row``/``col`` are the written coordinates and the ``*_abs``
    flags record ``$`` markers. For R1C1 style a relative axis stores the
    offset from the formula's own cell.
    """

    row: int
    col: int
    row_abs: bool = False
    col_abs: bool = False
    r1c1: bool = False
    sheet: str | None = None
    book: str | None = None

    def resolve(self, anchor: CellAddress | None) -> CellAddress:
        if not self.r1c1:
            return CellAddress(self.row, self.col)
        if anchor is None and not (self.row_abs and self.col_abs):
            raise OutOfBoundsReference("relative R1C1 reference needs an anchor cell")
        row = self.row if self.row_abs else anchor.row + self.row
        col = self.col if self.col_abs else anchor.col + self.col
        if not (1 <= row <= MAX_ROW and 1 <= col <= MAX_COL):
            raise OutOfBoundsReference(
                f"reference resolves outside the sheet (row={row}, col={col})")
        return CellAddress(row, col)


@dataclass(frozen=True)
class RangeRef:
    start: CellRef
    end: CellRef
    sheet: str | None = None
    book: str | None = None

    def resolve(self, anchor: CellAddress | None) -> CellRange:
        return CellRange.spanning(self.start.resolve(anchor), self.end.resolve(anchor))


@dataclass(frozen=True)
class NameRef:
    name: str
    sheet: str | None = None
    book: str | None = None


@dataclass(frozen=True)
class Call:
    name: str
    args: tuple[Node, ...] = ()


@dataclass(frozen=True)
class Unary:
    op: str
    operand: Node


@dataclass(frozen=True)
class Percent:
    operand: Node


@dataclass(frozen=True)
class Binary:
    op: str
    left: Node
    right: Node


@dataclass(frozen=True)
class Paren:
    expr: Node


Node = Union[Number, Text, Bool, ErrorLit, Missing, CellRef, RangeRef, NameRef,
             Call, Unary, Percent, Binary, Paren]
Reference = Union[CellRef, RangeRef, NameRef]


@dataclass(frozen=True)
class FormulaAst:
    root: Node

    def walk(self) -> Iterator[Node]:
        return walk(self.root)

    def references(self) -> Iterator[Reference]:
        for node in self.walk():
            if isinstance(node, (CellRef, RangeRef, NameRef)):
                yield node

    def render(self) -> str:
        return "=" + render(self.root)


def walk(node: Node) -> Iterator[Node]:
    yield node
    if isinstance(node, Call):
        for arg in node.args:
            yield from walk(arg)
    elif isinstance(node, (Unary, Percent)):
        yield from walk(node.operand)
    elif isinstance(node, Binary):
        yield from walk(node.left)
        yield from walk(node.right)
    elif isinstance(node, Paren):
        yield from walk(node.expr)


# --------------------------------------------------------------------------
# Lexer

_WS = re.compile(r"\s+")
_NUMBER = re.compile(r"(?:\d+(?:\.\d*)?|\.\d+)(?:[eE][+-]?\d+)?", re.ASCII)
_DIGITS = frozenset("0123456789")
_STRING = re.compile(r'"((?:[^"]|"")*)"')
_ERROR = re.compile(r"#(?:DIV/0!|N/A|NAME\?|NULL!|NUM!|REF!|VALUE!)", re.IGNORECASE)
_QUOTED_PREFIX = re.compile(r"'((?:[^']|'')+)'!")
_BOOK_PREFIX = re.compile(r"\[([^\]]+)\]([A-Za-z0-9_.]*)!")
_SHEET_PREFIX = re.compile(r"([A-Za-z_\\][A-Za-z0-9_.]*)!")
_R1C1 = re.compile(r"[Rr](\[-?\d+\]|\d+)?[Cc](\[-?\d+\]|\d+)?(?![A-Za-z0-9_.(\[!])", re.ASCII)
_A1 = re.compile(r"(\$?)([A-Za-z]{1,3})(\$?)(\d+)(?![A-Za-z0-9_.(!])", re.ASCII)
_IDENT = re.compile(r"[A-Za-z_\\][A-Za-z0-9_.?\\]*")
_OPS = ("<>", "<=", ">=", "+", "-", "*", "/", "^", "&", "=", "<", ">")


@dataclass(frozen=True)
class _Tok:
    kind: str  # num str bool err ref name func op lparen rparen comma colon percent eof
    value: object
    pos: int


def _split_book(text: str) -> tuple[str | None, str]:
    """``'C:\\d\\[B.xlsx]S'`` contents -> (``C:\\d\\B.xlsx``, ``S``)."""
    m = re.match(r"^(.*)\[([^\]]+)\](.*)$", text)
    if not m:
        return None, text
    return m.group(1) + m.group(2), m.group(3)


def _lex(text: str) -> list[_Tok]:
    toks: list[_Tok] = []
    i, n = 0, len(text)
    while i < n:
        m = _WS.match(text, i)
        if m:
            i = m.end()
            continue
        ch = text[i]
        if ch == '"':
            m = _STRING.match(text, i)
            if not m:
                raise FormulaSyntaxError("unterminated string", i)
            toks.append(_Tok("str", m.group(1).replace('""', '"'), i))
            i = m.end()
            continue
        if ch == "#":
            m = _ERROR.match(text, i)
            if not m:
                raise FormulaSyntaxError("unknown error literal", i)
            toks.append(_Tok("err", m.group(0).upper(), i))
            i = m.end()
            continue
        if ch in _DIGITS or (ch == "." and i + 1 < n and text[i + 1] in _DIGITS):
            m = _NUMBER.match(text, i)
            toks.append(_Tok("num", m.group(0), i))
            i = m.end()
            continue
        if ch == "(":
            toks.append(_Tok("lparen", ch, i))
            i += 1
            continue
        if ch == ")":
            toks.append(_Tok("rparen", ch, i))
            i += 1
            continue
        if ch == ",":
            toks.append(_Tok("comma", ch, i))
            i += 1
            continue
        if ch == ":":
            toks.append(_Tok("colon", ch, i))
            i += 1
            continue
        if ch == "%":
            toks.append(_Tok("percent", ch, i))
            i += 1
            continue
        op = next((o for o in _OPS if text.startswith(o, i)), None)
        if op:
            toks.append(_Tok("op", op, i))
            i += len(op)
            continue
        start = i
        book = sheet = None
        m = _QUOTED_PREFIX.match(text, i)
        if m:
            book, sheet = _split_book(m.group(1).replace("''", "'"))
            i = m.end()
        else:
            m = _BOOK_PREFIX.match(text, i) or _SHEET_PREFIX.match(text, i)
            if m and m.re is _BOOK_PREFIX:
                book, sheet = m.group(1), m.group(2)
                i = m.end()
            elif m:
                sheet = m.group(1)
                i = m.end()
        tok = _lex_reference(text, i, start, book, sheet)
        if tok is None:
            raise FormulaSyntaxError(f"unexpected character {text[i:i + 1]!r}", i)
        toks.append(tok[0])
        i = tok[1]
    toks.append(_Tok("eof", None, n))
    return toks


def _lex_reference(text, i, start, book, sheet):
    prefixed = book is not None or sheet is not None
    m = _R1C1.match(text, i)
    if m:
        row_abs, row = _r1c1_axis(m.group(1))
        col_abs, col = _r1c1_axis(m.group(2))
        ref = CellRef(row, col, row_abs, col_abs, True, sheet or None, book)
        return _Tok("ref", ref, start), m.end()
    m = _A1.match(text, i)
    if m:
        col = column_index(m.group(2))
        row = int(m.group(4))
        if 1 <= row <= MAX_ROW and col <= MAX_COL:
            ref = CellRef(row, col, bool(m.group(3)), bool(m.group(1)), False,
                          sheet or None, book)
            return _Tok("ref", ref, start), m.end()
    m = _IDENT.match(text, i)
    if m:
        word = m.group(0)
        end = m.end()
        if not prefixed and end < len(text) and text[end] == "(":
            return _Tok("func", word, start), end
        if not prefixed and word.upper() in ("TRUE", "FALSE"):
            return _Tok("bool", word.upper() == "TRUE", start), end
        return _Tok("name", NameRef(word, sheet or None, book), start), end
    return None


def _r1c1_axis(part: str | None) -> tuple[bool, int]:
    if not part:
        return False, 0
    if part.startswith("["):
        return False, int(part[1:-1])
    return True, int(part)


# --------------------------------------------------------------------------
# Parser

_LEVELS = (
    frozenset({"=", "<>", "<", ">", "<=", ">="}),
    frozenset({"&"}),
    frozenset({"+", "-"}),
    frozenset({"*", "/"}),
    frozenset({"^"}),
)


class _Parser:
    def __init__(self, text: str, offset: int) -> None:
        try:
            self.toks = _lex(text)
        except FormulaSyntaxError as exc:
            raise FormulaSyntaxError(exc.message, exc.offset + offset) from None
        self.offset = offset
        self.i = 0

    @property
    def tok(self) -> _Tok:
        return self.toks[self.i]

    def fail(self, message: str, tok: _Tok | None = None):
        tok = tok or self.tok
        raise FormulaSyntaxError(message, tok.pos + self.offset)

    def take(self, kind: str) -> _Tok:
        tok = self.tok
        if tok.kind != kind:
            self.fail(f"expected {kind}, found {tok.kind}")
        self.i += 1
        return tok

    def parse(self) -> Node:
        if self.tok.kind == "eof":
            self.fail("empty formula")
        node = self.expression()
        if self.tok.kind != "eof":
            self.fail(f"unexpected {self.tok.kind}")
        return node

    def expression(self, level: int = 0) -> Node:
        if level == len(_LEVELS):
            return self.unary()
        left = self.expression(level + 1)
        while self.tok.kind == "op" and self.tok.value in _LEVELS[level]:
            op = self.take("op").value
            right = self.expression(level + 1)
            left = Binary(op, left, right)
        return left

    def unary(self) -> Node:
        if self.tok.kind == "op" and self.tok.value in ("+", "-"):
            op = self.take("op").value
            return Unary(op, self.unary())
        node = self.primary()
        while self.tok.kind == "percent":
            self.i += 1
            node = Percent(node)
        return node

    def primary(self) -> Node:
        tok = self.tok
        kind = tok.kind
        if kind == "num":
            self.i += 1
            return Number(tok.value)
        if kind == "str":
            self.i += 1
            return Text(tok.value)
        if kind == "bool":
            self.i += 1
            return Bool(tok.value)
        if kind == "err":
            self.i += 1
            return ErrorLit(tok.value)
        if kind == "lparen":
            self.i += 1
            expr = self.expression()
            if self.tok.kind == "comma":
                self.fail("union operator outside an argument list is not supported")
            self.take("rparen")
            return Paren(expr)
        if kind == "func":
            self.i += 1
            return self.call(tok.value)
        if kind == "name":
            self.i += 1
            return tok.value
        if kind == "ref":
            self.i += 1
            ref: CellRef = tok.value
            if self.tok.kind != "colon":
                return ref
            self.i += 1
            end_tok = self.take("ref")
            end: CellRef = end_tok.value
            if end.sheet is not None or end.book is not None:
                self.fail("3-D or qualified range end is not supported", end_tok)
            if end.r1c1 != ref.r1c1:
                self.fail("range mixes A1 and R1C1 styles", end_tok)
            return RangeRef(replace(ref, sheet=None, book=None), end, ref.sheet, ref.book)
        self.fail(f"unexpected {kind}")

    def call(self, name: str) -> Call:
        self.take("lparen")
        args: list[Node] = []
        if self.tok.kind == "rparen":
            self.i += 1
            return Call(name, ())
        while True:
            if self.tok.kind in ("comma", "rparen"):
                args.append(Missing())
            else:
                args.append(self.expression())
            if self.tok.kind == "comma":
                self.i += 1
                continue
            self.take("rparen")
            return Call(name, tuple(args))


@functools.lru_cache(maxsize=65536)
def parse_formula(text: str) -> FormulaAst:
    """Parse formula text, with or without the leading ``=``."""
    offset = 0
    body = text
    if body.startswith("="):
        body, offset = body[1:], 1
    return FormulaAst(_Parser(body, offset).parse())


# --------------------------------------------------------------------------
# Rendering


def _needs_quotes(name: str) -> bool:
    return not re.fullmatch(r"[A-Za-z_][A-Za-z0-9_.]*", name) or bool(
        _A1.fullmatch(name) or _R1C1.fullmatch(name))


def _prefix(sheet: str | None, book: str | None) -> str:
    if sheet is None and book is None:
        return ""
    sheet = sheet or ""
    if book is None:
        return ("'" + sheet.replace("'", "''") + "'!") if _needs_quotes(sheet) else sheet + "!"
    cut = max(book.rfind("\\"), book.rfind("/")) + 1
    directory, name = book[:cut], book[cut:]
    inner = f"{directory}[{name}]{sheet}"
    quote = bool(directory) or not re.fullmatch(r"[A-Za-z0-9_.]+", name) or (
        bool(sheet) and _needs_quotes(sheet))
    if quote:
        return "'" + inner.replace("'", "''") + "'!"
    return inner + "!"


def _render_cell(ref: CellRef) -> str:
    if ref.r1c1:
        def axis(letter, absolute, value):
            if absolute:
                return f"{letter}{value}"
            return letter if value == 0 else f"{letter}[{value}]"
        return axis("R", ref.row_abs, ref.row) + axis("C", ref.col_abs, ref.col)
    return ("$" if ref.col_abs else "") + column_letters(ref.col) + (
        "$" if ref.row_abs else "") + str(ref.row)


def render(node: Node) -> str:
    if isinstance(node, Number):
        return node.text
    if isinstance(node, Text):
        return '"' + node.value.replace('"', '""') + '"'
    if isinstance(node, Bool):
        return "TRUE" if node.value else "FALSE"
    if isinstance(node, ErrorLit):
        return node.code
    if isinstance(node, Missing):
        return ""
    if isinstance(node, CellRef):
        return _prefix(node.sheet, node.book) + _render_cell(node)
    if isinstance(node, RangeRef):
        return (_prefix(node.sheet, node.book) + _render_cell(node.start) + ":"
                + _render_cell(node.end))
    if isinstance(node, NameRef):
        return _prefix(node.sheet, node.book) + node.name
    if isinstance(node, Call):
        return f"{node.name}(" + ",".join(render(a) for a in node.args) + ")"
    if isinstance(node, Unary):
        return node.op + render(node.operand)
    if isinstance(node, Percent):
        return render(node.operand) + "%"
    if isinstance(node, Binary):
        return render(node.left) + node.op + render(node.right)
    if isinstance(node, Paren):
        return "(" + render(node.expr) + ")"
    raise TypeError(f"not a formula node: {node!r}")


# --------------------------------------------------------------------------
# Transformations


def map_refs(node: Node, fn) -> Node:
    """Rebuild ``node`` with every CellRef/RangeRef/NameRef passed through ``fn``."""
    if isinstance(node, (CellRef, RangeRef, NameRef)):
        return fn(node)
    if isinstance(node, Call):
        return Call(node.name, tuple(map_refs(a, fn) for a in node.args))
    if isinstance(node, Unary):
        return Unary(node.op, map_refs(node.operand, fn))
    if isinstance(node, Percent):
        return Percent(map_refs(node.operand, fn))
    if isinstance(node, Binary):
        return Binary(node.op, map_refs(node.left, fn), map_refs(node.right, fn))
    if isinstance(node, Paren):
        return Paren(map_refs(node.expr, fn))
    return node


def _to_relative(ref: CellRef, anchor: CellAddress) -> CellRef:
    if ref.r1c1:
        return ref
    row = ref.row if ref.row_abs else ref.row - anchor.row
    col = ref.col if ref.col_abs else ref.col - anchor.col
    return CellRef(row, col, ref.row_abs, ref.col_abs, True, ref.sheet, ref.book)


def _normalize(node: Node) -> Node:
    if isinstance(node, Call):
        return Call(node.name.upper(), tuple(_normalize(a) for a in node.args))
    if isinstance(node, NameRef):
        return NameRef(node.name.upper(), node.sheet, node.book)
    if isinstance(node, Unary):
        return Unary(node.op, _normalize(node.operand))
    if isinstance(node, Percent):
        return Percent(_normalize(node.operand))
    if isinstance(node, Binary):
        return Binary(node.op, _normalize(node.left), _normalize(node.right))
    if isinstance(node, Paren):
        return Paren(_normalize(node.expr))
    return node


def relative_normal_form(ast: FormulaAst, anchor: CellAddress) -> str:
    """R1C1 rendering with relative references as offsets from ``anchor``.

    Two formulas that are copies of each other (filled down or across) give
    the same text. Function and defined names are upper-cased; names stay
    symbolic.
    """
    def rel(ref):
        if isinstance(ref, CellRef):
            return _to_relative(ref, anchor)
        if isinstance(ref, RangeRef):
            return RangeRef(_to_relative(ref.start, anchor), _to_relative(ref.end, anchor),
                            ref.sheet, ref.book)
        return ref

    return "=" + render(_normalize(map_refs(ast.root, rel)))


def translate(ast: FormulaAst, drow: int, dcol: int) -> FormulaAst:
    """Shift relative A1 references as if the formula were copied by (drow, dcol)."""
    def move(ref: CellRef) -> CellRef:
        if ref.r1c1:
            return ref
        row = ref.row if ref.row_abs else ref.row + drow
        col = ref.col if ref.col_abs else ref.col + dcol
        if not (1 <= row <= MAX_ROW and 1 <= col <= MAX_COL):
            raise OutOfBoundsReference(f"copied reference leaves the sheet (row={row}, col={col})")
        return replace(ref, row=row, col=col)

    def shift(ref):
        if isinstance(ref, CellRef):
            return move(ref)
        if isinstance(ref, RangeRef):
            return RangeRef(move(ref.start), move(ref.end), ref.sheet, ref.book)
        return ref

    return FormulaAst(map_refs(ast.root, shift))


# --------------------------------------------------------------------------
# Reference extraction


@dataclass(frozen=True)
class ReferenceSet:
    internal_cells: frozenset[tuple[str | None, CellRange]] = frozenset()
    external_refs: frozenset[tuple[str, str, str]] = frozenset()
    defined_names: frozenset[str] = frozenset()

    def __bool__(self) -> bool:
        return bool(self.internal_cells or self.external_refs or self.defined_names)


def extract_references(ast: FormulaAst, anchor: CellAddress | None,
                       sheet: str | None = None) -> ReferenceSet:
    """Resolve every reference in ``ast`` relative to ``anchor``.

    Unqualified references are attributed to ``sheet``. Raises
    OutOfBoundsReference when a relative R1C1 offset leaves the sheet.
    """
    internal: set[tuple[str | None, CellRange]] = set()
    external: set[tuple[str, str, str]] = set()
    names: set[str] = set()
    for ref in ast.references():
        if isinstance(ref, NameRef):
            if ref.book is not None:
                external.add((ref.book, ref.sheet or "", ref.name))
            else:
                names.add(ref.name)
            continue
        if isinstance(ref, CellRef):
            rng = CellRange.single(ref.resolve(anchor))
        else:
            rng = ref.resolve(anchor)
        if ref.book is not None:
            external.add((ref.book, ref.sheet or "", rng.a1))
        else:
            internal.add((ref.sheet if ref.sheet is not None else sheet, rng))
    return ReferenceSet(frozenset(internal), frozenset(external), frozenset(names))


def has_external_reference(ast: FormulaAst) -> bool:
    return any(ref.book is not None for ref in ast.references())


def translate_text(text: str, origin: CellAddress, target: CellAddress) -> str:
    """Formula text as it would read after copying from ``origin`` to ``target``."""
    ast = parse_formula(text)
    return translate(ast, target.row - origin.row, target.col - origin.col).render()


__all__ = [
    "Binary", "Bool", "Call", "CellRef", "ErrorLit", "FormulaAst", "Missing",
    "NameRef", "Number", "Paren", "Percent", "RangeRef", "ReferenceSet", "Text",
    "Unary", "extract_references", "has_external_reference", "parse_formula",
    "relative_normal_form", "render", "translate", "translate_text", "walk",
    "ERROR_CODES",
]
