"""In-memory workbook model and A1/R1C1 addressing.

The model is independent of how a workbook was read. Everything here is
immutable once constructed.
"""

from __future__ import annotations

import datetime as dt
import enum
import re
from dataclasses import dataclass, field
from types import MappingProxyType
from typing import TYPE_CHECKING, Iterator, Mapping, Union

from .errors import MalformedAddress, MalformedRange

if TYPE_CHECKING:
    from .macros import MacroModule

MAX_ROW = 1_048_576
MAX_COL = 16_384  # XFD

ERROR_CODES = frozenset(
    {"#DIV/0!", "#N/A", "#NAME?", "#NULL!", "#NUM!", "#REF!", "#VALUE!"}
)

_A1_RE = re.compile(r"^\$?([A-Za-z]{1,3})\$?([0-9]+)$")


def column_index(letters: str) -> int:
    """'A' -> 1, 'Z' -> 26, 'AA' -> 27."""
    n = 0
    for ch in letters.upper():
        if not "A" <= ch <= "Z":
            raise MalformedAddress(f"bad column letters {letters!r}")
        n = n * 26 + (ord(ch) - 64)
    return n


def column_letters(index: int) -> str:
    if index < 1:
        raise MalformedAddress(f"column index must be >= 1, got {index}")
    out = ""
    while index:
        index, rem = divmod(index - 1, 26)
        out = chr(65 + rem) + out
    return out


@dataclass(frozen=True, order=True)
class CellAddress:
    row: int
    col: int

    def __post_init__(self) -> None:
        if not (1 <= self.row <= MAX_ROW and 1 <= self.col <= MAX_COL):
            raise MalformedAddress(f"address out of bounds: row={self.row} col={self.col}")

    @property
    def a1(self) -> str:
        return f"{column_letters(self.col)}{self.row}"

    @property
    def r1c1(self) -> str:
        return f"R{self.row}C{self.col}"

    def offset(self, drow: int, dcol: int) -> CellAddress:
        return CellAddress(self.row + drow, self.col + dcol)

    def __str__(self) -> str:
        return self.a1


def parse_a1(text: str) -> CellAddress:
    """Parse an A1-style address; ``$`` markers are accepted and dropped."""
    m = _A1_RE.match(text.strip()) if text else None
    if not m:
        raise MalformedAddress(f"malformed address {text!r}")
    row = int(m.group(2))
    col = column_index(m.group(1))
    if row < 1 or row > MAX_ROW or col > MAX_COL:
        raise MalformedAddress(f"malformed address {text!r}")
    return CellAddress(row, col)


def render_a1(addr: CellAddress) -> str:
    return addr.a1


def render_r1c1(addr: CellAddress) -> str:
    return addr.r1c1


@dataclass(frozen=True, order=True)
class CellRange:
    top_left: CellAddress
    bottom_right: CellAddress

    def __post_init__(self) -> None:
        if (self.top_left.row > self.bottom_right.row
                or self.top_left.col > self.bottom_right.col):
            raise MalformedRange(f"range corners out of order: {self.top_left}:{self.bottom_right}")

    @classmethod
    def spanning(cls, a: CellAddress, b: CellAddress) -> CellRange:
        """The smallest range containing both corners, in any order."""
        return cls(
            CellAddress(min(a.row, b.row), min(a.col, b.col)),
            CellAddress(max(a.row, b.row), max(a.col, b.col)),
        )

    @classmethod
    def single(cls, addr: CellAddress) -> CellRange:
        return cls(addr, addr)

    @property
    def n_rows(self) -> int:
        return self.bottom_right.row - self.top_left.row + 1

    @property
    def n_cols(self) -> int:
        return self.bottom_right.col - self.top_left.col + 1

    @property
    def size(self) -> int:
        return self.n_rows * self.n_cols

    @property
    def is_single(self) -> bool:
        return self.top_left == self.bottom_right

    def contains(self, addr: CellAddress) -> bool:
        return (self.top_left.row <= addr.row <= self.bottom_right.row
                and self.top_left.col <= addr.col <= self.bottom_right.col)

    def corners(self) -> tuple[CellAddress, ...]:
        tl, br = self.top_left, self.bottom_right
        return tuple(dict.fromkeys([
            tl, CellAddress(tl.row, br.col), CellAddress(br.row, tl.col), br,
        ]))

    def addresses(self) -> Iterator[CellAddress]:
        for r in range(self.top_left.row, self.bottom_right.row + 1):
            for c in range(self.top_left.col, self.bottom_right.col + 1):
                yield CellAddress(r, c)

    @property
    def a1(self) -> str:
        if self.is_single:
            return self.top_left.a1
        return f"{self.top_left.a1}:{self.bottom_right.a1}"

    def __str__(self) -> str:
        return self.a1


def parse_range(text: str) -> CellRange:
    """Parse ``"A2:A10"`` or a single address; corners are normalized."""
    if not text or not text.strip():
        raise MalformedRange("empty range text")
    parts = text.strip().split(":")
    try:
        if len(parts) == 1:
            return CellRange.single(parse_a1(parts[0]))
        if len(parts) == 2:
            return CellRange.spanning(parse_a1(parts[0]), parse_a1(parts[1]))
    except MalformedAddress as exc:
        raise MalformedRange(f"malformed range {text!r}: {exc}") from exc
    raise MalformedRange(f"malformed range {text!r}")


class ContentKind(enum.Enum):
    EMPTY = "empty"
    TEXT = "text"
    NUMBER = "num"
    DATE = "date"
    FORMULA = "formula"


@dataclass(frozen=True)
class CellError:
    """An error value such as ``#DIV/0!`` stored in a cell."""

    code: str

    def __post_init__(self) -> None:
        if self.code not in ERROR_CODES:
            raise ValueError(f"unknown error code {self.code!r}")

    def __str__(self) -> str:
        return self.code


Scalar = Union[float, bool, str, dt.date, dt.datetime, CellError, None]


@dataclass(frozen=True)
class CommentText:
    body: str
    author_prefix: str | None = None

    @classmethod
    def from_body(cls, body: str) -> CommentText:
        """Build a comment, lifting an Excel-style ``"Name:"`` first line as the prefix."""
        first = body.split("\n", 1)[0].strip()
        prefix = None
        if first.endswith(":") and ":" not in first[:-1] and first[:-1].strip():
            prefix = first[:-1].strip()
        return cls(body=body, author_prefix=prefix)


@dataclass(frozen=True)
class Cell:
    address: CellAddress
    kind: ContentKind
    cached_value: Scalar = None
    formula_text: str | None = None
    number_format: str = "General"
    locked: bool = True
    has_validation: bool = False
    comment: CommentText | None = None

    def __post_init__(self) -> None:
        if (self.formula_text is not None) != (self.kind is ContentKind.FORMULA):
            raise ValueError(f"{self.address}: formula text present iff kind is formula")

    @property
    def is_empty(self) -> bool:
        return self.kind is ContentKind.EMPTY

    @property
    def is_formula(self) -> bool:
        return self.kind is ContentKind.FORMULA

    @property
    def is_constant(self) -> bool:
        return self.kind in (ContentKind.TEXT, ContentKind.NUMBER, ContentKind.DATE)

    @property
    def is_error(self) -> bool:
        return isinstance(self.cached_value, CellError)


class Visibility(enum.Enum):
    VISIBLE = "visible"
    HIDDEN = "hidden"
    VERY_HIDDEN = "very-hidden"


# Sheet-level settings detectable from file structure alone.
SHEET_FLAGS = frozenset({
    "consolidation-sources", "filtered-hidden-rows", "ole-objects",
    "pivot-tables", "query-tables", "scenarios",
})

WORKBOOK_FLAGS = frozenset({
    "backup", "custom-document-properties", "excel4-macro-sheets",
    "manual-calculation", "precision-as-displayed", "remove-personal-information",
})


@dataclass(frozen=True)
class Sheet:
    name: str
    cells: Mapping[CellAddress, Cell] = field(default_factory=dict)
    protected: bool = False
    hidden: Visibility = Visibility.VISIBLE
    flags: frozenset[str] = frozenset()

    def __post_init__(self) -> None:
        cells = dict(sorted(self.cells.items()))
        for addr, cell in cells.items():
            if cell.address != addr:
                raise ValueError(f"cell keyed at {addr} has address {cell.address}")
        object.__setattr__(self, "cells", MappingProxyType(cells))
        unknown = set(self.flags) - SHEET_FLAGS
        if unknown:
            raise ValueError(f"unknown sheet flags {sorted(unknown)}")

    def get(self, addr: CellAddress) -> Cell | None:
        return self.cells.get(addr)

    def is_blank(self, addr: CellAddress) -> bool:
        cell = self.cells.get(addr)
        return cell is None or cell.is_empty

    def __iter__(self) -> Iterator[Cell]:
        return iter(self.cells.values())

    def non_empty(self) -> Iterator[Cell]:
        return (c for c in self.cells.values() if not c.is_empty)

    def used_range(self) -> CellRange | None:
        addrs = [c.address for c in self.non_empty()]
        if not addrs:
            return None
        return CellRange(
            CellAddress(min(a.row for a in addrs), min(a.col for a in addrs)),
            CellAddress(max(a.row for a in addrs), max(a.col for a in addrs)),
        )


@dataclass(frozen=True)
class FileMeta:
    size_bytes: int = 0
    created: dt.datetime | None = None
    accessed: dt.datetime | None = None
    modified: dt.datetime | None = None
    attributes: frozenset[str] = frozenset()
    author_property: str | None = None
    manager_property: str | None = None
    file_format: str = ""

    def __post_init__(self) -> None:
        if self.size_bytes < 0:
            raise ValueError("size_bytes must be non-negative")
        bad = set(self.attributes) - {"archive", "hidden", "read-only", "system"}
        if bad:
            raise ValueError(f"unknown file attributes {sorted(bad)}")
        if self.created and self.modified and _naive(self.modified) < _naive(self.created):
            raise ValueError("modified precedes created")


def _naive(ts: dt.datetime) -> dt.datetime:
    if ts.tzinfo is not None:
        return ts.astimezone(dt.timezone.utc).replace(tzinfo=None)
    return ts


@dataclass(frozen=True)
class Workbook:
    source_path: str
    sheets: tuple[Sheet, ...] = ()
    defined_names: Mapping[str, str] = field(default_factory=dict)
    external_links: tuple[str, ...] = ()
    vba_modules: tuple[MacroModule, ...] = ()
    file_meta: FileMeta = field(default_factory=FileMeta)
    flags: frozenset[str] = frozenset()

    def __post_init__(self) -> None:
        object.__setattr__(self, "sheets", tuple(self.sheets))
        object.__setattr__(self, "external_links", tuple(self.external_links))
        object.__setattr__(self, "vba_modules", tuple(self.vba_modules))
        names = [s.name for s in self.sheets]
        if len(set(names)) != len(names):
            raise ValueError(f"duplicate sheet names in {names}")
        folded = [n.casefold() for n in self.defined_names]
        if len(set(folded)) != len(folded):
            raise ValueError("defined names must be unique case-insensitively")
        object.__setattr__(self, "defined_names", MappingProxyType(dict(self.defined_names)))
        unknown = set(self.flags) - WORKBOOK_FLAGS
        if unknown:
            raise ValueError(f"unknown workbook flags {sorted(unknown)}")

    def sheet(self, name: str) -> Sheet | None:
        for s in self.sheets:
            if s.name == name:
                return s
        # sheet names are case-insensitive in formulas
        for s in self.sheets:
            if s.name.casefold() == name.casefold():
                return s
        return None

    def defined_name(self, name: str) -> str | None:
        for key, target in self.defined_names.items():
            if key.casefold() == name.casefold():
                return target
        return None

    def cells(self) -> Iterator[tuple[Sheet, Cell]]:
        for sheet in self.sheets:
            for cell in sheet:
                yield sheet, cell

    def canonical(self) -> dict:
        """Content-only view used to compare workbooks read by different loaders.

        Excludes the source path and filesystem metadata, which necessarily
        differ between two files holding the same workbook.
        """
        return {
            "sheets": [
                {
                    "name": s.name,
                    "protected": s.protected,
                    "hidden": s.hidden.value,
                    "flags": sorted(s.flags),
                    "cells": [
                        (c.address.a1, c.kind.value, _canon_scalar(c.cached_value),
                         c.formula_text, c.number_format, c.locked, c.has_validation,
                         None if c.comment is None else (c.comment.body, c.comment.author_prefix))
                        for c in s
                    ],
                }
                for s in self.sheets
            ],
            "defined_names": dict(sorted(self.defined_names.items())),
            "external_links": list(self.external_links),
            "flags": sorted(self.flags),
            "author": self.file_meta.author_property,
            "manager": self.file_meta.manager_property,
            "vba": [(m.name, m.source) for m in self.vba_modules],
        }


def _canon_scalar(value: Scalar) -> tuple[str, str] | None:
    if value is None:
        return None
    if isinstance(value, bool):
        return ("bool", "TRUE" if value else "FALSE")
    if isinstance(value, float) or isinstance(value, int):
        return ("num", repr(float(value)))
    if isinstance(value, dt.datetime):
        return ("datetime", value.isoformat())
    if isinstance(value, dt.date):
        return ("date", value.isoformat())
    if isinstance(value, CellError):
        return ("error", value.code)
    return ("text", value)


def value_text(value: Scalar) -> str | None:
    """Canonical display text for a cached value; ``None`` for blank."""
    if value is None:
        return None
    if isinstance(value, bool):
        return "TRUE" if value else "FALSE"
    if isinstance(value, (int, float)):
        f = float(value)
        return str(int(f)) if f.is_integer() and abs(f) < 1e15 else repr(f)
    if isinstance(value, (dt.date, dt.datetime)):
        return value.isoformat()
    return str(value)
