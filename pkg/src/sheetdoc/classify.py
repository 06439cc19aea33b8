"""Cell typing, precedent graph and documentation coverage."""

from __future__ import annotations

import enum
from collections import defaultdict, deque
from dataclasses import dataclass, field
from typing import TYPE_CHECKING, Iterable, Iterator

from .errors import FormulaSyntaxError, OutOfBoundsReference
from .formula import (
    FormulaAst, NameRef, RangeRef, extract_references,
    has_external_reference, parse_formula,
)
from .model import Cell, CellAddress, CellRange, ContentKind, Workbook

if TYPE_CHECKING:
    from .docschema import DocRecord


class CellType(enum.Enum):
    TITLE = "Title"
    DATA = "Data"
    FORMULA = "Formula"
    LINK = "Link"

    @property
    def code(self) -> str:
        return self.value[0]


def try_parse(cell: Cell) -> FormulaAst | None:
    if cell.formula_text is None:
        return None
    try:
        return parse_formula(cell.formula_text)
    except FormulaSyntaxError:
        return None


def classify_cell(cell: Cell) -> CellType:
    if cell.kind is ContentKind.FORMULA:
        ast = try_parse(cell)
        if ast is not None and has_external_reference(ast):
            return CellType.LINK
        return CellType.FORMULA
    if cell.kind is ContentKind.TEXT:
        return CellType.TITLE
    if cell.kind in (ContentKind.NUMBER, ContentKind.DATE):
        return CellType.DATA
    raise ValueError(f"{cell.address.a1} is empty and has no type")


# --------------------------------------------------------------------------
# Precedents

SheetCell = tuple[str, CellAddress]


@dataclass(frozen=True)
class Edge:
    sheet: str
    cell: CellAddress
    target_sheet: str
    target: CellRange


@dataclass(frozen=True)
class ExternalEdge:
    sheet: str
    cell: CellAddress
    book: str
    target_sheet: str
    target: str


@dataclass(frozen=True)
class PrecedentGraph:
    edges: frozenset[Edge] = frozenset()
    external_edges: frozenset[ExternalEdge] = frozenset()
    observations: tuple[str, ...] = ()

    def precedents(self, sheet: str, cell: CellAddress) -> set[tuple[str, CellRange]]:
        return {(e.target_sheet, e.target) for e in self.edges
                if e.sheet == sheet and e.cell == cell}

    def edges_by_cell(self) -> dict[SheetCell, list[Edge]]:
        index: dict[SheetCell, list[Edge]] = defaultdict(list)
        for e in self.edges:
            index[(e.sheet, e.cell)].append(e)
        return index

    def transitive_precedents(self, wb: Workbook, sheet: str, cell: CellAddress) -> set[SheetCell]:
        """Non-empty cells that ``cell`` reads, directly or through other formulas."""
        index = self.edges_by_cell()
        seen: set[SheetCell] = set()
        queue = deque([(sheet, cell)])
        while queue:
            key = queue.popleft()
            for edge in index.get(key, ()):
                for hit in _cells_in(wb, edge.target_sheet, edge.target):
                    if hit not in seen:
                        seen.add(hit)
                        queue.append(hit)
        seen.discard((sheet, cell))
        return seen

    def cycles(self, wb: Workbook) -> list[list[SheetCell]]:
        """Strongly connected groups of formula cells that depend on themselves."""
        index = self.edges_by_cell()
        graph = {node: sorted({hit for e in edges for hit in _cells_in(wb, e.target_sheet, e.target)},
                              key=_order)
                 for node, edges in index.items()}
        return [c for c in _strongly_connected(graph)
                if len(c) > 1 or c[0] in graph.get(c[0], ())]


def _order(key: SheetCell):
    return key[0], key[1].row, key[1].col


def _cells_in(wb: Workbook, sheet_name: str, rng: CellRange) -> Iterator[SheetCell]:
    sheet = wb.sheet(sheet_name)
    if sheet is None:
        return
    if rng.size <= len(sheet.cells):
        for addr in rng.addresses():
            cell = sheet.cells.get(addr)
            if cell is not None and not cell.is_empty:
                yield sheet.name, addr
    else:
        for cell in sheet.non_empty():
            if rng.contains(cell.address):
                yield sheet.name, cell.address


def _strongly_connected(graph: dict[SheetCell, list[SheetCell]]) -> list[list[SheetCell]]:
    # iterative Tarjan
    index: dict[SheetCell, int] = {}
    low: dict[SheetCell, int] = {}
    on_stack: set[SheetCell] = set()
    stack: list[SheetCell] = []
    result: list[list[SheetCell]] = []
    counter = 0
    for root in sorted(graph, key=_order):
        if root in index:
            continue
        work = [(root, iter(graph.get(root, ())))]
        index[root] = low[root] = counter
        counter += 1
        stack.append(root)
        on_stack.add(root)
        while work:
            node, children = work[-1]
            advanced = False
            for child in children:
                if child not in index:
                    index[child] = low[child] = counter
                    counter += 1
                    stack.append(child)
                    on_stack.add(child)
                    work.append((child, iter(graph.get(child, ()))))
                    advanced = True
                    break
                if child in on_stack:
                    low[node] = min(low[node], index[child])
            if advanced:
                continue
            work.pop()
            if work:
                parent = work[-1][0]
                low[parent] = min(low[parent], low[node])
            if low[node] == index[node]:
                group = []
                while True:
                    member = stack.pop()
                    on_stack.discard(member)
                    group.append(member)
                    if member == node:
                        break
                result.append(sorted(group, key=_order))
    return result


def _expand_name(wb: Workbook, ref: NameRef, observations: list[str]) -> list[tuple[str | None, CellRange]]:
    """One level of defined-name expansion to concrete ranges."""
    target = wb.defined_name(ref.name)
    if target is None:
        observations.append(f"undefined name {ref.name!r}")
        return []
    try:
        ast = parse_formula(target if target.startswith("=") else "=" + target)
    except FormulaSyntaxError as exc:
        observations.append(f"name {ref.name!r} has unreadable definition: {exc}")
        return []
    out = []
    for inner in ast.references():
        if isinstance(inner, NameRef):
            if inner.name.casefold() == ref.name.casefold():
                observations.append(f"name {ref.name!r} refers to itself")
            else:
                observations.append(
                    f"name {ref.name!r} refers to name {inner.name!r}; expanded one level only")
            continue
        if inner.book is not None:
            continue
        try:
            rng = inner.resolve(None) if isinstance(inner, RangeRef) else CellRange.single(inner.resolve(None))
        except OutOfBoundsReference:
            observations.append(f"name {ref.name!r} uses a relative R1C1 reference")
            continue
        out.append((inner.sheet, rng))
    return out


def formula_precedents(wb: Workbook, sheet: str, cell: Cell,
                       observations: list[str] | None = None):
    """(internal ranges, external refs) read by one formula cell, names expanded."""
    observations = [] if observations is None else observations
    ast = try_parse(cell)
    if ast is None:
        observations.append(f"{sheet}!{cell.address.a1}: cannot parse formula {cell.formula_text!r}")
        return set(), set()
    try:
        refs = extract_references(ast, cell.address, sheet)
    except OutOfBoundsReference as exc:
        observations.append(f"{sheet}!{cell.address.a1}: {exc}")
        return set(), set()
    internal = set(refs.internal_cells)
    for ref in ast.references():
        if isinstance(ref, NameRef) and ref.book is None:
            for target_sheet, rng in _expand_name(wb, ref, observations):
                internal.add((target_sheet or ref.sheet or sheet, rng))
    return internal, set(refs.external_refs)


def build_precedent_graph(wb: Workbook) -> PrecedentGraph:
    edges: set[Edge] = set()
    external: set[ExternalEdge] = set()
    observations: list[str] = []
    for sheet in wb.sheets:
        for cell in sheet:
            if not cell.is_formula:
                continue
            internal, ext = formula_precedents(wb, sheet.name, cell, observations)
            for target_sheet, rng in internal:
                edges.add(Edge(sheet.name, cell.address, target_sheet or sheet.name, rng))
            for book, target_sheet, text in ext:
                external.add(ExternalEdge(sheet.name, cell.address, book, target_sheet, text))
    return PrecedentGraph(frozenset(edges), frozenset(external),
                          tuple(dict.fromkeys(observations)))


# --------------------------------------------------------------------------
# Coverage


class Coverage(enum.Enum):
    DOCUMENTED = "documented"
    UNDOCUMENTED = "undocumented"
    NOT_APPLICABLE_EMPTY = "not-applicable-empty"


def covered_cells(record: DocRecord) -> list[tuple[str, CellRange]]:
    """Regions a cell record documents; empty for macro records.

    Every cell record covers its own cell. Title and data records also cover
    their declared Range; formula and link records use Range to name their
    inputs, so it is not counted as documented by them.
    """
    from .docschema import CellOrigin

    if not isinstance(record.origin, CellOrigin):
        return []
    out = [(record.origin.sheet, CellRange.single(record.origin.address))]
    if (isinstance(record.range, CellRange) and record.cell_type is not None
            and record.cell_type.covers_declared_range and record.range.size > 1):
        out.append((record.origin.sheet, record.range))
    return out


def _precedence(rng: CellRange, position: int, record: DocRecord):
    # smallest region first, then latest date, then latest record
    stamp = record.date.toordinal() if record.date is not None else 0
    return (rng.size, -stamp, -position)


def covering_records(wb: Workbook, records: Iterable[DocRecord]) -> dict[SheetCell, DocRecord]:
    """For every documented non-empty cell, the record that documents it.

    When several records cover a cell the one with the smallest region wins;
    ties go to the latest authoring date.
    """
    regions: dict[str, list[tuple[CellRange, int, DocRecord]]] = defaultdict(list)
    for position, rec in enumerate(records):
        for sheet, rng in covered_cells(rec):
            regions[sheet].append((rng, position, rec))
    out: dict[SheetCell, DocRecord] = {}
    for sheet in wb.sheets:
        candidates = regions.get(sheet.name)
        if not candidates:
            continue
        for cell in sheet.non_empty():
            hits = [c for c in candidates if c[0].contains(cell.address)]
            if hits:
                out[(sheet.name, cell.address)] = min(hits, key=lambda c: _precedence(*c))[2]
    return out


@dataclass(frozen=True)
class CoverageMap:
    status: dict[SheetCell, Coverage] = field(default_factory=dict)
    covering: dict[SheetCell, object] = field(default_factory=dict)

    def status_of(self, sheet: str, addr: CellAddress) -> Coverage:
        return self.status.get((sheet, addr), Coverage.NOT_APPLICABLE_EMPTY)

    def documented(self) -> list[SheetCell]:
        return [k for k, v in self.status.items() if v is Coverage.DOCUMENTED]

    def undocumented(self) -> list[SheetCell]:
        return [k for k, v in self.status.items() if v is Coverage.UNDOCUMENTED]


def compute_coverage(wb: Workbook, records: Iterable[DocRecord]) -> CoverageMap:
    covering = covering_records(wb, records)
    status = {
        (sheet.name, cell.address): (Coverage.DOCUMENTED if (sheet.name, cell.address) in covering
                                     else Coverage.UNDOCUMENTED)
        for sheet in wb.sheets for cell in sheet.non_empty()
    }
    return CoverageMap(status, {k: r.origin for k, r in covering.items()})


__all__ = [
    "CellType", "Coverage", "CoverageMap", "Edge", "ExternalEdge", "PrecedentGraph",
    "build_precedent_graph", "classify_cell", "compute_coverage", "covered_cells",
    "covering_records",
    "formula_precedents",
]
