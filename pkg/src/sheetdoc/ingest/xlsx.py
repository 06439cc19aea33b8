"""Office Open XML (.xlsx) reader for the subset the auditor needs.

Reads sheets, cell values and formulas (resolving shared strings and shared
formulas), comments, defined names, external link targets, data validation,
protection, and the document properties used for file metadata. Problems with
optional parts are reported as observations rather than raised.
"""

from __future__ import annotations

import datetime as dt
import posixpath
import re
import zipfile
from dataclasses import dataclass, field
from pathlib import Path
from xml.etree import ElementTree as ET

from ..errors import FormulaSyntaxError, IngestError, MalformedAddress, MalformedRange, OutOfBoundsReference
from ..formula import translate_text
from ..model import (
    ERROR_CODES, Cell, CellAddress, CellError, CommentText, ContentKind, FileMeta,
    Sheet, Visibility, Workbook, parse_a1, parse_range,
)
from .common import IngestReport, file_meta_from_stat, load_sidecar_modules

MAIN = "http://schemas.openxmlformats.org/spreadsheetml/2006/main"
REL = "http://schemas.openxmlformats.org/officeDocument/2006/relationships"
PKG_REL = "http://schemas.openxmlformats.org/package/2006/relationships"
CORE = "http://schemas.openxmlformats.org/package/2006/metadata/core-properties"
APP = "http://schemas.openxmlformats.org/officeDocument/2006/extended-properties"
DC = "http://purl.org/dc/elements/1.1/"
DCTERMS = "http://purl.org/dc/terms/"


def _q(tag: str, ns: str = MAIN) -> str:
    return f"{{{ns}}}{tag}"


# Built-in number formats (ECMA-376 part 1, 18.8.30) that the file does not spell out.
BUILTIN_FORMATS = {
    0: "General", 1: "0", 2: "0.00", 3: "#,##0", 4: "#,##0.00",
    9: "0%", 10: "0.00%", 11: "0.00E+00", 12: "# ?/?", 13: "# ??/??",
    14: "m/d/yyyy", 15: "d-mmm-yy", 16: "d-mmm", 17: "mmm-yy", 18: "h:mm AM/PM",
    19: "h:mm:ss AM/PM", 20: "h:mm", 21: "h:mm:ss", 22: "m/d/yyyy h:mm",
    37: "#,##0 ;(#,##0)", 38: "#,##0 ;[Red](#,##0)", 39: "#,##0.00;(#,##0.00)",
    40: "#,##0.00;[Red](#,##0.00)", 45: "mm:ss", 46: "[h]:mm:ss", 47: "mmss.0",
    48: "##0.0E+0", 49: "@",
}
DATE_FORMAT_IDS = frozenset({14, 15, 16, 17, 22})


def is_date_format(code: str, fmt_id: int | None = None) -> bool:
    """True when a number format displays a calendar date."""
    if fmt_id in DATE_FORMAT_IDS:
        return True
    if fmt_id in BUILTIN_FORMATS and fmt_id not in DATE_FORMAT_IDS:
        return False
    section = code.split(";")[0]
    section = re.sub(r'"[^"]*"|\\.|\[[^\]]*\]|_.|\*.', "", section)
    letters = set(re.sub(r"AM/PM|A/P", "", section, flags=re.IGNORECASE).lower()) & set(
        "abcdefghijklmnopqrstuvwxyz")
    if not letters or not letters <= set("ymdhse"):
        return False
    return bool(letters & set("yd")) or "m" in letters and not letters & set("hs")


def serial_to_datetime(serial: float, date1904: bool = False) -> dt.date | dt.datetime:
    if date1904:
        base = dt.datetime(1904, 1, 1)
    elif serial < 60:
        # serials before the fictitious 1900-02-29 are offset by one day
        base = dt.datetime(1899, 12, 31)
    else:
        base = dt.datetime(1899, 12, 30)
    stamp = base + dt.timedelta(seconds=round(serial * 86400))
    if stamp.time() == dt.time(0):
        return stamp.date()
    return stamp


@dataclass
class _Package:
    zf: zipfile.ZipFile
    observations: list[str] = field(default_factory=list)

    def has(self, name: str) -> bool:
        return name in self.zf.NameToInfo

    def xml(self, name: str, *, required: bool = False) -> ET.Element | None:
        if not self.has(name):
            if required:
                raise IngestError("missing-workbook-part", f"part {name} is missing")
            return None
        try:
            return ET.fromstring(self.zf.read(name))
        except ET.ParseError as exc:
            if required:
                raise IngestError("missing-workbook-part", f"part {name} is not well-formed XML: {exc}")
            self.observations.append(f"part {name} is not well-formed XML ({exc}); skipped")
            return None

    def rels(self, part: str) -> dict[str, tuple[str, str, str]]:
        """Relationship id -> (type suffix, resolved target, target mode)."""
        directory, base = posixpath.split(part)
        rel_part = posixpath.join(directory, "_rels", base + ".rels")
        root = self.xml(rel_part)
        out = {}
        if root is None:
            return out
        for rel in root.iter(_q("Relationship", PKG_REL)):
            target = rel.get("Target", "")
            mode = rel.get("TargetMode", "Internal")
            if mode != "External":
                if target.startswith("/"):
                    target = target[1:]
                else:
                    target = posixpath.normpath(posixpath.join(directory, target))
            out[rel.get("Id")] = (rel.get("Type", "").rsplit("/", 1)[-1], target, mode)
        return out


def _text_of(element: ET.Element) -> str:
    """Concatenated text runs of a string item, skipping phonetic runs."""
    parts = []
    for child in element:
        if child.tag == _q("t"):
            parts.append(child.text or "")
        elif child.tag == _q("r"):
            t = child.find(_q("t"))
            if t is not None:
                parts.append(t.text or "")
    return "".join(parts)


def _parse_w3c(text: str | None) -> dt.datetime | None:
    if not text:
        return None
    try:
        return dt.datetime.fromisoformat(text.strip().replace("Z", "+00:00"))
    except ValueError:
        return None


@dataclass
class _Styles:
    formats: list[tuple[str, int | None]]
    locked: list[bool]

    def format_of(self, index: int) -> tuple[str, int | None]:
        if 0 <= index < len(self.formats):
            return self.formats[index]
        return ("General", 0)

    def locked_of(self, index: int) -> bool:
        if 0 <= index < len(self.locked):
            return self.locked[index]
        return True


def _read_styles(pkg: _Package, target: str | None) -> _Styles:
    root = pkg.xml(target) if target else None
    if root is None:
        return _Styles([], [])
    custom = {}
    numfmts = root.find(_q("numFmts"))
    if numfmts is not None:
        for nf in numfmts:
            custom[int(nf.get("numFmtId", "0"))] = nf.get("formatCode", "General")
    formats, locked = [], []
    xfs = root.find(_q("cellXfs"))
    for xf in (xfs if xfs is not None else []):
        fid = int(xf.get("numFmtId", "0"))
        code = custom.get(fid, BUILTIN_FORMATS.get(fid, "General"))
        formats.append((code, fid if fid not in custom else None))
        prot = xf.find(_q("protection"))
        locked.append(prot is None or prot.get("locked", "1") not in ("0", "false"))
    return _Styles(formats, locked)


_REF_RE = re.compile(r"^([A-Z]+)(\d+)$")


def _read_sheet(pkg: _Package, part: str, name: str, visibility: Visibility,
                shared: list[str], styles: _Styles, date1904: bool) -> Sheet:
    root = pkg.xml(part)
    if root is None:
        raise ValueError(f"sheet {name!r} unreadable")
    obs = pkg.observations
    cells: dict[CellAddress, Cell] = {}
    shared_formulas: dict[str, tuple[CellAddress, str]] = {}
    hidden_rows = False
    seen_entries = 0

    data = root.find(_q("sheetData"))
    row_number = 0
    for row in (data if data is not None else []):
        row_number = int(row.get("r", row_number + 1))
        if row.get("hidden") in ("1", "true"):
            hidden_rows = True
        col_number = 0
        for c in row.findall(_q("c")):
            ref = c.get("r")
            try:
                addr = parse_a1(ref) if ref else CellAddress(row_number, col_number + 1)
            except MalformedAddress:
                obs.append(f"{name}: bad cell reference {ref!r}; cell skipped")
                continue
            col_number = addr.col
            cell = _read_cell(c, addr, name, shared, styles, shared_formulas, date1904, obs)
            if c.find(_q("v")) is not None or c.find(_q("f")) is not None or c.find(_q("is")) is not None:
                seen_entries += 1
            if cell is not None:
                cells[addr] = cell

    loaded = sum(1 for c in cells.values() if not c.is_empty)
    if loaded != seen_entries:
        obs.append(f"{name}: {seen_entries - loaded} cell entries could not be loaded")

    validated = []
    dvs = root.find(_q("dataValidations"))
    for dv in (dvs if dvs is not None else []):
        for piece in (dv.get("sqref") or "").split():
            try:
                validated.append(parse_range(piece))
            except MalformedRange:
                obs.append(f"{name}: bad validation range {piece!r}")
    if validated:
        for addr, cell in list(cells.items()):
            if any(r.contains(addr) for r in validated):
                cells[addr] = _with(cell, has_validation=True)

    rels = pkg.rels(part)
    for kind, target, _ in rels.values():
        if kind == "comments":
            _attach_comments(pkg, target, name, cells)

    protection = root.find(_q("sheetProtection"))
    protected = protection is not None and protection.get("sheet", "0") in ("1", "true")
    flags = set()
    if root.find(_q("autoFilter")) is not None and hidden_rows:
        flags.add("filtered-hidden-rows")
    if root.find(_q("oleObjects")) is not None:
        flags.add("ole-objects")
    if root.find(_q("scenarios")) is not None:
        flags.add("scenarios")
    if root.find(_q("dataConsolidate")) is not None:
        flags.add("consolidation-sources")
    kinds = {kind for kind, _, _ in rels.values()}
    if "pivotTable" in kinds:
        flags.add("pivot-tables")
    if "queryTable" in kinds:
        flags.add("query-tables")
    return Sheet(name, cells, protected, visibility, frozenset(flags))


def _with(cell: Cell, **changes) -> Cell:
    from dataclasses import replace
    return replace(cell, **changes)


def _read_cell(c, addr, sheet_name, shared, styles, shared_formulas, date1904, obs) -> Cell | None:
    style = int(c.get("s", "0"))
    fmt_code, fmt_id = styles.format_of(style)
    locked = styles.locked_of(style)
    t = c.get("t", "n")
    v = c.find(_q("v"))
    f = c.find(_q("f"))
    where = f"{sheet_name}!{addr.a1}"

    formula = None
    if f is not None:
        ftype = f.get("t", "normal")
        text = f.text or ""
        if ftype == "shared":
            si = f.get("si")
            if text:
                shared_formulas[si] = (addr, text)
            elif si in shared_formulas:
                origin, master = shared_formulas[si]
                try:
                    text = translate_text("=" + master, origin, addr)[1:]
                except (FormulaSyntaxError, OutOfBoundsReference) as exc:
                    obs.append(f"{where}: cannot expand shared formula ({exc}); master text kept")
                    text = master
            else:
                obs.append(f"{where}: shared formula {si!r} has no master")
        if text:
            formula = "=" + text

    raw = v.text if v is not None else None
    if formula is not None:
        cached = None
        if raw is not None:
            cached = _typed_value(t, raw, shared, where, obs)
        return Cell(addr, ContentKind.FORMULA, cached, formula, fmt_code, locked)

    if t == "inlineStr":
        is_ = c.find(_q("is"))
        if is_ is None:
            return None
        return Cell(addr, ContentKind.TEXT, _text_of(is_), None, fmt_code, locked)
    if raw is None:
        return None
    value = _typed_value(t, raw, shared, where, obs)
    if value is _FAILED:
        return None
    if t == "d":
        parsed = _parse_w3c(raw)
        if parsed is None:
            obs.append(f"{where}: bad ISO date {raw!r}")
            return None
        value = parsed.date() if parsed.time() == dt.time(0) else parsed
        return Cell(addr, ContentKind.DATE, value, None, fmt_code, locked)
    if isinstance(value, (str, CellError)):
        return Cell(addr, ContentKind.TEXT, value, None, fmt_code, locked)
    if isinstance(value, float) and is_date_format(fmt_code, fmt_id):
        try:
            return Cell(addr, ContentKind.DATE, serial_to_datetime(value, date1904), None,
                        fmt_code, locked)
        except OverflowError:
            obs.append(f"{where}: date serial {value} out of range; kept as a number")
    return Cell(addr, ContentKind.NUMBER, value, None, fmt_code, locked)


_FAILED = object()


def _typed_value(t, raw, shared, where, obs):
    if t == "s":
        try:
            return shared[int(raw)]
        except (ValueError, IndexError):
            obs.append(f"{where}: shared string index {raw!r} is out of range")
            return _FAILED
    if t in ("str", "inlineStr"):
        return raw
    if t == "b":
        return raw.strip() in ("1", "true")
    if t == "e":
        code = raw.strip()
        if code in ERROR_CODES:
            return CellError(code)
        obs.append(f"{where}: unknown error value {code!r}")
        return code
    if t == "d":
        return raw
    try:
        return float(raw)
    except ValueError:
        obs.append(f"{where}: bad number {raw!r}")
        return _FAILED


def _attach_comments(pkg: _Package, part: str, sheet_name: str, cells: dict) -> None:
    root = pkg.xml(part)
    if root is None:
        return
    clist = root.find(_q("commentList"))
    for comment in (clist if clist is not None else []):
        try:
            addr = parse_a1(comment.get("ref", ""))
        except MalformedAddress:
            pkg.observations.append(f"{sheet_name}: comment on bad reference {comment.get('ref')!r}")
            continue
        text = comment.find(_q("text"))
        body = _text_of(text) if text is not None else ""
        ctext = CommentText.from_body(body)
        cell = cells.get(addr)
        if cell is None:
            cells[addr] = Cell(addr, ContentKind.EMPTY, comment=ctext)
        else:
            cells[addr] = _with(cell, comment=ctext)


def _external_links(pkg: _Package, wb_root: ET.Element, wb_rels) -> list[str]:
    links = []
    refs = wb_root.find(_q("externalReferences"))
    ids = [e.get(_q("id", REL)) for e in (refs if refs is not None else [])]
    if not ids:
        ids = [rid for rid, (kind, _, _) in wb_rels.items() if kind == "externalLink"]
    for rid in ids:
        if rid not in wb_rels:
            pkg.observations.append(f"external reference {rid!r} has no relationship")
            continue
        _, part, _ = wb_rels[rid]
        targets = [t for kind, t, mode in pkg.rels(part).values() if mode == "External"]
        if not targets:
            pkg.observations.append(f"external link part {part} names no target file")
            continue
        target = targets[0]
        if target.startswith("file:///"):
            target = target[len("file:///"):]
        links.append(target)
    return links


def load_xlsx(path: str | Path) -> IngestReport:
    path = Path(path)
    try:
        zf = zipfile.ZipFile(path)
    except (zipfile.BadZipFile, OSError) as exc:
        raise IngestError("not-a-zip-container", f"{path}: not a zip container ({exc})") from None
    with zf:
        pkg = _Package(zf)
        return _load(pkg, path)


def _load(pkg: _Package, path: Path) -> IngestReport:
    obs = pkg.observations
    wb_part = "xl/workbook.xml"
    for kind, target, _ in pkg.rels("").values():
        if kind == "officeDocument":
            wb_part = target
    wb_root = pkg.xml(wb_part, required=True)
    wb_rels = pkg.rels(wb_part)

    shared: list[str] = []
    styles_part = None
    for kind, target, _ in wb_rels.values():
        if kind == "sharedStrings":
            root = pkg.xml(target)
            if root is not None:
                shared = [_text_of(si) for si in root.findall(_q("si"))]
        elif kind == "styles":
            styles_part = target
    styles = _read_styles(pkg, styles_part)

    flags = set()
    wb_pr = wb_root.find(_q("workbookPr"))
    date1904 = wb_pr is not None and wb_pr.get("date1904") in ("1", "true")
    if wb_pr is not None:
        if wb_pr.get("backupFile") in ("1", "true"):
            flags.add("backup")
        if wb_pr.get("filterPrivacy") in ("1", "true"):
            flags.add("remove-personal-information")
    calc = wb_root.find(_q("calcPr"))
    if calc is not None:
        if calc.get("calcMode") == "manual":
            flags.add("manual-calculation")
        if calc.get("fullPrecision") in ("0", "false"):
            flags.add("precision-as-displayed")
    if pkg.has("docProps/custom.xml"):
        flags.add("custom-document-properties")

    sheets = []
    sheets_el = wb_root.find(_q("sheets"))
    declared = list(sheets_el) if sheets_el is not None else []
    failures = 0
    for index, sh in enumerate(declared):
        name = sh.get("name")
        rid = sh.get(_q("id", REL))
        kind, target, _ = wb_rels.get(rid, ("", "", ""))
        if kind in ("macrosheet", "xlMacrosheet"):
            flags.add("excel4-macro-sheets")
            continue
        if kind != "worksheet":
            obs.append(f"sheet {name!r} is a {kind or 'missing'} part; not read")
            continue
        state = sh.get("state", "visible")
        visibility = {"hidden": Visibility.HIDDEN, "veryHidden": Visibility.VERY_HIDDEN}.get(
            state, Visibility.VISIBLE)
        try:
            sheets.append(_read_sheet(pkg, target, name, visibility, shared, styles, date1904))
        except ValueError as exc:
            failures += 1
            obs.append(f"sheet-xml-malformed: {exc}")
    if failures and not sheets:
        raise IngestError("sheet-xml-malformed", f"{path}: no sheet could be read")

    names = {}
    local_ids = {i: s.get("name") for i, s in enumerate(declared)}
    dn = wb_root.find(_q("definedNames"))
    for d in (dn if dn is not None else []):
        if d.get("hidden") in ("1", "true"):
            continue
        key = d.get("name", "")
        if d.get("localSheetId") is not None:
            key = f"{local_ids.get(int(d.get('localSheetId')), '?')}!{key}"
        if key.casefold() in (k.casefold() for k in names):
            obs.append(f"duplicate defined name {key!r}; first kept")
            continue
        names[key] = (d.text or "").strip()

    links = _external_links(pkg, wb_root, wb_rels)

    core = pkg.xml("docProps/core.xml")
    app = pkg.xml("docProps/app.xml")
    author = manager = None
    created = None
    app_name = "Microsoft Excel"
    version = ""
    if core is not None:
        el = core.find(_q("creator", DC))
        author = el.text if el is not None and el.text else None
        el = core.find(_q("created", DCTERMS))
        created = _parse_w3c(el.text if el is not None else None)
    if app is not None:
        el = app.find(_q("Manager", APP))
        manager = el.text if el is not None and el.text else None
        el = app.find(_q("Application", APP))
        app_name = el.text if el is not None and el.text else app_name
        el = app.find(_q("AppVersion", APP))
        version = el.text if el is not None and el.text else ""
    fmt = "Office Open XML workbook" + (f" ({app_name} {version})".rstrip() if app is not None else "")

    base = FileMeta(author_property=author, manager_property=manager, file_format=fmt)
    meta = file_meta_from_stat(path, base, obs, created=created)
    modules = load_sidecar_modules(path, obs)
    wb = Workbook(str(path), tuple(sheets), names, tuple(links), tuple(modules), meta,
                  frozenset(flags))
    return IngestReport(wb, tuple(obs))
