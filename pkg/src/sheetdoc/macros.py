"""VBA module text: procedure detection, documentation headers and lint rules.

Analysis is line based. Modules arrive as exported text (``.bas``, ``.cls``);
the source is never modified.
"""

from __future__ import annotations

import enum
import re
from dataclasses import dataclass

from .docschema import DocRecord, MacroOrigin, Unstructured, parse_doc_comment


class ProcKind(enum.Enum):
    SUB = "sub"
    FUNCTION = "function"
    EVENT = "event"


@dataclass(frozen=True)
class Procedure:
    name: str
    kind: ProcKind
    start_line: int  # 1-based, the declaration line
    end_line: int    # 1-based, the End Sub / End Function line

    @property
    def n_lines(self) -> int:
        return self.end_line - self.start_line + 1

    def contains(self, line: int) -> bool:
        return self.start_line <= line <= self.end_line


@dataclass(frozen=True)
class MacroModule:
    name: str
    source: str
    procedures: tuple[Procedure, ...] = ()

    @classmethod
    def from_source(cls, name: str, source: str) -> MacroModule:
        return cls(name, source, tuple(find_procedures(source)))

    @property
    def lines(self) -> list[str]:
        return self.source.splitlines()

    @property
    def line_count(self) -> int:
        return len(self.lines)

    def body(self, proc: Procedure) -> list[str]:
        return self.lines[proc.start_line - 1:proc.end_line]


_DECL = re.compile(
    r"^\s*(?:(?:Public|Private|Friend)\s+)?(?:Static\s+)?"
    r"(Sub|Function|Property\s+(?:Get|Let|Set))\s+([A-Za-z_][A-Za-z0-9_]*)",
    re.IGNORECASE)
_END = re.compile(r"^\s*End\s+(Sub|Function|Property)\b", re.IGNORECASE)
_EVENT = re.compile(
    r"^(?:(?:Workbook|Worksheet|Chart|UserForm|App|Application)_\w+|Auto_(?:Open|Close)"
    r"|\w+_(?:Click|Change|Initialize|Terminate|Activate|Deactivate))$",
    re.IGNORECASE)


def find_procedures(source: str) -> list[Procedure]:
    procs = []
    open_decl = None
    for number, line in enumerate(source.splitlines(), start=1):
        if open_decl is None:
            m = _DECL.match(line)
            if m:
                word = m.group(1).split()[0].lower()
                name = m.group(2)
                if word == "sub" and _EVENT.match(name):
                    kind = ProcKind.EVENT
                elif word == "sub":
                    kind = ProcKind.SUB
                else:
                    kind = ProcKind.FUNCTION
                open_decl = (name, kind, number)
        elif _END.match(line):
            procs.append(Procedure(open_decl[0], open_decl[1], open_decl[2], number))
            open_decl = None
    if open_decl is not None:
        # unterminated procedure runs to the end of the module
        procs.append(Procedure(open_decl[0], open_decl[1], open_decl[2], number))
    return procs


def _comment_text(line: str) -> str | None:
    """Text of a whole-line comment (``'`` or ``Rem``), else None."""
    stripped = line.strip()
    if stripped.startswith("'"):
        return stripped[1:].strip()
    m = re.match(r"^Rem(?:\s+(.*))?$", stripped, re.IGNORECASE)
    if m:
        return (m.group(1) or "").strip()
    return None


def header_lines(module: MacroModule, proc: Procedure) -> list[str]:
    """Comment lines at the top of a procedure body, before the first statement."""
    out = []
    for line in module.body(proc)[1:-1]:
        if not line.strip():
            continue
        text = _comment_text(line)
        if text is None:
            break
        out.append(text)
    return out


def parse_macro_headers(module: MacroModule) -> list[tuple[str, DocRecord | Unstructured]]:
    results = []
    for proc in module.procedures:
        origin = MacroOrigin(module.name, proc.name)
        results.append((proc.name, parse_doc_comment("\n".join(header_lines(module, proc)), origin)))
    return results


# --------------------------------------------------------------------------
# Lint

class LintRule(enum.Enum):
    MANUAL_CALCULATION = "manual-calculation"
    PRECISION_AS_DISPLAYED = "precision-as-displayed"
    HARDCODED_SAVE_PATH = "hardcoded-save-path"
    UNDOCUMENTED_PROCEDURE = "undocumented-procedure"


@dataclass(frozen=True)
class MacroLintFinding:
    rule: LintRule
    module: str
    procedure: str
    line: int
    message: str


RULE_PATTERNS = {
    LintRule.MANUAL_CALCULATION: re.compile(
        r"\.Calculation\s*=\s*(?:xlManual|xlCalculationManual|-4135)\b", re.IGNORECASE),
    # Setting it to False restores full precision and is harmless.
    LintRule.PRECISION_AS_DISPLAYED: re.compile(
        r"\bPrecisionAsDisplayed\s*=\s*(?:True|-1)\b", re.IGNORECASE),
    LintRule.HARDCODED_SAVE_PATH: re.compile(
        r"\.Save(?:Copy)?As\b\s*(?:Filename\s*:=\s*)?\"[^\"]+\"", re.IGNORECASE),
    LintRule.UNDOCUMENTED_PROCEDURE: _DECL,
}

_MESSAGES = {
    LintRule.MANUAL_CALCULATION: "switches calculation to manual; totals stop updating after edits",
    LintRule.PRECISION_AS_DISPLAYED: "enables precision-as-displayed; stored values are rounded permanently",
    LintRule.HARDCODED_SAVE_PATH: "saves to a literal path",
    LintRule.UNDOCUMENTED_PROCEDURE: "procedure has no structured documentation header",
}


def _strip_trailing_comment(line: str) -> str:
    in_string = False
    for i, ch in enumerate(line):
        if ch == '"':
            in_string = not in_string
        elif ch == "'" and not in_string:
            return line[:i]
    return line


def lint_module(module: MacroModule) -> list[MacroLintFinding]:
    findings = []
    lines = module.lines
    headers = dict(parse_macro_headers(module))
    for proc in module.procedures:
        if not isinstance(headers.get(proc.name), DocRecord):
            findings.append(MacroLintFinding(
                LintRule.UNDOCUMENTED_PROCEDURE, module.name, proc.name, proc.start_line,
                _MESSAGES[LintRule.UNDOCUMENTED_PROCEDURE]))
        for number in range(proc.start_line + 1, proc.end_line):
            code = lines[number - 1]
            if _comment_text(code) is not None:
                continue
            code = _strip_trailing_comment(code)
            for rule in (LintRule.MANUAL_CALCULATION, LintRule.PRECISION_AS_DISPLAYED,
                         LintRule.HARDCODED_SAVE_PATH):
                if RULE_PATTERNS[rule].search(code):
                    findings.append(MacroLintFinding(rule, module.name, proc.name, number,
                                                     _MESSAGES[rule]))
    return findings


def lint_macros(modules) -> list[MacroLintFinding]:
    out = []
    for module in modules:
        out.extend(lint_module(module))
    return out


__all__ = [
    "LintRule", "MacroLintFinding", "MacroModule", "ProcKind", "Procedure",
    "find_procedures", "header_lines", "lint_macros", "lint_module", "parse_macro_headers",
]
