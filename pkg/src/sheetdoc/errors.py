"""Exception types raised by sheetdoc.

Every error carries a stable ``code`` so the CLI and callers can branch on it
without parsing messages.
"""

from __future__ import annotations


class SheetDocError(Exception):
    code = "error"


class MalformedAddress(SheetDocError, ValueError):
    code = "malformed-address"


class MalformedRange(SheetDocError, ValueError):
    code = "malformed-range"


class FormulaSyntaxError(SheetDocError, ValueError):
    code = "formula-syntax-error"

    def __init__(self, message: str, offset: int) -> None:
        super().__init__(f"{message} at offset {offset}")
        self.message = message
        self.offset = offset


class OutOfBoundsReference(SheetDocError, ValueError):
    code = "out-of-bounds-reference"


class IngestError(SheetDocError):
    """Fatal problem reading a workbook container."""

    def __init__(self, code: str, message: str) -> None:
        super().__init__(message)
        self.code = code


class FixtureSyntaxError(SheetDocError, ValueError):
    code = "fixture-syntax-error"

    def __init__(self, message: str, line: int) -> None:
        super().__init__(f"line {line}: {message}")
        self.line = line


class InvariantViolation(SheetDocError, ValueError):
    code = "invariant-violation"


class InvalidEnumValue(SheetDocError, ValueError):
    code = "invalid-enum-value"


class UnknownField(SheetDocError, KeyError):
    code = "unknown-field"

    def __str__(self) -> str:
        return str(self.args[0]) if self.args else self.code


class ConfigError(SheetDocError, ValueError):
    code = "invalid-config"
