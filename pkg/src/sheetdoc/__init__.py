"""sheetdoc: structured documentation, inventory and audit checks for spreadsheet workbooks."""

from __future__ import annotations

__version__ = "0.1.0"

from .model import Cell, CellAddress, CellRange, ContentKind, Sheet, Workbook  # noqa: E402

__all__ = ["Cell", "CellAddress", "CellRange", "ContentKind", "Sheet", "Workbook", "__version__"]
