"""Loading workbooks from .xlsx containers and plain-text fixtures."""

from __future__ import annotations

import zipfile
from pathlib import Path

from .common import IngestReport, load_vba_modules, read_vba_module
from .fixture import load_fixture, parse_fixture
from .xlsx import load_xlsx


def load_workbook(path: str | Path) -> IngestReport:
    """Load ``path`` as an xlsx container if it is a zip file, else as a fixture."""
    path = Path(path)
    if zipfile.is_zipfile(path):
        return load_xlsx(path)
    return load_fixture(path)


__all__ = ["IngestReport", "load_fixture", "load_vba_modules", "load_workbook", "load_xlsx",
           "parse_fixture", "read_vba_module"]
