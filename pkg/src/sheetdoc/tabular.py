"""Rendering of header-plus-rows tables as CSV, Markdown or JSON text."""

from __future__ import annotations

import csv
import enum
import io
import json
from typing import Sequence


class OutputFormat(enum.Enum):
    CSV = "csv"
    MARKDOWN = "md"
    JSON = "json"

    @classmethod
    def parse(cls, text: str | OutputFormat) -> OutputFormat:
        if isinstance(text, cls):
            return text
        aliases = {"csv": cls.CSV, "md": cls.MARKDOWN, "markdown": cls.MARKDOWN,
                   "json": cls.JSON, "json-text": cls.JSON}
        try:
            return aliases[text.lower()]
        except KeyError:
            raise ValueError(f"unknown output format {text!r}") from None


def _csv_cell(value: object) -> object:
    if value is None:
        return ""
    if isinstance(value, str):
        # a bare CR would not be quoted under a LF line terminator
        return value.replace("\r\n", "\n").replace("\r", "\n")
    return value


def to_csv(header: Sequence[str], rows: Sequence[Sequence[object]]) -> str:
    """Comma-separated text with LF line ends; in-cell line breaks become LF."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    writer.writerows([_csv_cell(v) for v in row] for row in rows)
    return buf.getvalue()


def _md_cell(value: object) -> str:
    text = "" if value is None else str(value)
    return text.replace("\\", "\\\\").replace("|", "\\|").replace("\n", "<br>")


def to_markdown(header: Sequence[str], rows: Sequence[Sequence[object]]) -> str:
    lines = ["| " + " | ".join(_md_cell(h) for h in header) + " |",
             "|" + "|".join(" --- " for _ in header) + "|"]
    lines += ["| " + " | ".join(_md_cell(v) for v in row) + " |" for row in rows]
    return "\n".join(lines) + "\n"


def to_json(payload: object) -> str:
    return json.dumps(payload, indent=2, ensure_ascii=False, default=str) + "\n"


def render_rows(header: Sequence[str], rows: Sequence[Sequence[object]],
                fmt: OutputFormat | str) -> str:
    fmt = OutputFormat.parse(fmt)
    if fmt is OutputFormat.CSV:
        return to_csv(header, rows)
    if fmt is OutputFormat.MARKDOWN:
        return to_markdown(header, rows)
    return to_json([dict(zip(header, row)) for row in rows])
