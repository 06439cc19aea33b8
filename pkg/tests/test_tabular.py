from __future__ import annotations

import json

import pytest
from hypothesis import given, strategies as st

from sheetdoc.tabular import OutputFormat, render_rows, to_csv, to_markdown


@pytest.mark.parametrize("text,fmt", [("csv", OutputFormat.CSV), ("md", OutputFormat.MARKDOWN),
                                      ("markdown", OutputFormat.MARKDOWN),
                                      ("JSON", OutputFormat.JSON), ("json-text", OutputFormat.JSON)])
def test_parse_format(text, fmt):
    assert OutputFormat.parse(text) is fmt


def test_parse_format_rejects():
    with pytest.raises(ValueError):
        OutputFormat.parse("xml")


def test_csv_lines_and_none():
    assert to_csv(["a", "b"], [[1, None], ["x,y", "q"]]) == 'a,b\n1,\n"x,y",q\n'


def test_markdown_escapes_pipes():
    out = to_markdown(["a"], [["x|y"]])
    assert out.splitlines() == ["| a |", "| --- |", "| x\\|y |"]


def test_json_rows_are_objects():
    assert json.loads(render_rows(["a", "b"], [[1, "x"]], "json")) == [{"a": 1, "b": "x"}]


# NUL cannot occur in a cell: XML 1.0 forbids it
_CELL = st.one_of(st.none(), st.integers(),
                  st.text(st.characters(blacklist_characters="\x00"), max_size=10))


@given(st.lists(st.lists(_CELL, min_size=2, max_size=2), max_size=5))
def test_csv_round_trips_through_reader(rows):
    import csv
    import io

    out = to_csv(["a", "b"], rows)
    parsed = list(csv.reader(io.StringIO(out, newline="")))
    assert parsed[0] == ["a", "b"]
    expected = [["" if v is None else str(v).replace("\r\n", "\n").replace("\r", "\n") for v in row]
                for row in rows]
    assert parsed[1:] == expected
