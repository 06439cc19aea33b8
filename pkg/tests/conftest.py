from __future__ import annotations

import sys
from pathlib import Path

import pytest

TESTS = Path(__file__).parent
CORPUS = TESTS / "corpus"
sys.path.insert(0, str(TESTS))

from sheetdoc.ingest import load_fixture, load_vba_modules  # noqa: E402
from sheetdoc.ingest.common import sidecar_dir  # noqa: E402

FIXTURES = sorted(CORPUS.glob("*.fixture"))


def load(name: str):
    return load_fixture(CORPUS / name).workbook


def macros_for(name: str):
    return load_vba_modules(sidecar_dir(CORPUS / name), [])


@pytest.fixture
def corpus() -> Path:
    return CORPUS


@pytest.fixture
def receipts():
    return load("receipts.fixture")


_SESSION_START = [0.0]


def pytest_sessionstart(session):
    import time

    _SESSION_START[0] = time.perf_counter()


def pytest_terminal_summary(terminalreporter):
    import time

    module = sys.modules.get("test_acceptance")
    results = getattr(module, "RESULTS", None)
    if results:
        terminalreporter.section("acceptance criteria")
        for number in sorted(results):
            terminalreporter.write_line(results[number])
    elapsed = time.perf_counter() - _SESSION_START[0]
    terminalreporter.write_line(f"suite wall time {elapsed:.1f} s (budget 60 s)")
