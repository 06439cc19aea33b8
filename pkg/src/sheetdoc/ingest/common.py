from __future__ import annotations

import datetime as dt
import logging
import os
import stat
from dataclasses import dataclass, replace
from pathlib import Path

from ..macros import MacroModule
from ..model import FileMeta, Workbook

log = logging.getLogger(__name__)

VBA_SUFFIXES = (".bas", ".cls", ".frm", ".txt", ".vba")


@dataclass(frozen=True)
class IngestReport:
    workbook: Workbook
    observations: tuple[str, ...] = ()


def sidecar_dir(path: Path) -> Path:
    """VBA modules for ``book.xlsx`` live in ``book.xlsx.vba/``."""
    return path.with_name(path.name + ".vba")


def _module_name(path: Path, source: str) -> str:
    for line in source.splitlines()[:20]:
        if line.startswith("Attribute VB_Name"):
            _, _, value = line.partition("=")
            return value.strip().strip('"') or path.stem
    return path.stem


def load_vba_modules(directory: str | Path, observations: list[str] | None = None) -> list[MacroModule]:
    """Read every exported module file in ``directory``, in filename order.

    Unreadable files are reported in ``observations`` and skipped.
    """
    directory = Path(directory)
    if observations is None:
        observations = []
    modules = []
    if not directory.is_dir():
        return modules
    for path in sorted(directory.iterdir()):
        if not path.is_file() or path.suffix.lower() not in VBA_SUFFIXES:
            continue
        try:
            modules.append(read_vba_module(path))
        except OSError as exc:
            observations.append(f"unreadable-file: {path.name}: {exc.strerror}")
    return modules


def read_vba_module(path: str | Path) -> MacroModule:
    """One exported module file; raises OSError when unreadable."""
    path = Path(path)
    data = path.read_bytes()
    try:
        source = data.decode("utf-8")
    except UnicodeDecodeError:
        # the VBA editor exports in the ANSI code page
        source = data.decode("cp1252", errors="replace")
    return MacroModule.from_source(_module_name(path, source), source)


def load_sidecar_modules(path: Path, observations: list[str]) -> list[MacroModule]:
    return load_vba_modules(sidecar_dir(path), observations)


def _stamp(seconds: float) -> dt.datetime:
    return dt.datetime.fromtimestamp(seconds, tz=dt.timezone.utc).replace(microsecond=0)


def file_attributes(path: Path, st: os.stat_result) -> frozenset[str]:
    attrs = set()
    win = getattr(st, "st_file_attributes", None)
    if win is not None:
        if win & stat.FILE_ATTRIBUTE_ARCHIVE:
            attrs.add("archive")
        if win & stat.FILE_ATTRIBUTE_HIDDEN:
            attrs.add("hidden")
        if win & stat.FILE_ATTRIBUTE_SYSTEM:
            attrs.add("system")
        if win & stat.FILE_ATTRIBUTE_READONLY:
            attrs.add("read-only")
    else:
        if path.name.startswith("."):
            attrs.add("hidden")
        if not st.st_mode & (stat.S_IWUSR | stat.S_IWGRP | stat.S_IWOTH):
            attrs.add("read-only")
    return frozenset(attrs)


def file_meta_from_stat(path: Path, base: FileMeta, observations: list[str],
                        created: dt.datetime | None = None) -> FileMeta:
    """Fill size, timestamps and attributes from the filesystem.

    ``created`` comes from container properties when the format has them.
    """
    st = path.stat()
    modified = _stamp(st.st_mtime)
    birth = getattr(st, "st_birthtime", None)
    if created is None and birth is not None:
        created = _stamp(birth)
    if created is not None and created > modified:
        observations.append(
            f"created timestamp {created.isoformat()} is after the file modification time; ignored")
        created = None
    return replace(
        base,
        size_bytes=st.st_size,
        created=created,
        accessed=_stamp(st.st_atime),
        modified=modified,
        attributes=file_attributes(path, st),
    )
