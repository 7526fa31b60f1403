"""Append-only run logs: line-delimited key=value records.

Two record shapes share the format. Chain runs log one line per emission;
session logs add the emission index and detokenized text, plus constraint
change markers. Multi-word values (token ids, text) sit at the end of the
line so records stay splittable without quoting.
"""

from __future__ import annotations

import os
import re
from dataclasses import dataclass
from pathlib import Path
from typing import Union


@dataclass(frozen=True)
class SampleRecord:
    """One emission of a bare chain run."""

    step: int
    energy: float
    accept_rate: float
    ids: tuple[int, ...]


@dataclass(frozen=True)
class SessionEmission:
    """One emission inside a session, with its detokenized text."""

    emission: int
    step: int
    energy: float
    accept_rate: float
    ids: tuple[int, ...]
    text: str


@dataclass(frozen=True)
class ConstraintMarker:
    """Marks a constraint change; spec is the full new spec text."""

    step: int
    spec: str


LogEntry = Union[SampleRecord, SessionEmission, ConstraintMarker]

_SAMPLE_RE = re.compile(
    r"^step=(\d+) energy=(\S+) accept_rate=(\S+) ids=((?:\d+)(?: \d+)*)$"
)
_EMISSION_RE = re.compile(
    r"^emission=(\d+) step=(\d+) energy=(\S+) accept_rate=(\S+)"
    r" ids=((?:\d+)(?: \d+)*) text=(.*)$"
)
_MARKER_RE = re.compile(r"^marker=constraints step=(\d+) spec=(.*)$")


def _escape(text: str) -> str:
    return text.replace("\\", "\\\\").replace("\n", "\\n")


def _unescape(text: str) -> str:
    out: list[str] = []
    i = 0
    while i < len(text):
        if text[i] == "\\" and i + 1 < len(text):
            out.append("\n" if text[i + 1] == "n" else text[i + 1])
            i += 2
        else:
            out.append(text[i])
            i += 1
    return "".join(out)


def format_entry(entry: LogEntry) -> str:
    if isinstance(entry, SampleRecord):
        ids = " ".join(str(i) for i in entry.ids)
        return f"step={entry.step} energy={entry.energy!r} accept_rate={entry.accept_rate!r} ids={ids}"
    if isinstance(entry, SessionEmission):
        ids = " ".join(str(i) for i in entry.ids)
        return (
            f"emission={entry.emission} step={entry.step} energy={entry.energy!r}"
            f" accept_rate={entry.accept_rate!r} ids={ids} text={entry.text}"
        )
    if isinstance(entry, ConstraintMarker):
        return f"marker=constraints step={entry.step} spec={_escape(entry.spec)}"
    raise TypeError(f"cannot format {entry!r}")


def parse_entry(line: str) -> LogEntry:
    line = line.rstrip("\n")
    m = _EMISSION_RE.match(line)
    if m:
        return SessionEmission(
            emission=int(m.group(1)),
            step=int(m.group(2)),
            energy=float(m.group(3)),
            accept_rate=float(m.group(4)),
            ids=tuple(int(i) for i in m.group(5).split()),
            text=m.group(6),
        )
    m = _SAMPLE_RE.match(line)
    if m:
        return SampleRecord(
            step=int(m.group(1)),
            energy=float(m.group(2)),
            accept_rate=float(m.group(3)),
            ids=tuple(int(i) for i in m.group(4).split()),
        )
    m = _MARKER_RE.match(line)
    if m:
        return ConstraintMarker(step=int(m.group(1)), spec=_unescape(m.group(2)))
    raise ValueError(f"unparseable run log line: {line!r}")


class RunLogWriter:
    """Append-only writer; every record is flushed to disk as written."""

    def __init__(self, path: str | Path):
        self.path = Path(path)
        self.path.parent.mkdir(parents=True, exist_ok=True)
        self._fh = open(self.path, "a", encoding="utf-8")

    def append(self, entry: LogEntry) -> None:
        self._fh.write(format_entry(entry) + "\n")
        self._fh.flush()
        os.fsync(self._fh.fileno())

    def close(self) -> None:
        self._fh.close()

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()


def read_log(path: str | Path) -> list[LogEntry]:
    entries: list[LogEntry] = []
    with open(path, "r", encoding="utf-8") as fh:
        for line in fh:
            if line.strip():
                entries.append(parse_entry(line))
    return entries
