"""Stream ingestion: file or stdin replay segmented into data windows.

Record grammar, one record per line::

    timestamp,value

where value is a decimal real or the literal ``NA`` for a missing cell.
Timestamps are treated as opaque tokens (ISO-8601 strings and integer
milliseconds are the expected forms) and are carried through unparsed. An
optional header line is auto-detected and skipped. A malformed value token
raises ParseError with its line number; it is never silently read as
missing.
"""

import sys
from dataclasses import dataclass
from enum import Enum
from pathlib import Path
from typing import Iterable, Iterator

from .errors import ParseError
from .model import DataWindow


class StreamKind(Enum):
    FILE = "file"
    STANDARD_INPUT = "stdin"
    SYNTHETIC = "synthetic"


@dataclass
class StreamSource:
    """A replay source plus its cursor, for error reporting."""

    kind: StreamKind
    name: str
    line_number: int = 0


def _parse_value(token: str, line_number: int) -> float | None:
    token = token.strip()
    if token == "NA":
        return None
    try:
        return float(token)
    except ValueError:
        raise ParseError(
            f"value {token!r} is neither a real number nor NA", line_number
        ) from None


def parse_stream_line(line: str, line_number: int) -> tuple[str, float | None]:
    parts = line.split(",")
    if len(parts) != 2:
        raise ParseError(
            f"expected 'timestamp,value' with one comma (got {line!r})", line_number
        )
    timestamp = parts[0].strip()
    if not timestamp:
        raise ParseError("empty timestamp", line_number)
    return timestamp, _parse_value(parts[1], line_number)


def _looks_like_header(line: str) -> bool:
    parts = line.split(",")
    if len(parts) != 2:
        return False
    token = parts[1].strip()
    if token == "NA":
        return False
    try:
        float(token)
    except ValueError:
        return True
    return False


def read_windows(
    lines: Iterable[str],
    window_size: int,
    start_id: int = 0,
    source: StreamSource | None = None,
) -> Iterator[DataWindow]:
    """Segment a line stream into consecutive non-overlapping windows.

    A trailing window shorter than window_size is yielded with its true
    length and flagged partial.
    """
    if window_size < 1:
        raise ValueError(f"window_size must be >= 1 (got {window_size})")
    cells: list[float | None] = []
    stamps: list[str] = []
    window_id = start_id
    for lineno, raw in enumerate(lines, start=1):
        if source is not None:
            source.line_number = lineno
        line = raw.rstrip("\n")
        if not line.strip():
            continue
        if lineno == 1 and _looks_like_header(line):
            continue
        timestamp, value = parse_stream_line(line, lineno)
        stamps.append(timestamp)
        cells.append(value)
        if len(cells) == window_size:
            yield DataWindow.from_cells(window_id, cells, tuple(stamps))
            window_id += 1
            cells, stamps = [], []
    if cells:
        yield DataWindow.from_cells(window_id, cells, tuple(stamps), partial=True)


def open_stream(
    path: str | Path, window_size: int, start_id: int = 0
) -> Iterator[DataWindow]:
    """Windows from a file path, or stdin when path is '-'."""
    if str(path) == "-":
        source = StreamSource(StreamKind.STANDARD_INPUT, "<stdin>")
        yield from read_windows(sys.stdin, window_size, start_id, source)
        return
    source = StreamSource(StreamKind.FILE, str(path))
    with open(path) as fh:
        yield from read_windows(fh, window_size, start_id, source)


def write_stream(windows: Iterable[DataWindow], path: str | Path) -> None:
    """Serialise windows back into the record grammar (integer timestamps
    are synthesised when a window carries none)."""
    counter = 0
    with open(path, "w") as fh:
        for window in windows:
            stamps = window.timestamps
            for i, cell in enumerate(window.cells()):
                stamp = stamps[i] if stamps is not None else str(counter)
                token = "NA" if cell is None else repr(cell)
                fh.write(f"{stamp},{token}\n")
                counter += 1
