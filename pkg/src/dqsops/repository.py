"""Append-only persistence: score repository, training store, evaluation log.

Score repository rows are comma-separated with one slot per canonical
dimension::

    window_id,wall_clock_iso8601,method,s_accuracy,s_completeness,
    s_consistency,s_timeliness,s_skewness,consolidated,scoring_duration_seconds

Absent dimension scores (predicted rows, or disabled dimensions) serialize
as empty fields. Floats are written with repr so parsing them back is exact.

In canonical mode the wall-clock and duration columns are replaced with
fixed values so two identical runs produce byte-identical files.
"""

from dataclasses import dataclass
from datetime import datetime, timezone
from pathlib import Path
from typing import Iterator

import numpy as np

from .errors import ParseError
from .features import FEATURE_NAMES
from .model import DIMENSION_NAMES, DimensionScoreVector, ScoreMethod, ScoreRecord

CANONICAL_WALL_CLOCK = "1970-01-01T00:00:00+00:00"


def _now_iso() -> str:
    return datetime.now(timezone.utc).isoformat()


def format_record(record: ScoreRecord) -> str:
    slots = {name: "" for name in DIMENSION_NAMES}
    if record.dimension_scores is not None:
        for name, value in record.dimension_scores.scores.items():
            slots[name] = repr(value)
    fields = [
        str(record.window_id),
        record.wall_clock,
        record.method.label,
        *[slots[name] for name in DIMENSION_NAMES],
        repr(record.consolidated),
        repr(record.scoring_duration),
    ]
    return ",".join(fields)


def parse_record(line: str, line_number: int | None = None) -> ScoreRecord:
    parts = line.split(",")
    if len(parts) != 10:
        raise ParseError(f"expected 10 fields, got {len(parts)}", line_number)
    try:
        window_id = int(parts[0])
        method = ScoreMethod(parts[2])
        scores = {
            name: float(tok)
            for name, tok in zip(DIMENSION_NAMES, parts[3:8])
            if tok != ""
        }
        vector = (
            DimensionScoreVector(window_id=window_id, scores=scores) if scores else None
        )
        return ScoreRecord(
            window_id=window_id,
            wall_clock=parts[1],
            method=method,
            dimension_scores=vector,
            consolidated=float(parts[8]),
            scoring_duration=float(parts[9]),
        )
    except (ValueError, KeyError) as exc:
        raise ParseError(f"malformed record: {exc}", line_number) from exc


class RepositoryWriter:
    """Appends score records to a repository file as they are produced."""

    def __init__(self, path: str | Path, canonical: bool = False):
        self.path = Path(path)
        self.canonical = canonical
        self._fh = open(self.path, "w")

    def append(
        self,
        window_id: int,
        method: ScoreMethod,
        consolidated: float,
        duration: float,
        dimension_scores: DimensionScoreVector | None = None,
    ) -> ScoreRecord:
        record = ScoreRecord(
            window_id=window_id,
            wall_clock=CANONICAL_WALL_CLOCK if self.canonical else _now_iso(),
            method=method,
            dimension_scores=dimension_scores,
            consolidated=consolidated,
            scoring_duration=0.0 if self.canonical else duration,
        )
        self._fh.write(format_record(record) + "\n")
        return record

    def close(self) -> None:
        self._fh.close()

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()


def read_records(path: str | Path) -> Iterator[ScoreRecord]:
    with open(path) as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.rstrip("\n")
            if line:
                yield parse_record(line, lineno)


class TrainingStore:
    """Ground-truth training rows: window id, feature vector, target.

    The score repository records scores but not features, so retraining
    reads from this sidecar file instead. One row per standard-scored
    window, comma separated.
    """

    def __init__(self, path: str | Path):
        self.path = Path(path)

    def append(self, window_id: int, features: np.ndarray, target: float) -> None:
        fields = [str(window_id)] + [repr(float(v)) for v in features] + [repr(target)]
        with open(self.path, "a") as fh:
            fh.write(",".join(fields) + "\n")

    def write_all(self, rows: list[tuple[int, np.ndarray, float]]) -> None:
        with open(self.path, "w") as fh:
            for window_id, features, target in rows:
                fields = (
                    [str(window_id)]
                    + [repr(float(v)) for v in features]
                    + [repr(float(target))]
                )
                fh.write(",".join(fields) + "\n")

    def load(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Returns (window_ids, features matrix, targets)."""
        ids, rows, targets = [], [], []
        expected = 2 + len(FEATURE_NAMES)
        with open(self.path) as fh:
            for lineno, line in enumerate(fh, start=1):
                line = line.strip()
                if not line:
                    continue
                parts = line.split(",")
                if len(parts) != expected:
                    raise ParseError(
                        f"expected {expected} fields, got {len(parts)}", lineno
                    )
                ids.append(int(parts[0]))
                rows.append([float(v) for v in parts[1:-1]])
                targets.append(float(parts[-1]))
        return (
            np.array(ids, dtype=np.int64),
            np.array(rows, dtype=np.float64),
            np.array(targets, dtype=np.float64),
        )


@dataclass(frozen=True)
class EvalLogEntry:
    chunk_index: int
    n: int
    mae: float
    r2: float | None
    cv: float
    decision: str


class EvalLog:
    """Append-only oracle and retrain log: chunk, n, MAE, R2, CV, decision."""

    def __init__(self, path: str | Path):
        self.path = Path(path)
        self._fh = open(self.path, "w")

    def append(self, entry: EvalLogEntry) -> None:
        r2 = "" if entry.r2 is None else repr(entry.r2)
        self._fh.write(
            f"{entry.chunk_index},{entry.n},{entry.mae!r},{r2},"
            f"{entry.cv!r},{entry.decision}\n"
        )

    def close(self) -> None:
        self._fh.close()

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()


def read_eval_log(path: str | Path) -> list[EvalLogEntry]:
    entries = []
    with open(path) as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            parts = line.split(",")
            if len(parts) != 6:
                raise ParseError(f"expected 6 fields, got {len(parts)}", lineno)
            entries.append(
                EvalLogEntry(
                    chunk_index=int(parts[0]),
                    n=int(parts[1]),
                    mae=float(parts[2]),
                    r2=None if parts[3] == "" else float(parts[3]),
                    cv=float(parts[4]),
                    decision=parts[5],
                )
            )
    return entries
