"""Core value types: data windows, score vectors, and persisted score records.

A window stores its samples as a float array plus an explicit missing mask.
Missing cells are a tagged state, never a sentinel value in the float channel;
NaN is reserved for signalling computation errors.
"""

from dataclasses import dataclass
from enum import Enum
from typing import Iterable, Sequence

import numpy as np

#: Canonical dimension names in their canonical column order. The enabled
#: subset and its order come from the configuration; persisted score rows
#: always carry one slot per canonical dimension.
DIMENSION_NAMES = ("accuracy", "completeness", "consistency", "timeliness", "skewness")


class ScoreMethod(Enum):
    """Which scoring path produced a consolidated score."""

    STANDARD = "Standard"
    PREDICTED = "Predicted"

    @property
    def label(self) -> str:
        return self.value


class DataWindow:
    """One fixed-size slice of a univariate stream.

    Attributes:
        window_id: Unique, strictly increasing within one run.
        values: Float array of length n; entries under the missing mask are
            zeroed and must not be read.
        missing: Boolean mask, True where the cell is missing.
        timestamps: Optional per-cell timestamp tokens (opaque strings).
        partial: True only for a trailing window shorter than the configured
            window size.
    """

    __slots__ = ("window_id", "values", "missing", "timestamps", "partial")

    def __init__(
        self,
        window_id: int,
        values: np.ndarray,
        missing: np.ndarray,
        timestamps: tuple[str, ...] | None = None,
        partial: bool = False,
    ):
        values = np.asarray(values, dtype=np.float64)
        missing = np.asarray(missing, dtype=bool)
        if values.ndim != 1 or values.shape != missing.shape:
            raise ValueError("values and missing must be 1-d arrays of equal length")
        if values.size == 0:
            raise ValueError("a data window must contain at least one cell")
        if timestamps is not None and len(timestamps) != values.size:
            raise ValueError("timestamps length must match values length")
        # Zero out masked slots so equal windows are bitwise equal.
        if missing.any():
            values = values.copy()
            values[missing] = 0.0
        values.setflags(write=False)
        missing.setflags(write=False)
        self.window_id = window_id
        self.values = values
        self.missing = missing
        self.timestamps = timestamps
        self.partial = partial

    @classmethod
    def from_cells(
        cls,
        window_id: int,
        cells: Iterable[float | None],
        timestamps: tuple[str, ...] | None = None,
        partial: bool = False,
    ) -> "DataWindow":
        """Build a window from a sequence where None marks a missing cell."""
        cell_list = list(cells)
        missing = np.array([c is None for c in cell_list], dtype=bool)
        values = np.array([0.0 if c is None else float(c) for c in cell_list])
        return cls(window_id, values, missing, timestamps, partial)

    @property
    def n(self) -> int:
        return int(self.values.size)

    @property
    def n_missing(self) -> int:
        return int(np.count_nonzero(self.missing))

    @property
    def valid_values(self) -> np.ndarray:
        """Non-missing samples, in stream order."""
        if not self.missing.any():
            return self.values
        return self.values[~self.missing]

    def cells(self) -> tuple[float | None, ...]:
        return tuple(
            None if m else float(v) for v, m in zip(self.values, self.missing)
        )

    def __eq__(self, other) -> bool:
        if not isinstance(other, DataWindow):
            return NotImplemented
        return (
            self.window_id == other.window_id
            and self.partial == other.partial
            and self.timestamps == other.timestamps
            and np.array_equal(self.missing, other.missing)
            and np.array_equal(self.values, other.values)
        )

    def __repr__(self) -> str:
        return (
            f"DataWindow(id={self.window_id}, n={self.n}, "
            f"missing={self.n_missing}, partial={self.partial})"
        )


@dataclass(frozen=True)
class DimensionScoreVector:
    """Per-dimension quality scores for one window, each in [0, 1].

    Higher means worse quality. Key order is the configured dimension order
    and doubles as the aggregator column order.
    """

    window_id: int
    scores: dict[str, float]

    def __post_init__(self):
        for name, value in self.scores.items():
            if not (0.0 <= value <= 1.0):
                raise ValueError(f"score '{name}' = {value!r} is outside [0, 1]")

    @property
    def dimension_order(self) -> tuple[str, ...]:
        return tuple(self.scores.keys())

    def as_array(self) -> np.ndarray:
        return np.array(list(self.scores.values()), dtype=np.float64)


@dataclass(frozen=True)
class ConsolidatedScore:
    """A single window-quality scalar, in first-PC standard deviations."""

    window_id: int
    value: float
    method: ScoreMethod


@dataclass(frozen=True)
class ScoreRecord:
    """One persisted repository row.

    Standard records always carry the full dimension-score vector; predicted
    records never do.
    """

    window_id: int
    wall_clock: str
    method: ScoreMethod
    dimension_scores: DimensionScoreVector | None
    consolidated: float
    scoring_duration: float

    def __post_init__(self):
        if self.method is ScoreMethod.STANDARD and self.dimension_scores is None:
            raise ValueError("Standard records must carry dimension scores")


def score_matrix(vectors: Sequence[DimensionScoreVector]) -> np.ndarray:
    """Stack score vectors into an (n_windows, n_dimensions) matrix."""
    if not vectors:
        return np.empty((0, 0))
    order = vectors[0].dimension_order
    rows = []
    for v in vectors:
        if v.dimension_order != order:
            raise ValueError("inconsistent dimension order across score vectors")
        rows.append(v.as_array())
    return np.vstack(rows)
