"""Robust z-score anomaly detector backing the accuracy dimension.

Fitted once on clean data: a value is anomalous when its absolute deviation
from the training median exceeds threshold_k scaled median-absolute-deviations.
The 1.4826 factor calibrates the MAD to the standard deviation of a normal
distribution and is deliberately not configurable.
"""

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import DegenerateData, InsufficientData, ParseError

MAD_CONSISTENCY = 1.4826
MIN_FIT_VALUES = 30


@dataclass(frozen=True)
class AnomalyDetector:
    median: float
    mad_scaled: float
    threshold_k: float

    @classmethod
    def fit(cls, clean_values: np.ndarray, k: float) -> "AnomalyDetector":
        values = np.asarray(clean_values, dtype=np.float64)
        if values.size < MIN_FIT_VALUES:
            raise InsufficientData(
                f"need at least {MIN_FIT_VALUES} values to fit (got {values.size})"
            )
        if k <= 0:
            raise ValueError(f"threshold k must be > 0 (got {k})")
        median = float(np.median(values))
        mad = float(np.median(np.abs(values - median)))
        if mad == 0.0:
            raise DegenerateData("median absolute deviation is zero")
        return cls(median=median, mad_scaled=MAD_CONSISTENCY * mad, threshold_k=k)

    def is_anomalous(self, x: float) -> bool:
        return abs(x - self.median) / self.mad_scaled > self.threshold_k

    def flag_anomalies(self, values: np.ndarray) -> np.ndarray:
        """Vectorised is_anomalous over an array of values."""
        values = np.asarray(values, dtype=np.float64)
        return np.abs(values - self.median) / self.mad_scaled > self.threshold_k


def save_detector(detector: AnomalyDetector, path: str | Path) -> None:
    """Three lines: median, scaled MAD, threshold."""
    Path(path).write_text(
        f"{detector.median!r}\n{detector.mad_scaled!r}\n{detector.threshold_k!r}\n"
    )


def load_detector(path: str | Path) -> AnomalyDetector:
    lines = Path(path).read_text().splitlines()
    try:
        median, mad_scaled, k = (float(lines[i]) for i in range(3))
    except (IndexError, ValueError) as exc:
        raise ParseError(f"malformed detector file: {exc}") from exc
    return AnomalyDetector(median=median, mad_scaled=mad_scaled, threshold_k=k)
