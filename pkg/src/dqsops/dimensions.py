"""Per-dimension quality scores for one data window.

Every dimension maps to a score in [0, 1] where higher means worse:

* accuracy: fraction of window cells flagged anomalous,
* completeness: fraction of missing cells,
* consistency: fraction of cells outside the integrity bounds,
* timeliness: two-sample Kolmogorov-Smirnov distance to a clean reference
  sample,
* skewness: Jensen-Shannon divergence between the window histogram and a
  clean reference histogram.

All entropy terms use the base-2 logarithm so the divergence is bounded by 1.
Missing cells participate only in the completeness score; the remaining
scorers operate on the non-missing values. A window with no valid values
gets the worst score (1.0) for timeliness and skewness.
"""

import time
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .anomaly import AnomalyDetector
from .config import PipelineConfig
from .errors import (
    EmptySample,
    InvalidDistribution,
    LengthMismatch,
    MissingMetaInformation,
    ParseError,
)
from .model import DataWindow, DimensionScoreVector

_SUM_TOLERANCE = 1e-9


@dataclass(frozen=True)
class ReferenceDistribution:
    """Clean-data reference used by the timeliness and skewness scorers.

    sample is sorted ascending; histogram is a probability vector over
    equal-width bins spanning value_range.
    """

    sample: np.ndarray
    histogram: np.ndarray
    value_range: tuple[float, float]

    def __post_init__(self):
        if self.sample.size == 0:
            raise ValueError("reference sample must not be empty")
        if abs(float(self.histogram.sum()) - 1.0) > 1e-12:
            raise ValueError("reference histogram must sum to 1 within 1e-12")
        if (self.histogram < 0).any():
            raise ValueError("reference histogram must be non-negative")
        self.sample.setflags(write=False)
        self.histogram.setflags(write=False)

    @property
    def bins(self) -> int:
        return int(self.histogram.size)


def build_reference(
    clean_values: np.ndarray,
    bins: int,
    value_range: tuple[float, float],
    max_sample: int,
) -> ReferenceDistribution:
    """Fit the reference from pooled clean values.

    The histogram uses every value. The stored sample is decimated to at
    most max_sample evenly spaced order statistics so the artifact stays
    bounded while preserving the empirical distribution shape.
    """
    clean_values = np.asarray(clean_values, dtype=np.float64)
    if clean_values.size == 0:
        raise EmptySample("cannot build a reference from no values")
    hist = histogram(clean_values, bins, value_range)
    sample = np.sort(clean_values)
    if sample.size > max_sample:
        idx = (np.arange(max_sample) * sample.size) // max_sample
        sample = sample[idx]
    return ReferenceDistribution(sample=sample, histogram=hist, value_range=value_range)


def save_reference(ref: ReferenceDistribution, path: str | Path) -> None:
    """Two-section text layout: sample values, then the histogram.

    Line 1:  ``sample <count>`` followed by one value per line.
    Then:    ``histogram <bins> <lo> <hi>`` followed by one probability per
             line.
    """
    lines = [f"sample {ref.sample.size}"]
    lines += [repr(float(v)) for v in ref.sample]
    lo, hi = ref.value_range
    lines.append(f"histogram {ref.bins} {lo!r} {hi!r}")
    lines += [repr(float(p)) for p in ref.histogram]
    Path(path).write_text("\n".join(lines) + "\n")


def load_reference(path: str | Path) -> ReferenceDistribution:
    lines = Path(path).read_text().splitlines()
    try:
        head = lines[0].split()
        if head[0] != "sample":
            raise ParseError("expected 'sample <count>' header", 1)
        count = int(head[1])
        sample = np.array([float(v) for v in lines[1 : 1 + count]])
        hist_head = lines[1 + count].split()
        if hist_head[0] != "histogram":
            raise ParseError("expected 'histogram <bins> <lo> <hi>'", 2 + count)
        bins = int(hist_head[1])
        lo, hi = float(hist_head[2]), float(hist_head[3])
        hist = np.array([float(v) for v in lines[2 + count : 2 + count + bins]])
    except (IndexError, ValueError) as exc:
        raise ParseError(f"malformed reference file: {exc}") from exc
    return ReferenceDistribution(sample=sample, histogram=hist, value_range=(lo, hi))


@dataclass(frozen=True)
class MetaInformation:
    """Fitted artifacts the standard scorers need at run time."""

    detector: AnomalyDetector | None = None
    reference: ReferenceDistribution | None = None


def ks_statistic(x: np.ndarray, y: np.ndarray) -> float:
    """Two-sample Kolmogorov-Smirnov statistic.

    The supremum distance between the two empirical CDFs, evaluated over the
    combined sample. Symmetric, and in [0, 1].
    """
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if x.size == 0 or y.size == 0:
        raise EmptySample("ks_statistic requires two non-empty samples")
    return _ks_presorted(np.sort(x), np.sort(y))


def _ks_presorted(xs: np.ndarray, ys: np.ndarray) -> float:
    z = np.concatenate([xs, ys])
    f1 = np.searchsorted(xs, z, side="right") / xs.size
    f2 = np.searchsorted(ys, z, side="right") / ys.size
    return float(np.abs(f1 - f2).max())


def histogram(
    values: np.ndarray, bins: int, value_range: tuple[float, float]
) -> np.ndarray:
    """Equal-width probability histogram with clamped edge bins.

    Values below the range fall into the first bin and values above into the
    last, so drifted data registers as divergence instead of disappearing.
    """
    values = np.asarray(values, dtype=np.float64)
    if values.size == 0:
        raise EmptySample("histogram requires at least one value")
    if bins < 2:
        raise ValueError(f"bins must be >= 2 (got {bins})")
    lo, hi = value_range
    if not lo < hi:
        raise ValueError(f"range must satisfy lo < hi (got {lo} >= {hi})")
    width = (hi - lo) / bins
    # Clip first so extreme values cannot overflow the index arithmetic.
    clipped = np.clip(values, lo, hi)
    idx = np.floor((clipped - lo) / width).astype(np.int64)
    np.clip(idx, 0, bins - 1, out=idx)
    counts = np.bincount(idx, minlength=bins)
    return counts / values.size


def _check_distribution(p: np.ndarray, name: str) -> np.ndarray:
    p = np.asarray(p, dtype=np.float64)
    if (p < 0).any():
        raise InvalidDistribution(f"{name} has a negative entry")
    if abs(float(p.sum()) - 1.0) > _SUM_TOLERANCE:
        raise InvalidDistribution(f"{name} sums to {float(p.sum())!r}, not 1")
    return p


def shannon_entropy(p: np.ndarray) -> float:
    """Base-2 Shannon entropy; zero-probability terms contribute nothing."""
    p = _check_distribution(p, "p")
    nz = p[p > 0]
    return float(-(nz * np.log2(nz)).sum())


def jensen_shannon_divergence(p: np.ndarray, q: np.ndarray) -> float:
    """Symmetric divergence in [0, 1]: H((p+q)/2) - (H(p) + H(q)) / 2."""
    p = np.asarray(p, dtype=np.float64)
    q = np.asarray(q, dtype=np.float64)
    if p.shape != q.shape:
        raise LengthMismatch(f"length {p.size} vs {q.size}")
    p = _check_distribution(p, "p")
    q = _check_distribution(q, "q")
    jsd = shannon_entropy((p + q) / 2.0) - (shannon_entropy(p) + shannon_entropy(q)) / 2.0
    # Rounding can push an exact zero a hair negative.
    return max(jsd, 0.0)


def normalize_minmax(raw: float, lo: float, hi: float) -> float:
    """Scale raw into [0, 1] against the bounds and clamp."""
    if not lo < hi:
        raise ValueError(f"bounds must satisfy lo < hi (got {lo} >= {hi})")
    return min(max((raw - lo) / (hi - lo), 0.0), 1.0)


def score_accuracy(window: DataWindow, detector: AnomalyDetector) -> float:
    """Fraction of window cells whose value the detector flags as anomalous."""
    valid = window.valid_values
    if valid.size == 0:
        return 0.0
    flagged = int(detector.flag_anomalies(valid).sum())
    return flagged / window.n


def score_completeness(window: DataWindow) -> float:
    """Fraction of missing cells."""
    return window.n_missing / window.n


def score_consistency(window: DataWindow, lo: float, hi: float) -> float:
    """Fraction of cells whose value falls outside [lo, hi]."""
    if not lo < hi:
        raise ValueError(f"bounds must satisfy lo < hi (got {lo} >= {hi})")
    valid = window.valid_values
    if valid.size == 0:
        return 0.0
    violations = int(((valid < lo) | (valid > hi)).sum())
    return violations / window.n


def score_timeliness(window: DataWindow, ref: ReferenceDistribution) -> float:
    """KS distance between the window values and the clean reference sample."""
    valid = window.valid_values
    if valid.size == 0:
        raise EmptySample("window has no valid values")
    return _ks_presorted(np.sort(valid), ref.sample)


def score_skewness(
    window: DataWindow, ref: ReferenceDistribution, cfg: PipelineConfig
) -> float:
    """Divergence between the window histogram and the reference histogram."""
    valid = window.valid_values
    if valid.size == 0:
        raise EmptySample("window has no valid values")
    window_hist = histogram(valid, ref.bins, ref.value_range)
    return jensen_shannon_divergence(window_hist, ref.histogram)


def score_all_dimensions(
    window: DataWindow,
    meta: MetaInformation,
    cfg: PipelineConfig,
    timings: dict[str, float] | None = None,
) -> DimensionScoreVector:
    """Run every enabled scorer and assemble the score vector.

    Each raw score is already bounded by [0, 1], so the min-max step reduces
    to a clamp against those theoretical bounds. When ``timings`` is given,
    per-dimension wall times in seconds are written into it.
    """
    scores: dict[str, float] = {}
    for name in cfg.enabled_dimensions:
        start = time.perf_counter()
        if name == "accuracy":
            if meta.detector is None:
                raise MissingMetaInformation("accuracy", "a fitted anomaly detector")
            raw = score_accuracy(window, meta.detector)
        elif name == "completeness":
            raw = score_completeness(window)
        elif name == "consistency":
            raw = score_consistency(window, cfg.integrity_min, cfg.integrity_max)
        elif name == "timeliness":
            if meta.reference is None:
                raise MissingMetaInformation("timeliness", "a reference distribution")
            try:
                raw = score_timeliness(window, meta.reference)
            except EmptySample:
                raw = 1.0  # a vanished signal is maximally untimely
        elif name == "skewness":
            if meta.reference is None:
                raise MissingMetaInformation("skewness", "a reference distribution")
            try:
                raw = score_skewness(window, meta.reference, cfg)
            except EmptySample:
                raw = 1.0
        else:  # pragma: no cover - config validation rejects unknown names
            raise MissingMetaInformation(name, "a scorer implementation")
        scores[name] = normalize_minmax(raw, 0.0, 1.0)
        if timings is not None:
            timings[name] = time.perf_counter() - start
    return DimensionScoreVector(window_id=window.window_id, scores=scores)
