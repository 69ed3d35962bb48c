"""Cheap window features feeding the surrogate model.

The layout is fixed and versioned: a model trained against one layout
refuses to predict against another. Extraction cost is O(N log N) in the
window size (one sort) and does not depend on how many quality dimensions
the pipeline has enabled.
"""

import hashlib

import numpy as np

from .config import PipelineConfig
from .model import DataWindow

FEATURE_NAMES = (
    "missing_fraction",
    "count_valid",
    "mean",
    "std",
    "min",
    "max",
    "q25",
    "q50",
    "q75",
    "third_standardized_moment",
    "fourth_standardized_moment",
    "fraction_below_lo",
    "fraction_above_hi",
)

FEATURE_VERSION = hashlib.sha1(",".join(FEATURE_NAMES).encode()).hexdigest()[:12]


def _quantile_sorted(s: np.ndarray, q: float) -> float:
    """Linear-interpolation quantile of an ascending array."""
    if s.size == 1:
        return float(s[0])
    pos = q * (s.size - 1)
    lo = int(pos)
    frac = pos - lo
    if frac == 0.0:
        return float(s[lo])
    return float(s[lo] + (s[lo + 1] - s[lo]) * frac)


def extract_features(window: DataWindow, cfg: PipelineConfig) -> np.ndarray:
    """13 summary statistics over the non-missing values.

    Degenerate windows stay finite: with no valid values every statistic is
    filled with 0 (missing_fraction is 1), and the standardized moments are
    0 whenever the std is 0. Fractions use the full window size as the
    denominator.
    """
    n = window.n
    valid = window.valid_values
    out = np.zeros(len(FEATURE_NAMES))
    out[0] = window.n_missing / n
    out[1] = valid.size
    if valid.size == 0:
        return out
    s = np.sort(valid)
    mean = float(s.mean())
    std = float(s.std())
    out[2] = mean
    out[3] = std
    out[4] = s[0]
    out[5] = s[-1]
    out[6] = _quantile_sorted(s, 0.25)
    out[7] = _quantile_sorted(s, 0.50)
    out[8] = _quantile_sorted(s, 0.75)
    if std > 0:
        zs = (s - mean) / std
        zs2 = zs * zs
        out[9] = float((zs2 * zs).mean())
        out[10] = float((zs2 * zs2).mean())
    # Tail counts from the sorted array instead of full comparisons.
    out[11] = int(np.searchsorted(s, cfg.integrity_min, side="left")) / n
    out[12] = (s.size - int(np.searchsorted(s, cfg.integrity_max, side="right"))) / n
    return out
