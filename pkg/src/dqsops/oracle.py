"""Test oracle metrics comparing predicted against ground-truth scores.

MAE drives the retrain decision; R-squared and the coefficient of variation
of the absolute errors are reported for dashboards.
"""

from dataclasses import dataclass

import numpy as np

from .errors import EmptyEvaluation


@dataclass(frozen=True)
class OracleReport:
    mae: float
    r2: float | None  # None when the true scores have zero variance
    n_evaluated: int
    cv_of_errors: float


def evaluate_oracle(y_true: np.ndarray, y_pred: np.ndarray) -> OracleReport:
    """MAE, R-squared, and error dispersion for paired scores.

    MAE is the mean absolute error. R-squared is 1 minus the ratio of the
    squared prediction error to the squared deviation from the true mean,
    reported as None when the true values have no variance. cv_of_errors is
    std/mean of the absolute errors (0 when the mean error is 0).
    """
    y_true = np.asarray(y_true, dtype=np.float64)
    y_pred = np.asarray(y_pred, dtype=np.float64)
    if y_true.size == 0:
        raise EmptyEvaluation("no prediction pairs to evaluate")
    if y_true.shape != y_pred.shape:
        raise ValueError(f"shape mismatch: {y_true.shape} vs {y_pred.shape}")

    errors = np.abs(y_true - y_pred)
    mae = float(errors.mean())

    ss_res = float(((y_true - y_pred) ** 2).sum())
    ss_tot = float(((y_true - y_true.mean()) ** 2).sum())
    r2 = None if ss_tot == 0.0 else 1.0 - ss_res / ss_tot

    mean_err = float(errors.mean())
    cv = 0.0 if mean_err == 0.0 else float(errors.std()) / mean_err

    return OracleReport(mae=mae, r2=r2, n_evaluated=int(y_true.size), cv_of_errors=cv)
