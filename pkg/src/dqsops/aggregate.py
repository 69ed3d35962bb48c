"""Consolidation of a dimension-score vector into one scalar.

The fitting matrix of per-window dimension scores is whitened column-wise
(z-scores with population statistics), then projected onto the first
principal component of its covariance. The fitted transform is frozen for
the lifetime of a deployment so that ground-truth scores keep one meaning
across chunks and retrains.

Sign convention: the loading vector is flipped, if necessary, so its entries
sum to a non-negative value. Higher dimension (badness) scores then push the
consolidated score upward.
"""

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import ConvergenceFailure, DimensionMismatch, ParseError, TooFewRows
from .model import DimensionScoreVector

POWER_ITERATION_TOL = 1e-10
POWER_ITERATION_MAX_STEPS = 10_000


def standardize_zscore(dq: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Whiten each column to mean 0 and population std 1.

    Constant columns map to all zeros instead of dividing by zero; their
    sigma is stored as 0 and the apply step treats them the same way.
    Returns (z, mu, sigma).
    """
    dq = np.asarray(dq, dtype=np.float64)
    if dq.ndim != 2:
        raise ValueError(f"expected a 2-d matrix (got ndim={dq.ndim})")
    if dq.shape[0] < 2:
        raise TooFewRows(f"need at least 2 rows to standardize (got {dq.shape[0]})")
    mu = dq.mean(axis=0)
    sigma = dq.std(axis=0)
    safe = np.where(sigma > 0, sigma, 1.0)
    z = (dq - mu) / safe
    z[:, sigma == 0] = 0.0
    return z, mu, sigma


def _fix_sign(v: np.ndarray) -> np.ndarray:
    total = float(v.sum())
    if total < 0:
        return -v
    if total == 0:
        for entry in v:
            if entry != 0:
                return v if entry > 0 else -v
    return v


def first_principal_component(z: np.ndarray) -> tuple[np.ndarray, float]:
    """Dominant eigenpair of the population covariance of z.

    Power iteration from a deterministic uniform start vector; converged when
    the residual ||cov v - lambda v||_inf drops below 1e-10.
    """
    z = np.asarray(z, dtype=np.float64)
    if z.ndim != 2 or z.shape[0] < 2 or z.shape[1] < 1:
        raise TooFewRows(f"need an (n>=2, m>=1) matrix (got shape {z.shape})")
    n, m = z.shape
    cov = (z.T @ z) / n
    v = np.full(m, 1.0 / np.sqrt(m))
    for _ in range(POWER_ITERATION_MAX_STEPS):
        w = cov @ v
        norm = float(np.linalg.norm(w))
        if norm == 0.0:
            # Zero covariance: every direction is an eigenvector with value 0.
            return _fix_sign(v), 0.0
        v_next = w / norm
        lam = float(v_next @ cov @ v_next)
        residual = float(np.abs(cov @ v_next - lam * v_next).max())
        v = v_next
        if residual <= POWER_ITERATION_TOL:
            return _fix_sign(v), lam
    raise ConvergenceFailure(
        f"power iteration missed tolerance {POWER_ITERATION_TOL} "
        f"after {POWER_ITERATION_MAX_STEPS} steps"
    )


@dataclass(frozen=True)
class Aggregator:
    """Frozen whitening parameters plus first-PC loadings."""

    dimension_order: tuple[str, ...]
    mu: np.ndarray
    sigma: np.ndarray
    loadings: np.ndarray
    eigenvalue: float

    def __post_init__(self):
        self.mu.setflags(write=False)
        self.sigma.setflags(write=False)
        self.loadings.setflags(write=False)

    @classmethod
    def fit(cls, dq: np.ndarray, dimension_order: tuple[str, ...]) -> "Aggregator":
        dq = np.asarray(dq, dtype=np.float64)
        m = len(dimension_order)
        if dq.ndim != 2 or dq.shape[1] != m:
            raise ValueError(
                f"score matrix must have {m} columns (got shape {dq.shape})"
            )
        if dq.shape[0] < 2 * m:
            raise TooFewRows(
                f"need at least {2 * m} rows to fit {m} dimensions (got {dq.shape[0]})"
            )
        z, mu, sigma = standardize_zscore(dq)
        loadings, eigenvalue = first_principal_component(z)
        return cls(
            dimension_order=tuple(dimension_order),
            mu=mu,
            sigma=sigma,
            loadings=loadings,
            eigenvalue=eigenvalue,
        )

    def whiten(self, scores: np.ndarray) -> np.ndarray:
        """Apply the stored per-dimension z-transform to one score row."""
        safe = np.where(self.sigma > 0, self.sigma, 1.0)
        z = (scores - self.mu) / safe
        z[self.sigma == 0] = 0.0
        return z

    def consolidate(self, vector: DimensionScoreVector) -> float:
        if vector.dimension_order != self.dimension_order:
            raise DimensionMismatch(
                f"vector order {vector.dimension_order} != "
                f"fitted order {self.dimension_order}"
            )
        return float(self.whiten(vector.as_array()) @ self.loadings)

    def consolidate_matrix(self, dq: np.ndarray) -> np.ndarray:
        """Consolidated scores for every row of a score matrix."""
        dq = np.asarray(dq, dtype=np.float64)
        safe = np.where(self.sigma > 0, self.sigma, 1.0)
        z = (dq - self.mu) / safe
        z[:, self.sigma == 0] = 0.0
        return z @ self.loadings


def save_aggregator(agg: Aggregator, path: str | Path) -> None:
    """Five lines: dimension order, mu, sigma, loadings, eigenvalue."""
    lines = [
        ", ".join(agg.dimension_order),
        ", ".join(repr(float(v)) for v in agg.mu),
        ", ".join(repr(float(v)) for v in agg.sigma),
        ", ".join(repr(float(v)) for v in agg.loadings),
        repr(float(agg.eigenvalue)),
    ]
    Path(path).write_text("\n".join(lines) + "\n")


def load_aggregator(path: str | Path) -> Aggregator:
    lines = Path(path).read_text().splitlines()
    try:
        order = tuple(tok.strip() for tok in lines[0].split(","))
        mu = np.array([float(v) for v in lines[1].split(",")])
        sigma = np.array([float(v) for v in lines[2].split(",")])
        loadings = np.array([float(v) for v in lines[3].split(",")])
        eigenvalue = float(lines[4])
    except (IndexError, ValueError) as exc:
        raise ParseError(f"malformed aggregator file: {exc}") from exc
    return Aggregator(
        dimension_order=order, mu=mu, sigma=sigma,
        loadings=loadings, eigenvalue=eigenvalue,
    )
