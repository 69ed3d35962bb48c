"""Regression-tree ensemble predicting the consolidated score from features.

A bagged forest of axis-aligned binary trees: each tree trains on a
bootstrap resample, each split considers a random feature subset of size
ceil(sqrt(n_features)) and minimizes the summed squared error of the two
children, and each leaf predicts the mean of its targets. The ensemble
prediction is the mean over trees, so it can never leave the range of the
training targets. Training is deterministic given the seed.

Trees are stored as flat parallel node arrays, which makes single-window
prediction a handful of vectorised index hops per tree level.
"""

import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import (
    DegenerateTarget,
    FeatureVersionMismatch,
    InsufficientTrainingData,
    ParseError,
)
from .features import FEATURE_VERSION

MIN_TRAINING_RECORDS = 20
_LEAF = -1


class _TreeBuilder:
    def __init__(self, max_depth: int, min_samples_leaf: int, mtry: int):
        self.max_depth = max_depth
        self.min_leaf = min_samples_leaf
        self.mtry = mtry
        self.feature: list[int] = []
        self.threshold: list[float] = []
        self.left: list[int] = []
        self.right: list[int] = []
        self.value: list[float] = []

    def _new_node(self) -> int:
        self.feature.append(_LEAF)
        self.threshold.append(0.0)
        self.left.append(_LEAF)
        self.right.append(_LEAF)
        self.value.append(0.0)
        return len(self.feature) - 1

    def build(self, X: np.ndarray, y: np.ndarray, rng: np.random.Generator) -> int:
        return self._grow(X, y, depth=0, rng=rng)

    def _grow(self, X: np.ndarray, y: np.ndarray, depth: int, rng) -> int:
        node = self._new_node()
        self.value[node] = float(y.mean())
        k = y.size
        if depth >= self.max_depth or k < 2 * self.min_leaf or np.ptp(y) == 0.0:
            return node
        split = self._best_split(X, y, rng)
        if split is None:
            return node
        feat, thr = split
        go_left = X[:, feat] <= thr
        self.feature[node] = feat
        self.threshold[node] = thr
        self.left[node] = self._grow(X[go_left], y[go_left], depth + 1, rng)
        self.right[node] = self._grow(X[~go_left], y[~go_left], depth + 1, rng)
        return node

    def _best_split(self, X, y, rng) -> tuple[int, float] | None:
        k = y.size
        best_sse = math.inf
        best: tuple[int, float] | None = None
        features = rng.choice(X.shape[1], size=self.mtry, replace=False)
        sizes = np.arange(self.min_leaf, k - self.min_leaf + 1)
        for feat in features:
            order = np.argsort(X[:, feat], kind="stable")
            xs = X[order, feat]
            ys = y[order]
            csum = np.cumsum(ys)
            csq = np.cumsum(ys * ys)
            left_n = sizes
            valid = xs[left_n - 1] < xs[left_n]
            if not valid.any():
                continue
            lsum = csum[left_n - 1]
            lsq = csq[left_n - 1]
            rsum = csum[-1] - lsum
            rsq = csq[-1] - lsq
            sse = (lsq - lsum * lsum / left_n) + (rsq - rsum * rsum / (k - left_n))
            sse = np.where(valid, sse, math.inf)
            pos = int(np.argmin(sse))
            if sse[pos] < best_sse:
                best_sse = float(sse[pos])
                cut = left_n[pos]
                best = (int(feat), float((xs[cut - 1] + xs[cut]) / 2.0))
        return best


@dataclass
class SurrogateModel:
    """Trained forest plus everything needed to reproduce or persist it."""

    n_trees: int
    max_depth: int
    min_samples_leaf: int
    train_seed: int
    feature_version: str
    roots: np.ndarray
    feature: np.ndarray
    threshold: np.ndarray
    left: np.ndarray
    right: np.ndarray
    value: np.ndarray

    def __post_init__(self):
        # Traversal arrays: leaves self-loop with a +inf threshold, so the
        # descent needs no per-level leaf masking.
        n = self.feature.size
        self._step_feature = np.where(self.feature >= 0, self.feature, 0)
        self._step_threshold = np.where(
            self.feature >= 0, self.threshold, np.inf
        )
        nodes = np.arange(n, dtype=np.int64)
        self._step_left = np.where(self.feature >= 0, self.left, nodes)
        self._step_right = np.where(self.feature >= 0, self.right, nodes)

    def _check_version(self) -> None:
        if self.feature_version != FEATURE_VERSION:
            raise FeatureVersionMismatch(
                f"model built for feature layout {self.feature_version}, "
                f"runtime layout is {FEATURE_VERSION}"
            )

    def predict(self, features: np.ndarray) -> float:
        """Score one feature vector: the mean of the tree outputs."""
        self._check_version()
        idx = self.roots
        for _ in range(self.max_depth):
            go_right = features[self._step_feature[idx]] > self._step_threshold[idx]
            idx = np.where(go_right, self._step_right[idx], self._step_left[idx])
        return float(self.value[idx].mean())

    def predict_batch(self, X: np.ndarray) -> np.ndarray:
        """Vectorised prediction over an (n_samples, n_features) matrix."""
        self._check_version()
        X = np.asarray(X, dtype=np.float64)
        idx = np.tile(self.roots, (X.shape[0], 1))
        rows = np.arange(X.shape[0])[:, None]
        for _ in range(self.max_depth):
            go_right = X[rows, self._step_feature[idx]] > self._step_threshold[idx]
            idx = np.where(go_right, self._step_right[idx], self._step_left[idx])
        return self.value[idx].mean(axis=1)


def train(
    X: np.ndarray,
    y: np.ndarray,
    *,
    n_trees: int = 50,
    max_depth: int = 8,
    min_samples_leaf: int = 5,
    seed: int = 0,
    bootstrap: bool = True,
) -> SurrogateModel:
    """Fit the forest on (features, ground-truth consolidated score) pairs."""
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if X.ndim != 2 or X.shape[0] != y.size:
        raise ValueError(f"X {X.shape} and y {y.shape} do not line up")
    if y.size < MIN_TRAINING_RECORDS:
        raise InsufficientTrainingData(
            f"need at least {MIN_TRAINING_RECORDS} records (got {y.size})"
        )
    if np.ptp(y) == 0.0:
        raise DegenerateTarget("all training targets are identical")

    rng = np.random.default_rng(seed)
    mtry = math.isqrt(X.shape[1])
    if mtry * mtry < X.shape[1]:
        mtry += 1
    n = y.size

    roots: list[int] = []
    feature: list[int] = []
    threshold: list[float] = []
    left: list[int] = []
    right: list[int] = []
    value: list[float] = []
    for _ in range(n_trees):
        rows = rng.integers(0, n, size=n) if bootstrap else np.arange(n)
        builder = _TreeBuilder(max_depth, min_samples_leaf, mtry)
        builder.build(X[rows], y[rows], rng)
        offset = len(feature)
        roots.append(offset)
        feature += builder.feature
        threshold += builder.threshold
        left += [c if c == _LEAF else c + offset for c in builder.left]
        right += [c if c == _LEAF else c + offset for c in builder.right]
        value += builder.value

    return SurrogateModel(
        n_trees=n_trees,
        max_depth=max_depth,
        min_samples_leaf=min_samples_leaf,
        train_seed=seed,
        feature_version=FEATURE_VERSION,
        roots=np.array(roots, dtype=np.int64),
        feature=np.array(feature, dtype=np.int64),
        threshold=np.array(threshold, dtype=np.float64),
        left=np.array(left, dtype=np.int64),
        right=np.array(right, dtype=np.int64),
        value=np.array(value, dtype=np.float64),
    )


def save_model(model: SurrogateModel, path: str | Path) -> None:
    """Versioned flat text layout.

    Header: format tag, feature version, hyperparameters, seed. Then one
    ``tree <n_nodes>`` block per tree with node lines
    ``feature threshold left right value`` (child indices local to the tree,
    -1 marks a leaf slot).
    """
    lines = [
        "surrogate v1",
        f"feature_version {model.feature_version}",
        f"n_trees {model.n_trees}",
        f"max_depth {model.max_depth}",
        f"min_samples_leaf {model.min_samples_leaf}",
        f"seed {model.train_seed}",
    ]
    boundaries = list(model.roots) + [model.feature.size]
    for t in range(model.n_trees):
        start, stop = boundaries[t], boundaries[t + 1]
        lines.append(f"tree {stop - start}")
        for i in range(start, stop):
            lc = model.left[i] - start if model.left[i] != _LEAF else _LEAF
            rc = model.right[i] - start if model.right[i] != _LEAF else _LEAF
            lines.append(
                f"{model.feature[i]} {float(model.threshold[i])!r} {lc} {rc} "
                f"{float(model.value[i])!r}"
            )
    Path(path).write_text("\n".join(lines) + "\n")


def load_model(path: str | Path) -> SurrogateModel:
    lines = Path(path).read_text().splitlines()
    try:
        if lines[0] != "surrogate v1":
            raise ParseError(f"unsupported model format {lines[0]!r}", 1)
        header: dict[str, str] = {}
        pos = 1
        while not lines[pos].startswith("tree "):
            key, _, val = lines[pos].partition(" ")
            header[key] = val
            pos += 1
        n_trees = int(header["n_trees"])
        roots, feature, threshold, left, right, value = [], [], [], [], [], []
        for _ in range(n_trees):
            n_nodes = int(lines[pos].split()[1])
            pos += 1
            offset = len(feature)
            roots.append(offset)
            for _ in range(n_nodes):
                f, thr, lc, rc, val = lines[pos].split()
                feature.append(int(f))
                threshold.append(float(thr))
                left.append(_LEAF if int(lc) == _LEAF else int(lc) + offset)
                right.append(_LEAF if int(rc) == _LEAF else int(rc) + offset)
                value.append(float(val))
                pos += 1
    except (IndexError, ValueError, KeyError) as exc:
        raise ParseError(f"malformed model file: {exc}") from exc
    return SurrogateModel(
        n_trees=n_trees,
        max_depth=int(header["max_depth"]),
        min_samples_leaf=int(header["min_samples_leaf"]),
        train_seed=int(header["seed"]),
        feature_version=header["feature_version"],
        roots=np.array(roots, dtype=np.int64),
        feature=np.array(feature, dtype=np.int64),
        threshold=np.array(threshold, dtype=np.float64),
        left=np.array(left, dtype=np.int64),
        right=np.array(right, dtype=np.int64),
        value=np.array(value, dtype=np.float64),
    )
