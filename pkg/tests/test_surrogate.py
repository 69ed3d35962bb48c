import numpy as np
import pytest

import oracles
from dqsops.errors import (
    DegenerateTarget,
    FeatureVersionMismatch,
    InsufficientTrainingData,
)
from dqsops.features import FEATURE_NAMES
from dqsops.surrogate import load_model, save_model, train

N_FEATURES = len(FEATURE_NAMES)
RNG = np.random.default_rng(12)


def random_training_set(n=200, seed=0):
    rng = np.random.default_rng(seed)
    X = rng.normal(0, 1, (n, N_FEATURES))
    y = X[:, 2] * 2.0 + X[:, 0] - 0.5 * X[:, 7] + rng.normal(0, 0.05, n)
    return X, y


def test_linear_target_low_training_error():
    rng = np.random.default_rng(1)
    X = rng.uniform(-1, 1, (300, N_FEATURES))
    y = 3.0 * X[:, 4]  # exact linear function of one feature
    model = train(X, y, n_trees=50, max_depth=8, min_samples_leaf=2, seed=0)
    mae = float(np.abs(model.predict_batch(X) - y).mean())
    assert mae <= 0.05 * float(np.ptp(y))


def test_too_few_records_rejected():
    X, y = random_training_set(n=5)
    with pytest.raises(InsufficientTrainingData):
        train(X, y)


def test_identical_targets_rejected():
    X, _ = random_training_set(n=30)
    with pytest.raises(DegenerateTarget):
        train(X, np.full(30, 1.5))


def test_training_is_deterministic():
    X, y = random_training_set()
    probe = np.random.default_rng(5).normal(0, 1, (20, N_FEATURES))
    m1 = train(X, y, seed=42)
    m2 = train(X, y, seed=42)
    assert np.array_equal(m1.predict_batch(probe), m2.predict_batch(probe))


def test_different_seed_changes_model():
    X, y = random_training_set()
    probe = np.random.default_rng(5).normal(0, 1, (20, N_FEATURES))
    m1 = train(X, y, seed=1)
    m2 = train(X, y, seed=2)
    assert not np.array_equal(m1.predict_batch(probe), m2.predict_batch(probe))


def test_depth_zero_predicts_training_mean():
    X, y = random_training_set(n=50)
    model = train(X, y, n_trees=10, max_depth=0, seed=0)
    for i in range(5):
        assert model.predict(X[i]) == pytest.approx(
            float(np.mean([oracles.tree_walk_predict(model, t, X[i])
                           for t in range(model.n_trees)])),
            abs=1e-12,
        )
    # every leaf of a depth-0 tree is its bootstrap-sample mean; predictions
    # cannot leave the range of per-tree means
    lo, hi = float(y.min()), float(y.max())
    assert lo <= model.predict(RNG.normal(0, 1, N_FEATURES)) <= hi


def test_memorizes_without_bootstrap():
    rng = np.random.default_rng(7)
    X = rng.normal(0, 1, (40, N_FEATURES))
    y = rng.normal(0, 1, 40)
    model = train(X, y, n_trees=1, max_depth=30, min_samples_leaf=1,
                  seed=0, bootstrap=False)
    assert np.allclose(model.predict_batch(X), y, atol=1e-12)


def test_ensemble_equals_mean_of_tree_walks():
    X, y = random_training_set()
    model = train(X, y, n_trees=20, seed=3)
    probe = np.random.default_rng(6).normal(0, 1, (30, N_FEATURES))
    for x in probe:
        walks = [oracles.tree_walk_predict(model, t, x) for t in range(model.n_trees)]
        assert model.predict(x) == pytest.approx(oracles.mean_fsum(walks), abs=1e-12)


def test_predict_batch_matches_predict():
    X, y = random_training_set()
    model = train(X, y, seed=3)
    probe = np.random.default_rng(6).normal(0, 1, (25, N_FEATURES))
    batch = model.predict_batch(probe)
    single = np.array([model.predict(x) for x in probe])
    assert np.array_equal(batch, single)


def test_predictions_bounded_by_training_targets():
    X, y = random_training_set()
    model = train(X, y, seed=9)
    probe = np.random.default_rng(10).normal(0, 5, (200, N_FEATURES))
    preds = model.predict_batch(probe)
    assert (preds >= y.min() - 1e-12).all()
    assert (preds <= y.max() + 1e-12).all()


def test_round_trip(tmp_path):
    X, y = random_training_set()
    model = train(X, y, seed=4)
    path = tmp_path / "model.txt"
    save_model(model, path)
    loaded = load_model(path)
    probe = np.random.default_rng(11).normal(0, 1, (40, N_FEATURES))
    assert np.array_equal(model.predict_batch(probe), loaded.predict_batch(probe))
    assert loaded.n_trees == model.n_trees
    assert loaded.train_seed == model.train_seed
    assert loaded.feature_version == model.feature_version


def test_feature_version_mismatch(tmp_path):
    X, y = random_training_set(n=30)
    model = train(X, y, seed=0)
    path = tmp_path / "model.txt"
    save_model(model, path)
    doctored = (path.read_text()
                .replace(model.feature_version, "000000000000"))
    path.write_text(doctored)
    stale = load_model(path)
    with pytest.raises(FeatureVersionMismatch):
        stale.predict(X[0])
    with pytest.raises(FeatureVersionMismatch):
        stale.predict_batch(X)
