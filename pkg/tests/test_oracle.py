import numpy as np
import pytest

import oracles
from dqsops.errors import EmptyEvaluation
from dqsops.oracle import evaluate_oracle


def test_perfect_predictions():
    r = evaluate_oracle([1.0, 2.0, 3.0], [1.0, 2.0, 3.0])
    assert r.mae == 0.0
    assert r.r2 == 1.0
    assert r.n_evaluated == 3
    assert r.cv_of_errors == 0.0


def test_mean_predictor_gives_zero_r2():
    y = np.array([1.0, 2.0, 3.0, 4.0])
    r = evaluate_oracle(y, np.full(4, y.mean()))
    assert r.r2 == pytest.approx(0.0, abs=1e-15)


def test_hand_computed_example():
    r = evaluate_oracle([0.0, 1.0, 2.0], [0.0, 1.0, 4.0])
    assert r.mae == pytest.approx(2 / 3, abs=1e-15)
    assert r.r2 == pytest.approx(-1.0, abs=1e-15)


def test_empty_rejected():
    with pytest.raises(EmptyEvaluation):
        evaluate_oracle([], [])


def test_zero_variance_targets_have_undefined_r2():
    r = evaluate_oracle([2.0, 2.0], [1.0, 3.0])
    assert r.r2 is None
    assert r.mae == 1.0


def test_zero_mae_iff_r2_one_with_variance():
    rng = np.random.default_rng(0)
    for _ in range(50):
        y = rng.normal(0, 1, 20)
        noisy = y + rng.normal(0, 0.1, 20)
        r = evaluate_oracle(y, noisy)
        assert (r.mae == 0.0) == (r.r2 == 1.0)
    r = evaluate_oracle(y, y.copy())
    assert r.mae == 0.0 and r.r2 == 1.0


def test_r2_never_exceeds_one():
    rng = np.random.default_rng(1)
    for _ in range(200):
        y = rng.normal(0, rng.uniform(0.1, 5), 15)
        p = rng.normal(0, rng.uniform(0.1, 5), 15)
        r = evaluate_oracle(y, p)
        assert r.r2 <= 1.0


def test_matches_fsum_accumulation_oracle():
    rng = np.random.default_rng(2)
    for _ in range(1000):
        n = int(rng.integers(1, 50))
        y = rng.normal(0, 3, n)
        p = y + rng.normal(0, 1, n)
        r = evaluate_oracle(y, p)
        mae, r2 = oracles.mae_r2_fsum(list(y), list(p))
        assert r.mae == pytest.approx(mae, abs=1e-12)
        if r2 is None:
            assert r.r2 is None
        else:
            assert r.r2 == pytest.approx(r2, abs=1e-12)


def test_cv_of_errors():
    # errors are 1, 1, 4: mean 2, population std sqrt(2)
    r = evaluate_oracle([0.0, 0.0, 0.0], [1.0, -1.0, 4.0])
    assert r.cv_of_errors == pytest.approx(np.sqrt(2) / 2, abs=1e-12)
