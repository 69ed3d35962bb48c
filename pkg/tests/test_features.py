import numpy as np
import pytest

import oracles
from dqsops.config import PipelineConfig
from dqsops.features import FEATURE_NAMES, FEATURE_VERSION, extract_features
from dqsops.model import DataWindow

CFG = PipelineConfig()


def feats(cells):
    return dict(zip(FEATURE_NAMES, extract_features(DataWindow.from_cells(0, cells), CFG)))


def test_layout_is_thirteen_features():
    assert len(FEATURE_NAMES) == 13
    assert len(FEATURE_VERSION) == 12


def test_all_missing_degenerate_fill():
    f = feats([None] * 5)
    assert f["missing_fraction"] == 1.0
    assert f["count_valid"] == 0.0
    for name in FEATURE_NAMES[2:]:
        assert f[name] == 0.0


def test_constant_window():
    f = feats([7.5] * 10)
    assert f["mean"] == f["min"] == f["max"] == f["q50"] == 7.5
    assert f["std"] == 0.0
    assert f["third_standardized_moment"] == 0.0
    assert f["fourth_standardized_moment"] == 0.0


def test_one_to_hundred_against_sort_oracle():
    cells = [float(v) for v in range(1, 101)]
    f = feats(cells)
    assert f["mean"] == 50.5
    assert f["min"] == 1.0
    assert f["max"] == 100.0
    for q, name in ((0.25, "q25"), (0.5, "q50"), (0.75, "q75")):
        assert f[name] == pytest.approx(oracles.quantile_sorted_loop(cells, q), abs=1e-12)
    assert f["q25"] == 25.75
    assert f["q50"] == 50.5
    assert f["q75"] == 75.25


def test_quantiles_match_oracle_on_random_samples():
    rng = np.random.default_rng(8)
    for _ in range(50):
        cells = list(rng.normal(0, 10, int(rng.integers(1, 300))))
        f = feats(cells)
        for q, name in ((0.25, "q25"), (0.5, "q50"), (0.75, "q75")):
            assert f[name] == pytest.approx(
                oracles.quantile_sorted_loop(cells, q), abs=1e-9
            )
        assert f["mean"] == pytest.approx(oracles.mean_fsum(cells), abs=1e-9)
        assert f["std"] == pytest.approx(oracles.std_fsum(cells), abs=1e-9)


def test_missing_fraction_and_count():
    f = feats([1.0, None, 3.0, None])
    assert f["missing_fraction"] == 0.5
    assert f["count_valid"] == 2.0


def test_tail_fractions_use_window_size_denominator():
    f = feats([-5.0, 1.0, None, 200.0])  # bounds are [0, 150]
    assert f["fraction_below_lo"] == 0.25
    assert f["fraction_above_hi"] == 0.25


def test_boundary_values_not_counted_as_tails():
    f = feats([0.0, 150.0, 75.0])
    assert f["fraction_below_lo"] == 0.0
    assert f["fraction_above_hi"] == 0.0


def test_extraction_deterministic():
    cells = list(np.random.default_rng(3).normal(80, 2, 500))
    a = extract_features(DataWindow.from_cells(0, cells), CFG)
    b = extract_features(DataWindow.from_cells(0, cells), CFG)
    assert np.array_equal(a, b)


def test_no_nan_for_degenerate_inputs():
    for cells in ([None], [5.0], [5.0, None], [0.0, 0.0]):
        assert np.isfinite(extract_features(DataWindow.from_cells(0, cells), CFG)).all()
