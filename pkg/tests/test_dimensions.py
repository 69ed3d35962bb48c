import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import oracles
from dqsops.anomaly import AnomalyDetector
from dqsops.config import PipelineConfig
from dqsops.dimensions import (
    MetaInformation,
    ReferenceDistribution,
    build_reference,
    histogram,
    jensen_shannon_divergence,
    ks_statistic,
    load_reference,
    normalize_minmax,
    save_reference,
    score_accuracy,
    score_all_dimensions,
    score_completeness,
    score_consistency,
    score_skewness,
    score_timeliness,
    shannon_entropy,
)
from dqsops.errors import (
    EmptySample,
    InvalidDistribution,
    LengthMismatch,
    MissingMetaInformation,
)
from dqsops.model import DataWindow
from dqsops.mutation import generate_clean_stream

RNG = np.random.default_rng(1234)


# -- Kolmogorov-Smirnov -------------------------------------------------------

def test_ks_identical_samples_is_zero():
    x = [3.0, 1.0, 2.0, 2.0]
    assert ks_statistic(x, x) == 0.0


def test_ks_disjoint_supports_is_one():
    assert ks_statistic([1.0, 2.0, 3.0], [10.0, 11.0]) == 1.0


def test_ks_interleaved_thirds():
    assert ks_statistic([1, 2, 3], [1.5, 2.5, 3.5]) == pytest.approx(1 / 3, abs=1e-15)


def test_ks_empty_rejected():
    with pytest.raises(EmptySample):
        ks_statistic([], [1.0])
    with pytest.raises(EmptySample):
        ks_statistic([1.0], [])


def test_ks_matches_brute_force_on_random_pairs():
    for _ in range(1000):
        n = int(RNG.integers(1, 201))
        m = int(RNG.integers(1, 201))
        x = RNG.normal(0, 1, n)
        y = RNG.normal(RNG.uniform(-1, 1), RNG.uniform(0.5, 2), m)
        assert ks_statistic(x, y) == pytest.approx(oracles.ks_brute(x, y), abs=1e-12)


def test_ks_matches_quadratic_counting_loop():
    for _ in range(30):
        x = RNG.uniform(0, 1, int(RNG.integers(1, 25)))
        y = RNG.uniform(0, 1, int(RNG.integers(1, 25)))
        assert ks_statistic(x, y) == pytest.approx(oracles.ks_quadratic(x, y), abs=1e-12)


@settings(max_examples=100, deadline=None)
@given(
    st.lists(st.floats(-1e6, 1e6), min_size=1, max_size=60),
    st.lists(st.floats(-1e6, 1e6), min_size=1, max_size=60),
)
def test_ks_symmetric_and_bounded(x, y):
    d = ks_statistic(x, y)
    assert d == ks_statistic(y, x)
    assert 0.0 <= d <= 1.0
    assert ks_statistic(x, x) == 0.0


# -- histogram ----------------------------------------------------------------

def test_histogram_all_at_lower_edge():
    h = histogram(np.zeros(10), 4, (0.0, 1.0))
    assert list(h) == [1.0, 0.0, 0.0, 0.0]


def test_histogram_uniform_grid():
    # 8 values evenly filling 4 bins of [0, 8)
    values = [0.5, 1.5, 2.5, 3.5, 4.5, 5.5, 6.5, 7.5]
    h = histogram(values, 4, (0.0, 8.0))
    assert np.allclose(h, 0.25)


def test_histogram_clamps_out_of_range():
    # -100 clamps into the first bin, 100 into the last; 0.25 lands in bin 0.
    h = histogram([-100.0, 0.25, 100.0], 2, (0.0, 1.0))
    assert list(h) == [2 / 3, 1 / 3]


def test_histogram_matches_counting_loop():
    values = RNG.normal(0, 1, 1000)
    h = histogram(values, 32, (-4.0, 4.0))
    expected = oracles.histogram_counting_loop(values, 32, -4.0, 4.0)
    assert np.array_equal(h, expected)


def test_histogram_empty_rejected():
    with pytest.raises(EmptySample):
        histogram([], 4, (0.0, 1.0))


# -- entropy and divergence ---------------------------------------------------

def test_entropy_degenerate_is_zero():
    assert shannon_entropy([1.0, 0.0, 0.0, 0.0]) == 0.0


def test_entropy_uniform_four_bins():
    assert shannon_entropy([0.25] * 4) == pytest.approx(2.0, abs=1e-12)


def test_entropy_half_quarter_quarter():
    assert shannon_entropy([0.5, 0.25, 0.25]) == pytest.approx(1.5, abs=1e-12)


def test_entropy_rejects_bad_input():
    with pytest.raises(InvalidDistribution):
        shannon_entropy([0.5, -0.1, 0.6])
    with pytest.raises(InvalidDistribution):
        shannon_entropy([0.5, 0.4])


@settings(max_examples=100, deadline=None)
@given(st.lists(st.floats(0.0, 1.0), min_size=1, max_size=32).filter(
    lambda p: sum(p) > 1e-6
))
def test_entropy_bounded_by_log_bins(p):
    p = [v / sum(p) for v in p]
    h = shannon_entropy(p)
    assert -1e-12 <= h <= math.log2(len(p)) + 1e-12


def test_entropy_maximal_iff_uniform():
    k = 8
    assert shannon_entropy([1 / k] * k) == pytest.approx(math.log2(k), abs=1e-12)
    skew = [1 / k] * k
    skew[0] += 0.01
    skew[1] -= 0.01
    assert shannon_entropy(skew) < math.log2(k) - 1e-6


def test_jsd_equal_is_zero():
    p = [0.2, 0.3, 0.5]
    assert jensen_shannon_divergence(p, p) == 0.0


def test_jsd_disjoint_is_one():
    assert jensen_shannon_divergence([1.0, 0.0], [0.0, 1.0]) == pytest.approx(1.0, abs=1e-12)


def test_jsd_half_vs_point_mass():
    # H(0.75, 0.25) - (H(0.5, 0.5) + H(1, 0)) / 2, evaluated by the oracle
    expected = oracles.jsd_via_entropy([0.5, 0.5], [1.0, 0.0])
    got = jensen_shannon_divergence([0.5, 0.5], [1.0, 0.0])
    assert got == pytest.approx(expected, abs=1e-15)
    assert got == pytest.approx(0.31127812445913283, abs=1e-12)


def test_jsd_length_mismatch():
    with pytest.raises(LengthMismatch):
        jensen_shannon_divergence([1.0], [0.5, 0.5])


@settings(max_examples=100, deadline=None)
@given(
    st.lists(st.floats(0.0, 1.0), min_size=2, max_size=16).filter(lambda p: sum(p) > 1e-6),
    st.lists(st.floats(0.0, 1.0), min_size=2, max_size=16).filter(lambda q: sum(q) > 1e-6),
)
def test_jsd_symmetric_bounded(p, q):
    size = min(len(p), len(q))
    p = np.array(p[:size]) / sum(p[:size])
    q = np.array(q[:size]) / sum(q[:size])
    d = jensen_shannon_divergence(p, q)
    assert d == pytest.approx(jensen_shannon_divergence(q, p), abs=1e-12)
    assert 0.0 <= d <= 1.0 + 1e-12
    if np.array_equal(p, q):
        assert d == 0.0


# -- min-max ------------------------------------------------------------------

def test_normalize_minmax_endpoints_and_midpoint():
    assert normalize_minmax(2.0, 2.0, 4.0) == 0.0
    assert normalize_minmax(4.0, 2.0, 4.0) == 1.0
    assert normalize_minmax(3.0, 2.0, 4.0) == 0.5
    assert normalize_minmax(-10.0, 2.0, 4.0) == 0.0
    assert normalize_minmax(99.0, 2.0, 4.0) == 1.0


# -- per-dimension scorers ----------------------------------------------------

def _window(cells, window_id=0):
    return DataWindow.from_cells(window_id, cells)


def test_completeness_trivial_cases():
    assert score_completeness(_window([1.0] * 4)) == 0.0
    assert score_completeness(_window([None] * 4)) == 1.0
    assert score_completeness(_window([1.0, None, 2.0, None, 3.0, 4.0, 5.0, 6.0])) == 0.25


def test_consistency_trivial_cases():
    assert score_consistency(_window([1.0, 2.0, 3.0]), 0.0, 5.0) == 0.0
    w = _window([-1.0, -2.0, -3.0] + [1.0] * 7)
    assert score_consistency(w, 0.0, 5.0) == pytest.approx(0.3)
    assert score_consistency(_window([10.0, 20.0]), 0.0, 5.0) == 1.0


def test_consistency_boundary_values_are_inside():
    assert score_consistency(_window([0.0, 5.0]), 0.0, 5.0) == 0.0


def test_accuracy_direct_fraction():
    detector = AnomalyDetector(median=0.0, mad_scaled=1.0, threshold_k=3.5)
    cells = [0.0] * 8 + [10.0, -10.0]
    assert score_accuracy(_window(cells), detector) == pytest.approx(0.2)
    assert score_accuracy(_window([0.0] * 10), detector) == 0.0


def test_accuracy_skips_missing_cells():
    detector = AnomalyDetector(median=0.0, mad_scaled=1.0, threshold_k=3.5)
    w = _window([0.0, None, 50.0, None])
    assert score_accuracy(w, detector) == pytest.approx(0.25)


def test_accuracy_on_clean_reference_data():
    window = next(generate_clean_stream(1, 2000, seed=5))
    detector = AnomalyDetector.fit(window.values, 3.5)
    assert score_accuracy(window, detector) <= 0.01


def _small_reference():
    sample = np.sort(RNG.normal(0, 1, 4000))
    return build_reference(sample, 32, (-5.0, 5.0), max_sample=4000)


def test_timeliness_identical_distribution_small():
    ref = _small_reference()
    w = _window(list(ref.sample))
    assert score_timeliness(w, ref) == 0.0


def test_timeliness_shifted_above_range():
    ref = _small_reference()
    w = _window(list(RNG.normal(50, 1, 100)))
    assert score_timeliness(w, ref) == 1.0


def test_timeliness_half_sample_matches_oracle():
    ref = _small_reference()
    half = ref.sample[: ref.sample.size // 2]
    w = _window(list(half))
    expected = oracles.ks_brute(half, ref.sample)
    assert score_timeliness(w, ref) == pytest.approx(expected, abs=1e-12)


def test_timeliness_all_missing_rejected():
    ref = _small_reference()
    with pytest.raises(EmptySample):
        score_timeliness(_window([None, None]), ref)


def test_skewness_resampling_noise_stays_low():
    # 99th percentile over 100 resamples of the reference pool itself
    cfg = PipelineConfig(window_size=2000)
    pool = np.concatenate(
        [w.values for w in generate_clean_stream(10, 2000, seed=11)]
    )
    ref = build_reference(pool, cfg.histogram_bins, (70.0, 95.0), max_sample=8000)
    scores = []
    for _ in range(100):
        w = _window(list(RNG.choice(pool, size=2000)))
        scores.append(score_skewness(w, ref, cfg))
    assert float(np.percentile(scores, 99)) < 0.05


def test_skewness_mass_in_empty_bin_is_one():
    ref = ReferenceDistribution(
        sample=np.array([0.5]), histogram=np.array([1.0, 0.0, 0.0, 0.0]),
        value_range=(0.0, 4.0),
    )
    cfg = PipelineConfig()
    w = _window([2.5] * 50)  # third bin, where the reference has zero mass
    assert score_skewness(w, ref, cfg) == pytest.approx(1.0, abs=1e-12)


def test_skewness_bin_center_replay_is_zero():
    counts = (3, 1, 0, 4)
    hist = np.array(counts) / sum(counts)
    ref = ReferenceDistribution(
        sample=np.array([0.5]), histogram=hist, value_range=(0.0, 4.0)
    )
    centers = [0.5, 1.5, 2.5, 3.5]
    cells = []
    for c, k in zip(centers, counts):
        cells += [c] * (k * 6)
    assert score_skewness(_window(cells), ref, PipelineConfig()) == 0.0


# -- score_all_dimensions -----------------------------------------------------

@pytest.fixture(scope="module")
def fitted_meta():
    cfg = PipelineConfig(window_size=2000, histogram_range=(0.0, 150.0))
    pool = np.concatenate(
        [w.values for w in generate_clean_stream(20, 2000, seed=21)]
    )
    detector = AnomalyDetector.fit(pool, cfg.anomaly_threshold_k)
    ref = build_reference(pool, cfg.histogram_bins, cfg.histogram_range, 40000)
    return cfg, MetaInformation(detector=detector, reference=ref)


def test_clean_windows_score_low(fitted_meta):
    # At window size 2000 the sampling-noise floor of every scorer sits
    # safely below 0.05; at 1000 the KS 99th percentile alone is ~0.052.
    cfg, meta = fitted_meta
    rows = []
    for w in generate_clean_stream(50, cfg.window_size, seed=77):
        v = score_all_dimensions(w, meta, cfg)
        rows.append(list(v.scores.values()))
    worst = np.percentile(np.array(rows), 99, axis=0)
    assert (worst <= 0.05).all(), f"99th percentile per dimension: {worst}"


def test_fully_missing_window_conventions(fitted_meta):
    cfg, meta = fitted_meta
    v = score_all_dimensions(_window([None] * 10), meta, cfg)
    assert v.scores["completeness"] == 1.0
    assert v.scores["timeliness"] == 1.0
    assert v.scores["skewness"] == 1.0
    assert v.scores["accuracy"] == 0.0
    assert v.scores["consistency"] == 0.0


def test_exact_missing_injection(fitted_meta):
    cfg, meta = fitted_meta
    clean = next(generate_clean_stream(1, 2000, seed=3))
    cells = list(clean.cells())
    for i in range(0, 2000, 5):  # exactly 20 percent missing
        cells[i] = None
    v = score_all_dimensions(_window(cells), meta, cfg)
    assert v.scores["completeness"] == pytest.approx(0.2, abs=1e-15)
    assert v.scores["consistency"] == 0.0


def test_missing_meta_information_names_dimension():
    cfg = PipelineConfig()
    with pytest.raises(MissingMetaInformation, match="accuracy"):
        score_all_dimensions(_window([1.0]), MetaInformation(), cfg)
    with pytest.raises(MissingMetaInformation, match="timeliness"):
        score_all_dimensions(
            _window([1.0]),
            MetaInformation(detector=AnomalyDetector(0.0, 1.0, 3.5)),
            cfg,
        )


def test_timings_recorded(fitted_meta):
    cfg, meta = fitted_meta
    timings = {}
    score_all_dimensions(_window([1.0, 2.0, 3.0]), meta, cfg, timings=timings)
    assert set(timings) == set(cfg.enabled_dimensions)
    assert all(t >= 0.0 for t in timings.values())


@settings(max_examples=60, deadline=None)
@given(st.lists(
    st.one_of(st.none(), st.floats(-1e9, 1e9)), min_size=1, max_size=80,
))
def test_every_score_in_unit_interval(cells):
    cfg = PipelineConfig(window_size=len(cells))
    detector = AnomalyDetector(median=80.0, mad_scaled=3.0, threshold_k=3.5)
    ref = ReferenceDistribution(
        sample=np.sort(RNG.normal(80, 3, 500)),
        histogram=histogram(RNG.normal(80, 3, 500), 32, (0.0, 150.0)),
        value_range=(0.0, 150.0),
    )
    v = score_all_dimensions(
        DataWindow.from_cells(0, cells),
        MetaInformation(detector=detector, reference=ref), cfg,
    )
    for name, s in v.scores.items():
        assert 0.0 <= s <= 1.0, (name, s)


def test_exact_rational_scores(fitted_meta):
    cfg, meta = fitted_meta
    w = _window([1.0, None, 200.0, -3.0, 5.0, None, 7.0])
    n = w.n
    c = score_completeness(w) * n
    k = score_consistency(w, cfg.integrity_min, cfg.integrity_max) * n
    assert abs(c - round(c)) < 1e-12
    assert abs(k - round(k)) < 1e-12


# -- reference persistence ----------------------------------------------------

def test_reference_round_trip(tmp_path):
    pool = RNG.normal(80, 3, 5000)
    ref = build_reference(pool, 16, (60.0, 100.0), max_sample=1000)
    path = tmp_path / "ref.txt"
    save_reference(ref, path)
    loaded = load_reference(path)
    assert np.array_equal(loaded.sample, ref.sample)
    assert np.array_equal(loaded.histogram, ref.histogram)
    assert loaded.value_range == ref.value_range


def test_reference_decimation_cap():
    pool = RNG.normal(0, 1, 5000)
    ref = build_reference(pool, 8, (-4.0, 4.0), max_sample=100)
    assert ref.sample.size == 100
    assert (np.diff(ref.sample) >= 0).all()


def test_reference_histogram_must_sum_to_one():
    with pytest.raises(ValueError):
        ReferenceDistribution(
            sample=np.array([1.0]), histogram=np.array([0.5, 0.4]),
            value_range=(0.0, 1.0),
        )
