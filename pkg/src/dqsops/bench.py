"""Experiment harnesses: per-window timing bench and the mutation sweep.

The bench measures wall time per window for the standard and predicted
scoring paths across every dimension-count subset, averaging over all
subsets of each size. The sweep reruns initialization across a grid of
mutation ceilings and evaluates each resulting model against one fixed
validation stream, exposing how the training-time mutation percentage
drives surrogate quality.
"""

import gc
import itertools
import logging
import time
from dataclasses import dataclass, replace

import numpy as np

from . import surrogate
from .activator import run_initialization
from .aggregate import Aggregator
from .config import MUTATION_CLASSES, PipelineConfig
from .dimensions import MetaInformation, build_reference, score_all_dimensions
from .anomaly import AnomalyDetector
from .errors import InitializationBudgetExhausted
from .features import extract_features
from .model import score_matrix
from .mutation import (
    GeneratorParams,
    MutationPlan,
    draw_severity_plan,
    generate_clean_stream,
    mutate_window,
)
from .oracle import evaluate_oracle

logger = logging.getLogger(__name__)

DEFAULT_MEASURED_WINDOWS = 200
DEFAULT_WARMUP_WINDOWS = 20
#: Sweep grid of mutation percentages, applied jointly to every mutant class.
DEFAULT_SWEEP_GRID = (0.0, 5.0, 10.0, 15.0, 20.0, 25.0, 30.0, 35.0, 40.0, 45.0, 50.0)

_BENCH_POOL_TAG = 21
_SWEEP_VALIDATION_TAG = 31
_SWEEP_VALIDATION_SEED_OFFSET = 424243


@dataclass(frozen=True)
class BenchRow:
    dimension_count: int
    method: str  # "standard" or "predicted"
    mean: float
    std: float
    cv: float
    speedup: float | None  # predicted rows only: standard mean over predicted mean


@dataclass(frozen=True)
class SweepRow:
    pct: float
    mae: float
    r2: float | None


def _fit_bench_pipeline(cfg: PipelineConfig, params: GeneratorParams):
    """Desk-scale artifacts: meta information, per-subset aggregators, model."""
    n_clean = max(
        30, -(-cfg.reference_sample_size // cfg.window_size)  # ceil division
    )
    clean = list(generate_clean_stream(n_clean, cfg.window_size, cfg.seed, params))
    pooled = np.concatenate([w.values for w in clean])
    detector = AnomalyDetector.fit(pooled, cfg.anomaly_threshold_k)
    reference = build_reference(
        pooled, cfg.histogram_bins, cfg.histogram_range, cfg.reference_sample_size
    )
    meta = MetaInformation(detector=detector, reference=reference)

    base_plan = MutationPlan.from_config(cfg)
    draw_rng = np.random.default_rng([cfg.seed, _BENCH_POOL_TAG])
    n_fit = max(60, 4 * len(cfg.enabled_dimensions))
    fit_windows = []
    for window in generate_clean_stream(
        n_fit, cfg.window_size, cfg.seed, params, start_id=n_clean
    ):
        plan = draw_severity_plan(base_plan, cfg.mutation_percentages, draw_rng)
        fit_windows.append(mutate_window(window, plan)[0])
    vectors = [score_all_dimensions(w, meta, cfg) for w in fit_windows]
    matrix = score_matrix(vectors)

    aggregators: dict[tuple[str, ...], Aggregator] = {}
    names = cfg.enabled_dimensions
    for size in range(1, len(names) + 1):
        for combo in itertools.combinations(names, size):
            cols = [names.index(d) for d in combo]
            aggregators[combo] = Aggregator.fit(matrix[:, cols], combo)

    full = tuple(names)
    targets = aggregators[full].consolidate_matrix(matrix)
    feats = np.vstack([extract_features(w, cfg) for w in fit_windows])
    model = surrogate.train(
        feats, targets,
        n_trees=cfg.n_trees, max_depth=cfg.max_depth,
        min_samples_leaf=cfg.min_samples_leaf, seed=cfg.seed,
    )
    return meta, aggregators, model


def run_bench(
    cfg: PipelineConfig,
    measured: int = DEFAULT_MEASURED_WINDOWS,
    warmup: int = DEFAULT_WARMUP_WINDOWS,
    params: GeneratorParams = GeneratorParams(),
) -> list[BenchRow]:
    """Time both scoring paths across dimension counts 1..m.

    Per cell: `warmup` windows are scored and discarded, then `measured`
    windows are timed with a monotonic clock around the scoring call only.
    Sizes with several subsets round-robin the measurement windows across
    all subsets of that size, so the cell mean averages over subsets the
    way it averages over windows.
    """
    meta, aggregators, model = _fit_bench_pipeline(cfg, params)

    base_plan = MutationPlan.from_config(cfg)
    draw_rng = np.random.default_rng([cfg.seed, _BENCH_POOL_TAG + 1])
    pool = []
    for window in generate_clean_stream(
        warmup + measured, cfg.window_size, cfg.seed + 1, params
    ):
        plan = draw_severity_plan(base_plan, cfg.mutation_percentages, draw_rng)
        pool.append(mutate_window(window, plan)[0])

    # Exercise both paths untimed so no cell pays first-touch costs, and
    # keep the collector out of the timed loops.
    for window in pool[: max(warmup, 10)]:
        score_all_dimensions(window, meta, cfg)
        model.predict(extract_features(window, cfg))
    gc_was_enabled = gc.isenabled()
    gc.disable()

    names = cfg.enabled_dimensions
    rows: list[BenchRow] = []
    for size in range(1, len(names) + 1):
        combos = list(itertools.combinations(names, size))
        combo_cfgs = [replace(cfg, enabled_dimensions=c) for c in combos]

        durations = np.empty(measured)
        for i, window in enumerate(pool):
            j = i % len(combos)
            sub_cfg = combo_cfgs[j]
            agg = aggregators[combos[j]]
            start = time.perf_counter()
            vector = score_all_dimensions(window, meta, sub_cfg)
            agg.consolidate(vector)
            elapsed = time.perf_counter() - start
            if i >= warmup:
                durations[i - warmup] = elapsed
        std_mean = float(durations.mean())
        std_std = float(durations.std())
        rows.append(BenchRow(
            dimension_count=size, method="standard",
            mean=std_mean, std=std_std,
            cv=std_std / std_mean if std_mean > 0 else 0.0,
            speedup=None,
        ))

        durations = np.empty(measured)
        for i, window in enumerate(pool):
            start = time.perf_counter()
            model.predict(extract_features(window, cfg))
            elapsed = time.perf_counter() - start
            if i >= warmup:
                durations[i - warmup] = elapsed
        pred_mean = float(durations.mean())
        pred_std = float(durations.std())
        rows.append(BenchRow(
            dimension_count=size, method="predicted",
            mean=pred_mean, std=pred_std,
            cv=pred_std / pred_mean if pred_mean > 0 else 0.0,
            speedup=std_mean / pred_mean if pred_mean > 0 else None,
        ))
        logger.info(
            "bench: %d dimension(s): standard %.3g s, predicted %.3g s (%.1fx)",
            size, std_mean, pred_mean, std_mean / pred_mean if pred_mean else 0.0,
        )
    if gc_was_enabled:
        gc.enable()
    return rows


def run_mutation_sweep(
    cfg: PipelineConfig,
    grid: tuple[float, ...] = DEFAULT_SWEEP_GRID,
    validation_windows: int = 60,
    params: GeneratorParams = GeneratorParams(),
) -> list[SweepRow]:
    """Rerun initialization across mutation ceilings and report oracle quality.

    Every grid point trains against mutants drawn below that ceiling (the
    same scalar applied jointly to every mutant class) and is evaluated on
    one fixed validation stream mutated at the *configured* ceilings, so the
    rows isolate how the training-time mutation percentage affects the
    deployed model.
    """
    base_plan = MutationPlan.from_config(cfg)
    val_rng = np.random.default_rng([cfg.seed, _SWEEP_VALIDATION_TAG])
    val_pool = []
    for window in generate_clean_stream(
        validation_windows, cfg.window_size,
        cfg.seed + _SWEEP_VALIDATION_SEED_OFFSET, params,
    ):
        plan = draw_severity_plan(base_plan, cfg.mutation_percentages, val_rng)
        val_pool.append(mutate_window(window, plan)[0])
    val_feats = np.vstack([extract_features(w, cfg) for w in val_pool])

    rows: list[SweepRow] = []
    for pct in grid:
        ceilings = {name: float(pct) for name in MUTATION_CLASSES}
        clean_source = generate_clean_stream(
            cfg.init_budget_windows, cfg.window_size, cfg.seed, params
        )
        try:
            result = run_initialization(clean_source, cfg, ceilings=ceilings)
        except InitializationBudgetExhausted as exc:
            result = exc.best_result
        if result is None:
            rows.append(SweepRow(pct=float(pct), mae=float("inf"), r2=None))
            logger.warning("sweep: %g%% produced no trainable model", pct)
            continue
        meta = MetaInformation(detector=result.detector, reference=result.reference)
        vectors = [score_all_dimensions(w, meta, cfg) for w in val_pool]
        truth = result.aggregator.consolidate_matrix(score_matrix(vectors))
        preds = result.model.predict_batch(val_feats)
        report = evaluate_oracle(truth, preds)
        rows.append(SweepRow(pct=float(pct), mae=report.mae, r2=report.r2))
        logger.info(
            "sweep: %g%% -> MAE %.6g, R2 %s", pct, report.mae,
            "n/a" if report.r2 is None else f"{report.r2:.4f}",
        )
    return rows
