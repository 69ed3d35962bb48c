"""Method activator: routes windows between the two scoring paths.

Windows arrive in chunks of beta. In serving mode the cheap predicted path
scores every window; the final n windows of each chunk are additionally
scored by the standard path, and at the chunk boundary the test oracle
compares the pairs against the tolerance tau. A failed checkpoint raises a
retrain signal: both paths then run on every window (predicted scores keep
flowing to consumers, standard scores accumulate as ground truth) until a
candidate model passes validation and atomically replaces the current one.

The activator is a single-owner state machine; one consumer advances it per
stream, and the model swap is a single reference assignment.

This module also hosts the initialization phase, which fits every artifact
the activator needs: anomaly detector, reference distribution, aggregator,
and the first surrogate model.
"""

import logging
import time
from dataclasses import dataclass, replace
from enum import Enum
from pathlib import Path
from typing import Iterable, Iterator

import numpy as np

from . import surrogate
from .aggregate import Aggregator, load_aggregator, save_aggregator
from .anomaly import AnomalyDetector, load_detector, save_detector
from .config import PathsConfig, PipelineConfig, save_config
from .dimensions import (
    MetaInformation,
    ReferenceDistribution,
    build_reference,
    load_reference,
    save_reference,
    score_all_dimensions,
)
from .errors import (
    ConfigError,
    DqError,
    InitializationBudgetExhausted,
    InsufficientTrainingData,
)
from .features import extract_features
from .model import (
    ConsolidatedScore,
    DataWindow,
    DimensionScoreVector,
    ScoreMethod,
    ScoreRecord,
    score_matrix,
)
from .mutation import MutationPlan, draw_severity_plan, mutate_window
from .oracle import OracleReport, evaluate_oracle
from .repository import EvalLog, EvalLogEntry, RepositoryWriter, TrainingStore

logger = logging.getLogger(__name__)

#: Window ids with this residue modulo 5 form the held-out validation split
#: (a fixed 80/20 split that is stable across runs and retrains).
VALIDATION_MODULUS = 5
VALIDATION_RESIDUE = 4


class Mode(Enum):
    INITIALIZING = "Initializing"
    SERVING = "Serving"
    RETRAINING = "Retraining"


def validation_mask(window_ids: np.ndarray) -> np.ndarray:
    return window_ids % VALIDATION_MODULUS == VALIDATION_RESIDUE


def oracle_decision(report: OracleReport, tau: float) -> str:
    """Retrain iff the oracle MAE exceeds tau; MAE equal to tau passes."""
    return "retrain" if report.mae > tau else "continue"


class Activator:
    """Serving-time state machine over a fitted pipeline."""

    def __init__(
        self,
        cfg: PipelineConfig,
        meta: MetaInformation,
        aggregator: Aggregator,
        model,
        repository: RepositoryWriter,
        eval_log: EvalLog,
        tau: float,
        training_rows: list[tuple[int, np.ndarray, float]] | None = None,
    ):
        self.cfg = cfg
        self.meta = meta
        self.aggregator = aggregator
        self.model = model
        self.repository = repository
        self.eval_log = eval_log
        self.tau = tau
        self.training_rows = list(training_rows or [])
        self.mode = Mode.SERVING
        self.windows_in_chunk = 0
        self.chunk_index = 0
        self.pending_eval: list[tuple[int, float, float]] = []
        self.retrain_round = 0
        self.alert = False
        self.retrained_models: list = []
        self._retrain_attempts = 0

    # -- scoring paths -----------------------------------------------------

    def _predicted(self, window: DataWindow) -> tuple[np.ndarray, float, float]:
        start = time.perf_counter()
        feats = extract_features(window, self.cfg)
        value = self.model.predict(feats)
        return feats, value, time.perf_counter() - start

    def _standard(self, window: DataWindow) -> tuple[DimensionScoreVector, float, float]:
        start = time.perf_counter()
        vector = score_all_dimensions(window, self.meta, self.cfg)
        value = self.aggregator.consolidate(vector)
        return vector, value, time.perf_counter() - start

    # -- state machine -----------------------------------------------------

    def process(self, window: DataWindow) -> list[ScoreRecord]:
        """Score one window; returns the records appended to the repository."""
        records: list[ScoreRecord] = []
        feats, pred_value, pred_duration = self._predicted(window)
        records.append(
            self.repository.append(
                window.window_id, ScoreMethod.PREDICTED, pred_value, pred_duration
            )
        )
        need_standard = (
            self.mode is Mode.RETRAINING
            or self.windows_in_chunk >= self.cfg.beta - self.cfg.n_ground_truth
        )
        if need_standard:
            try:
                vector, std_value, std_duration = self._standard(window)
            except DqError as exc:
                # A scorer failure loses one ground truth but never halts
                # the stream; the predicted record above already went out.
                logger.error("standard scoring failed for window %d: %s",
                             window.window_id, exc)
            else:
                records.append(
                    self.repository.append(
                        window.window_id, ScoreMethod.STANDARD,
                        std_value, std_duration, vector,
                    )
                )
                self.training_rows.append((window.window_id, feats, std_value))
                if self.mode is Mode.SERVING:
                    self.pending_eval.append((window.window_id, std_value, pred_value))
        self.windows_in_chunk += 1
        if self.windows_in_chunk >= self.cfg.beta:
            self._chunk_boundary()
        return records

    def consolidated_scores(self, records: list[ScoreRecord]) -> list[ConsolidatedScore]:
        return [
            ConsolidatedScore(r.window_id, r.consolidated, r.method) for r in records
        ]

    def _chunk_boundary(self) -> None:
        completed_chunk = self.chunk_index
        self.windows_in_chunk = 0
        self.chunk_index += 1
        if self.mode is Mode.SERVING:
            self.run_oracle_checkpoint(completed_chunk)
        elif self.mode is Mode.RETRAINING and not self.alert:
            self.execute_retrain(completed_chunk)

    def run_oracle_checkpoint(self, chunk_index: int) -> tuple[OracleReport, str] | None:
        """Evaluate the buffered pairs and decide continue versus retrain."""
        if len(self.pending_eval) < self.cfg.n_ground_truth:
            logger.warning(
                "chunk %d: only %d of %d oracle pairs available, checkpoint skipped",
                chunk_index, len(self.pending_eval), self.cfg.n_ground_truth,
            )
            self.pending_eval.clear()
            return None
        y_true = np.array([p[1] for p in self.pending_eval])
        y_pred = np.array([p[2] for p in self.pending_eval])
        report = evaluate_oracle(y_true, y_pred)
        decision = oracle_decision(report, self.tau)
        self.eval_log.append(EvalLogEntry(
            chunk_index=chunk_index, n=report.n_evaluated, mae=report.mae,
            r2=report.r2, cv=report.cv_of_errors, decision=decision,
        ))
        self.pending_eval.clear()
        if decision == "retrain":
            logger.info("chunk %d: oracle MAE %.6g > tau %.6g, retrain signal raised",
                        chunk_index, report.mae, self.tau)
            self.mode = Mode.RETRAINING
            self.retrain_round = 0
        return report, decision

    def execute_retrain(self, chunk_index: int) -> None:
        """Train a candidate on the ground-truth snapshot and swap if it passes."""
        ids = np.array([r[0] for r in self.training_rows], dtype=np.int64)
        X = np.array([r[1] for r in self.training_rows], dtype=np.float64)
        y = np.array([r[2] for r in self.training_rows], dtype=np.float64)
        val = validation_mask(ids)
        try:
            seed = self.cfg.seed + 1 + self._retrain_attempts
            candidate = surrogate.train(
                X[~val], y[~val],
                n_trees=self.cfg.n_trees,
                max_depth=self.cfg.max_depth,
                min_samples_leaf=self.cfg.min_samples_leaf,
                seed=seed,
            )
        except InsufficientTrainingData as exc:
            # Not enough ground truth yet; keep accumulating. Deferrals do
            # not consume a retrain round.
            logger.info("chunk %d: retrain deferred (%s)", chunk_index, exc)
            self.eval_log.append(EvalLogEntry(
                chunk_index=chunk_index, n=0, mae=float("inf"),
                r2=None, cv=0.0, decision="defer",
            ))
            return
        self._retrain_attempts += 1
        if val.any():
            report = evaluate_oracle(y[val], candidate.predict_batch(X[val]))
        else:
            report = evaluate_oracle(y[~val], candidate.predict_batch(X[~val]))
        if report.mae <= self.tau:
            self.model = candidate  # atomic reference swap
            self.retrained_models.append(candidate)
            self.mode = Mode.SERVING
            self.retrain_round = 0
            decision = "swap"
            logger.info("chunk %d: candidate accepted (validation MAE %.6g)",
                        chunk_index, report.mae)
        else:
            self.retrain_round += 1
            decision = "retry"
            if self.retrain_round >= self.cfg.max_retrain_rounds:
                self.alert = True
                decision = "alert"
                logger.error(
                    "chunk %d: %d retrain rounds failed, raising persistent alert",
                    chunk_index, self.retrain_round,
                )
        self.eval_log.append(EvalLogEntry(
            chunk_index=chunk_index, n=report.n_evaluated, mae=report.mae,
            r2=report.r2, cv=report.cv_of_errors, decision=decision,
        ))


# -- initialization phase ----------------------------------------------------


@dataclass(frozen=True)
class InitRound:
    round_index: int
    windows_used: int
    training_rows: int
    tau: float
    validation_mae: float
    validation_r2: float | None


@dataclass(frozen=True)
class InitResult:
    detector: AnomalyDetector
    reference: ReferenceDistribution
    aggregator: Aggregator
    model: surrogate.SurrogateModel
    tau: float
    rounds: tuple[InitRound, ...]
    windows_used: int
    training_rows: tuple[tuple[int, np.ndarray, float], ...]


#: Dedicated seed stream tags, mixed with the config seed.
SEVERITY_DRAW_TAG = 11


def run_initialization(
    clean_source: Iterator[DataWindow],
    cfg: PipelineConfig,
    ceilings: dict[str, float] | None = None,
) -> InitResult:
    """Fit all four artifacts from a clean stream plus simulated mutants.

    The first init_clean_windows windows fit the anomaly detector and the
    reference distribution. Subsequent windows are mutated with per-window
    severities drawn below the configured ceilings, scored by the standard
    path, and used to fit the aggregator and train the surrogate. Rounds of
    init_round_windows are added until the validation MAE reaches tau or the
    window budget runs out, in which case InitializationBudgetExhausted
    carries the best round achieved.
    """
    ceilings = dict(ceilings if ceilings is not None else cfg.mutation_percentages)
    clean_pool: list[np.ndarray] = []
    windows_used = 0
    for _ in range(cfg.init_clean_windows):
        window = next(clean_source, None)
        if window is None:
            raise InitializationBudgetExhausted(
                "clean source exhausted while collecting clean fitting windows"
            )
        if window.missing.any():
            raise ValueError(
                f"clean initialization window {window.window_id} contains missing cells"
            )
        clean_pool.append(window.values)
        windows_used += 1
    pooled = np.concatenate(clean_pool)
    detector = AnomalyDetector.fit(pooled, cfg.anomaly_threshold_k)
    reference = build_reference(
        pooled, cfg.histogram_bins, cfg.histogram_range, cfg.reference_sample_size
    )
    meta = MetaInformation(detector=detector, reference=reference)

    base_plan = MutationPlan.from_config(cfg)
    draw_rng = np.random.default_rng([cfg.seed, SEVERITY_DRAW_TAG])

    ids: list[int] = []
    feats: list[np.ndarray] = []
    vectors: list[DimensionScoreVector] = []
    rounds: list[InitRound] = []
    best: tuple[float, InitResult] | None = None

    round_index = 0
    while True:
        batch = min(cfg.init_round_windows, cfg.init_budget_windows - windows_used)
        if batch <= 0:
            break
        exhausted = False
        for _ in range(batch):
            window = next(clean_source, None)
            if window is None:
                exhausted = True
                break
            plan = draw_severity_plan(base_plan, ceilings, draw_rng)
            mutated, _ = mutate_window(window, plan)
            vectors.append(score_all_dimensions(mutated, meta, cfg))
            feats.append(extract_features(mutated, cfg))
            ids.append(mutated.window_id)
            windows_used += 1
        round_index += 1

        matrix = score_matrix(vectors)
        try:
            aggregator = Aggregator.fit(matrix, cfg.enabled_dimensions)
        except DqError as exc:
            if exhausted:
                break
            logger.info("round %d: aggregator not fittable yet (%s)", round_index, exc)
            continue
        targets = aggregator.consolidate_matrix(matrix)
        tau = cfg.tau_mae if cfg.tau_mae is not None else (
            cfg.tau_fraction * float(targets.std())
        )
        id_arr = np.asarray(ids, dtype=np.int64)
        val = validation_mask(id_arr)
        X = np.vstack(feats)
        try:
            model = surrogate.train(
                X[~val], targets[~val],
                n_trees=cfg.n_trees, max_depth=cfg.max_depth,
                min_samples_leaf=cfg.min_samples_leaf, seed=cfg.seed,
            )
        except DqError as exc:
            if exhausted:
                break
            logger.info("round %d: surrogate not trainable yet (%s)", round_index, exc)
            continue
        if val.any():
            report = evaluate_oracle(targets[val], model.predict_batch(X[val]))
        else:
            report = evaluate_oracle(targets[~val], model.predict_batch(X[~val]))
        rounds.append(InitRound(
            round_index=round_index, windows_used=windows_used,
            training_rows=int(len(ids)), tau=tau,
            validation_mae=report.mae, validation_r2=report.r2,
        ))
        logger.info(
            "round %d: %d rows, tau=%.6g, validation MAE=%.6g R2=%s",
            round_index, len(ids), tau, report.mae,
            "n/a" if report.r2 is None else f"{report.r2:.4f}",
        )
        result = InitResult(
            detector=detector, reference=reference, aggregator=aggregator,
            model=model, tau=tau, rounds=tuple(rounds), windows_used=windows_used,
            training_rows=tuple(
                (int(i), f, float(t)) for i, f, t in zip(id_arr, feats, targets)
            ),
        )
        if best is None or report.mae < best[0]:
            best = (report.mae, result)
        if report.mae <= tau:
            return result
        if exhausted:
            break

    raise InitializationBudgetExhausted(
        f"validation MAE did not reach tolerance within {windows_used} windows",
        best_result=None if best is None else best[1],
    )


ARTIFACT_FILES = {
    "reference_sample": "reference.txt",
    "anomaly_model": "anomaly.txt",
    "aggregator": "aggregator.txt",
    "surrogate_model": "surrogate.txt",
    "score_repository": "scores.csv",
}
TRAINING_STORE_SUFFIX = ".train"


def persist_initialization(
    result: InitResult, cfg: PipelineConfig, out_dir: str | Path
) -> PipelineConfig:
    """Write all four artifacts plus the training store, and return the
    resolved configuration (artifact paths filled in, tau made absolute).

    The resolved config is saved as ``pipeline.cfg`` in the output directory.
    """
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    paths = PathsConfig(**{
        key: str(out / name) for key, name in ARTIFACT_FILES.items()
    })
    save_reference(result.reference, paths.reference_sample)
    save_detector(result.detector, paths.anomaly_model)
    save_aggregator(result.aggregator, paths.aggregator)
    surrogate.save_model(result.model, paths.surrogate_model)
    TrainingStore(paths.surrogate_model + TRAINING_STORE_SUFFIX).write_all(
        list(result.training_rows)
    )
    resolved = replace(cfg, tau_mae=result.tau, paths=paths)
    save_config(resolved, out / "pipeline.cfg")
    return resolved


def load_artifacts(cfg: PipelineConfig) -> tuple[
    MetaInformation, Aggregator, surrogate.SurrogateModel,
    list[tuple[int, np.ndarray, float]],
]:
    """Load everything the activator needs from the configured paths."""
    p = cfg.paths
    for name in ("reference_sample", "anomaly_model", "aggregator", "surrogate_model"):
        if getattr(p, name) is None:
            raise ConfigError(f"paths.{name} is not configured; run init first")
    meta = MetaInformation(
        detector=load_detector(p.anomaly_model),
        reference=load_reference(p.reference_sample),
    )
    aggregator = load_aggregator(p.aggregator)
    model = surrogate.load_model(p.surrogate_model)
    store_path = Path(p.surrogate_model + TRAINING_STORE_SUFFIX)
    training_rows: list[tuple[int, np.ndarray, float]] = []
    if store_path.exists():
        ids, X, y = TrainingStore(store_path).load()
        training_rows = [(int(i), x, float(t)) for i, x, t in zip(ids, X, y)]
    return meta, aggregator, model, training_rows


@dataclass
class RunSummary:
    windows: int
    records: int
    checkpoints: int
    retrains: int
    alert: bool
    final_mode: Mode


def run_stream(
    cfg: PipelineConfig,
    windows: Iterable[DataWindow],
    repository_path: str | Path,
    eval_log_path: str | Path,
    canonical: bool = False,
) -> RunSummary:
    """Drive the activator over a window stream, owning its output files."""
    if cfg.tau_mae is None:
        raise ConfigError("tau_mae is not resolved; run init first")
    meta, aggregator, model, training_rows = load_artifacts(cfg)
    n_windows = 0
    n_records = 0
    with RepositoryWriter(repository_path, canonical=canonical) as repo, \
            EvalLog(eval_log_path) as eval_log:
        activator = Activator(
            cfg, meta, aggregator, model, repo, eval_log,
            tau=cfg.tau_mae, training_rows=training_rows,
        )
        for window in windows:
            n_records += len(activator.process(window))
            n_windows += 1
    return RunSummary(
        windows=n_windows,
        records=n_records,
        checkpoints=activator.chunk_index,
        retrains=len(activator.retrained_models),
        alert=activator.alert,
        final_mode=activator.mode,
    )
