"""Synthetic clean-stream generation and fault injection.

The mutant simulator turns clean windows into windows with known, exactly
accounted quality issues. Each mutant class degrades one dimension:

* anomaly spikes (accuracy): value pushed several window-stds away, kept
  inside the integrity bounds,
* missing markers (completeness),
* out-of-range values (consistency): pushed past a bound by a fixed margin,
* distribution shift (timeliness and skewness): all-or-nothing shift of the
  untouched cells, fired with probability pct/100.

Cell-level mutants use disjoint index sets of exact size round(pct/100 * N),
so the completeness and consistency scores of a mutated clean window equal
the planned fractions up to that rounding. Everything is deterministic: the
per-window generator is seeded with ``seed XOR window_id``.
"""

from dataclasses import dataclass, replace

import numpy as np

from .config import MUTATION_CLASSES, PipelineConfig
from .errors import PlanInfeasible
from .model import DataWindow


@dataclass(frozen=True)
class GeneratorParams:
    """Clean synthetic stream: a gently decaying trend plus Gaussian noise.

    Each window is one decay cycle, so every clean window is drawn from the
    same distribution and a reference fitted on early windows stays valid.
    """

    baseline: float = 80.0
    amplitude: float = 8.0
    decay: float = 3.0
    noise_std: float = 2.0


def generate_clean_window(
    window_id: int,
    window_size: int,
    seed: int,
    params: GeneratorParams = GeneratorParams(),
) -> DataWindow:
    rng = np.random.default_rng(seed ^ window_id)
    u = np.linspace(0.0, 1.0, window_size)
    values = (
        params.baseline
        + params.amplitude * np.exp(-params.decay * u)
        + rng.normal(0.0, params.noise_std, window_size)
    )
    return DataWindow(window_id, values, np.zeros(window_size, dtype=bool))


def generate_clean_stream(
    n_windows: int,
    window_size: int,
    seed: int,
    params: GeneratorParams = GeneratorParams(),
    start_id: int = 0,
):
    """Yield n_windows deterministic clean windows."""
    for i in range(n_windows):
        yield generate_clean_window(start_id + i, window_size, seed, params)


@dataclass(frozen=True)
class MutationPlan:
    """Exact injection recipe for one window.

    The three cell-level percentages must fit together in one window
    (their sum cannot exceed 100). Integrity bounds are carried along so
    spikes can stay inside them and out-of-range values can be pushed
    strictly past them.
    """

    per_dimension_pct: dict[str, float]
    seed: int
    shift_magnitude: float
    spike_magnitude: float
    out_of_range_margin: float
    integrity_lo: float
    integrity_hi: float

    def __post_init__(self):
        for name in MUTATION_CLASSES:
            if name not in self.per_dimension_pct:
                raise ValueError(f"plan is missing class '{name}'")
            pct = self.per_dimension_pct[name]
            if not 0.0 <= pct <= 100.0:
                raise ValueError(f"percentage for '{name}' must be in [0, 100] (got {pct})")
        cell_total = sum(
            self.per_dimension_pct[name]
            for name in ("accuracy", "completeness", "consistency")
        )
        if cell_total > 100.0:
            raise ValueError(
                f"cell-level percentages sum to {cell_total}, cannot exceed 100"
            )
        if self.out_of_range_margin <= 0:
            raise ValueError("out_of_range_margin must be > 0")
        if not self.integrity_lo < self.integrity_hi:
            raise ValueError("integrity bounds must satisfy lo < hi")

    @classmethod
    def from_config(cls, cfg: PipelineConfig, **overrides) -> "MutationPlan":
        kwargs = dict(
            per_dimension_pct=dict(cfg.mutation_percentages),
            seed=cfg.seed,
            shift_magnitude=cfg.shift_magnitude,
            spike_magnitude=cfg.spike_magnitude,
            out_of_range_margin=cfg.out_of_range_margin,
            integrity_lo=cfg.integrity_min,
            integrity_hi=cfg.integrity_max,
        )
        kwargs.update(overrides)
        return cls(**kwargs)

    def zeroed(self) -> "MutationPlan":
        return replace(self, per_dimension_pct={k: 0.0 for k in MUTATION_CLASSES})


@dataclass(frozen=True)
class MutationLedger:
    """Exact account of what mutate_window changed.

    entries lists (cell index, class) for every cell-level mutant, sorted by
    index. distribution_shift records the applied window-level shift delta,
    or None when the shift did not fire.
    """

    window_id: int
    entries: tuple[tuple[int, str], ...] = ()
    distribution_shift: float | None = None

    @property
    def mutated_indices(self) -> set[int]:
        return {idx for idx, _ in self.entries}

    def count(self, mutant_class: str) -> int:
        return sum(1 for _, cls in self.entries if cls == mutant_class)


def _exact_count(pct: float, n: int) -> int:
    return int(round(pct / 100.0 * n))


def mutate_window(
    window: DataWindow, plan: MutationPlan
) -> tuple[DataWindow, MutationLedger]:
    """Apply the plan to a clean window; returns the mutant and its ledger.

    The window must carry no missing cells so the ledger accounting stays
    exact. An all-zero plan returns a window equal to the input.
    """
    if window.missing.any():
        raise ValueError("mutate_window requires a clean window (no missing cells)")
    n = window.n
    k_spike = _exact_count(plan.per_dimension_pct["accuracy"], n)
    k_miss = _exact_count(plan.per_dimension_pct["completeness"], n)
    k_oor = _exact_count(plan.per_dimension_pct["consistency"], n)
    if k_spike + k_miss + k_oor > n:
        raise PlanInfeasible(
            f"{k_spike + k_miss + k_oor} disjoint cell mutants do not fit in {n} cells"
        )

    rng = np.random.default_rng(plan.seed ^ window.window_id)
    values = window.values.copy()
    missing = np.zeros(n, dtype=bool)
    std = float(window.values.std())
    scale = std if std > 0 else 1.0  # constant windows still get real mutants
    lo, hi = plan.integrity_lo, plan.integrity_hi

    perm = rng.permutation(n)
    idx_spike = perm[:k_spike]
    idx_miss = perm[k_spike : k_spike + k_miss]
    idx_oor = perm[k_spike + k_miss : k_spike + k_miss + k_oor]
    idx_untouched = perm[k_spike + k_miss + k_oor :]

    entries: list[tuple[int, str]] = []

    if k_spike:
        delta = plan.spike_magnitude * scale
        signs = rng.choice([-1.0, 1.0], size=k_spike)
        cand = values[idx_spike] + signs * delta
        out = (cand < lo) | (cand > hi)
        cand[out] = values[idx_spike][out] - signs[out] * delta
        still_out = (cand < lo) | (cand > hi)
        cand[still_out] = np.clip(values[idx_spike][still_out] + signs[still_out] * delta, lo, hi)
        values[idx_spike] = cand
        entries += [(int(i), "accuracy") for i in idx_spike]

    if k_miss:
        missing[idx_miss] = True
        values[idx_miss] = 0.0
        entries += [(int(i), "completeness") for i in idx_miss]

    if k_oor:
        sides = rng.choice([-1.0, 1.0], size=k_oor)
        values[idx_oor] = np.where(
            sides < 0, lo - plan.out_of_range_margin, hi + plan.out_of_range_margin
        )
        entries += [(int(i), "consistency") for i in idx_oor]

    shift_delta: float | None = None
    pct_shift = plan.per_dimension_pct["distribution"]
    if pct_shift > 0 and rng.random() < pct_shift / 100.0:
        shift_delta = float(rng.choice([-1.0, 1.0]) * plan.shift_magnitude * scale)
        if idx_untouched.size:
            # Clip back into the bounds so the shift never leaks into the
            # consistency count.
            values[idx_untouched] = np.clip(values[idx_untouched] + shift_delta, lo, hi)

    entries.sort()
    mutated = DataWindow(
        window.window_id, values, missing,
        timestamps=window.timestamps, partial=window.partial,
    )
    ledger = MutationLedger(
        window_id=window.window_id,
        entries=tuple(entries),
        distribution_shift=shift_delta,
    )
    return mutated, ledger


#: Seed offset separating the synthetic replay stream from the
#: initialization stream of the same configuration.
SYNTHETIC_RUN_SEED_OFFSET = 777003

#: Combined cell-mutant budget for drawn plans, kept below 100% so the three
#: per-class count roundings always fit in the window.
_DRAW_BUDGET_PCT = 95.0


def synthetic_quality_stream(
    cfg: PipelineConfig,
    n_windows: int,
    seed_offset: int = SYNTHETIC_RUN_SEED_OFFSET,
    start_id: int = 0,
    params: GeneratorParams = GeneratorParams(),
):
    """Clean windows with drawn quality issues, for demos and replay tests.

    Per-window severities are drawn below the configured ceilings, so the
    stream mixes mild and severe issues the way production data would.
    """
    draw_rng = np.random.default_rng([cfg.seed, seed_offset])
    base = MutationPlan.from_config(cfg)
    ceilings = dict(cfg.mutation_percentages)
    for window in generate_clean_stream(
        n_windows, cfg.window_size, cfg.seed + seed_offset, params, start_id
    ):
        plan = draw_severity_plan(base, ceilings, draw_rng)
        mutated, _ = mutate_window(window, plan)
        yield mutated


def draw_severity_plan(
    base_plan: MutationPlan, ceilings: dict[str, float], rng: np.random.Generator
) -> MutationPlan:
    """Draw one window's severities uniformly below the configured ceilings.

    Used during initialization and benchmarking to produce diverse quality
    issues. Cell-level draws are rescaled proportionally when they would not
    fit together in one window; the combined budget is capped a little below
    100% so per-class rounding can never overflow the window. The
    distribution ceiling is passed through since mutate_window already gates
    it with a Bernoulli draw.
    """
    draws = {
        name: float(rng.uniform(0.0, ceilings.get(name, 0.0)))
        for name in ("accuracy", "completeness", "consistency")
    }
    total = sum(draws.values())
    if total > _DRAW_BUDGET_PCT:
        factor = _DRAW_BUDGET_PCT / total
        draws = {name: pct * factor for name, pct in draws.items()}
    draws["distribution"] = float(ceilings.get("distribution", 0.0))
    return replace(base_plan, per_dimension_pct=draws)
