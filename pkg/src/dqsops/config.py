"""Pipeline configuration: typed settings plus the `key = value` file grammar.

Grammar, one setting per line::

    # comment lines start with '#', blank lines are ignored
    key = value            # '#' also starts a trailing comment
    list_key = a, b, c     # lists are comma separated
    paths.aggregator = artifacts/aggregator.txt   # nested keys use a dot

Keys are exactly the PipelineConfig field names; mutation settings live
under the ``mutation.`` prefix and artifact locations under ``paths.``.
Serialising and re-parsing a valid configuration yields an equal value.
"""

from dataclasses import dataclass, field, replace
from pathlib import Path

from .errors import ConfigError
from .model import DIMENSION_NAMES

#: Mutant classes addressable by a mutation percentage. The first three act
#: on individual cells; "distribution" is a window-level shift.
MUTATION_CLASSES = ("accuracy", "completeness", "consistency", "distribution")


@dataclass(frozen=True)
class PathsConfig:
    """Locations of the fitted artifacts produced by initialization."""

    reference_sample: str | None = None
    anomaly_model: str | None = None
    aggregator: str | None = None
    surrogate_model: str | None = None
    score_repository: str | None = None


def _default_mutation_percentages() -> dict[str, float]:
    return {name: 20.0 for name in MUTATION_CLASSES}


@dataclass(frozen=True)
class PipelineConfig:
    window_size: int = 1000
    enabled_dimensions: tuple[str, ...] = DIMENSION_NAMES
    integrity_min: float = 0.0
    integrity_max: float = 150.0
    anomaly_threshold_k: float = 3.5
    histogram_bins: int = 32
    # Defaults to the integrity bounds when absent from the file.
    histogram_range: tuple[float, float] = (0.0, 150.0)
    beta: int = 10
    n_ground_truth: int = 1
    # Absolute oracle tolerance; when None it is derived at initialization as
    # tau_fraction times the std of the initialization consolidated scores.
    tau_mae: float | None = None
    tau_fraction: float = 0.1
    mutation_percentages: dict[str, float] = field(
        default_factory=_default_mutation_percentages
    )
    shift_magnitude: float = 3.0
    spike_magnitude: float = 10.0
    out_of_range_margin: float = 5.0
    seed: int = 0
    init_clean_windows: int = 50
    init_round_windows: int = 150
    init_budget_windows: int = 400
    reference_sample_size: int = 50000
    max_retrain_rounds: int = 3
    n_trees: int = 50
    max_depth: int = 8
    min_samples_leaf: int = 5
    paths: PathsConfig = field(default_factory=PathsConfig)


def validate_config(raw: PipelineConfig) -> PipelineConfig:
    """Check every invariant, naming the first violated constraint.

    Returns the config unchanged on success (defaults are filled during
    parsing; a directly constructed instance is validated as-is).
    """
    c = raw
    if c.window_size < 1:
        raise ConfigError(f"window_size must be >= 1 (got {c.window_size})")
    if not c.enabled_dimensions:
        raise ConfigError("enabled_dimensions must not be empty")
    seen = set()
    for name in c.enabled_dimensions:
        if name not in DIMENSION_NAMES:
            raise ConfigError(
                f"unknown dimension '{name}' (choose from {', '.join(DIMENSION_NAMES)})"
            )
        if name in seen:
            raise ConfigError(f"dimension '{name}' listed twice")
        seen.add(name)
    if not c.integrity_min < c.integrity_max:
        raise ConfigError(
            f"integrity_min must be < integrity_max "
            f"(got {c.integrity_min} >= {c.integrity_max})"
        )
    if c.anomaly_threshold_k <= 0:
        raise ConfigError(f"anomaly_threshold_k must be > 0 (got {c.anomaly_threshold_k})")
    if c.histogram_bins < 2:
        raise ConfigError(f"histogram_bins must be >= 2 (got {c.histogram_bins})")
    lo, hi = c.histogram_range
    if not lo < hi:
        raise ConfigError(f"histogram_range must satisfy lo < hi (got {lo} >= {hi})")
    if c.beta < 1:
        raise ConfigError(f"beta must be >= 1 (got {c.beta})")
    if not 1 <= c.n_ground_truth < c.beta:
        raise ConfigError(
            f"n_ground_truth must satisfy 1 <= n < beta "
            f"(got n={c.n_ground_truth}, beta={c.beta})"
        )
    if c.tau_mae is not None and c.tau_mae <= 0:
        raise ConfigError(f"tau_mae must be > 0 (got {c.tau_mae})")
    if c.tau_fraction <= 0:
        raise ConfigError(f"tau_fraction must be > 0 (got {c.tau_fraction})")
    for name in MUTATION_CLASSES:
        if name not in c.mutation_percentages:
            raise ConfigError(f"mutation.{name} is missing")
        pct = c.mutation_percentages[name]
        if not 0.0 <= pct <= 100.0:
            raise ConfigError(f"mutation.{name} must be in [0, 100] (got {pct})")
    for name in c.mutation_percentages:
        if name not in MUTATION_CLASSES:
            raise ConfigError(f"unknown mutation class '{name}'")
    if c.shift_magnitude < 0:
        raise ConfigError(f"mutation.shift_magnitude must be >= 0 (got {c.shift_magnitude})")
    if c.spike_magnitude < 0:
        raise ConfigError(f"mutation.spike_magnitude must be >= 0 (got {c.spike_magnitude})")
    if c.out_of_range_margin <= 0:
        raise ConfigError(
            f"mutation.out_of_range_margin must be > 0 (got {c.out_of_range_margin})"
        )
    if c.init_clean_windows < 1:
        raise ConfigError(f"init_clean_windows must be >= 1 (got {c.init_clean_windows})")
    if c.init_round_windows < 1:
        raise ConfigError(f"init_round_windows must be >= 1 (got {c.init_round_windows})")
    if c.init_budget_windows <= c.init_clean_windows:
        raise ConfigError(
            f"init_budget_windows must exceed init_clean_windows "
            f"(got {c.init_budget_windows} <= {c.init_clean_windows})"
        )
    if c.reference_sample_size < 30:
        raise ConfigError(
            f"reference_sample_size must be >= 30 (got {c.reference_sample_size})"
        )
    if c.max_retrain_rounds < 1:
        raise ConfigError(f"max_retrain_rounds must be >= 1 (got {c.max_retrain_rounds})")
    if c.n_trees < 1:
        raise ConfigError(f"n_trees must be >= 1 (got {c.n_trees})")
    if c.max_depth < 0:
        raise ConfigError(f"max_depth must be >= 0 (got {c.max_depth})")
    if c.min_samples_leaf < 1:
        raise ConfigError(f"min_samples_leaf must be >= 1 (got {c.min_samples_leaf})")
    return c


# Parsers for scalar fields, keyed by config-file key.
_INT_KEYS = {
    "window_size", "histogram_bins", "beta", "n_ground_truth", "seed",
    "init_clean_windows", "init_round_windows", "init_budget_windows",
    "reference_sample_size", "max_retrain_rounds", "n_trees", "max_depth",
    "min_samples_leaf",
}
_FLOAT_KEYS = {
    "integrity_min", "integrity_max", "anomaly_threshold_k", "tau_mae",
    "tau_fraction",
}
_MUTATION_FLOAT_KEYS = {"shift_magnitude", "spike_magnitude", "out_of_range_margin"}
_PATH_KEYS = {
    "reference_sample", "anomaly_model", "aggregator", "surrogate_model",
    "score_repository",
}


def _parse_int(key: str, token: str) -> int:
    try:
        return int(token)
    except ValueError:
        raise ConfigError(f"{key} must be an integer (got {token!r})") from None


def _parse_float(key: str, token: str) -> float:
    try:
        return float(token)
    except ValueError:
        raise ConfigError(f"{key} must be a number (got {token!r})") from None


def parse_config(text: str) -> PipelineConfig:
    """Parse configuration text, fill defaults, and validate."""
    values: dict[str, object] = {}
    mutation_pct: dict[str, float] = {}
    paths: dict[str, str] = {}
    histogram_range_given = False

    for lineno, raw_line in enumerate(text.splitlines(), start=1):
        line = raw_line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value' (got {raw_line!r})")
        key, _, value = line.partition("=")
        key = key.strip()
        value = value.strip()
        if key in _INT_KEYS:
            values[key] = _parse_int(key, value)
        elif key in _FLOAT_KEYS:
            values[key] = _parse_float(key, value)
        elif key == "enabled_dimensions":
            values[key] = tuple(tok.strip() for tok in value.split(",") if tok.strip())
        elif key == "histogram_range":
            parts = [tok.strip() for tok in value.split(",")]
            if len(parts) != 2:
                raise ConfigError(f"histogram_range needs two values (got {value!r})")
            values[key] = (_parse_float(key, parts[0]), _parse_float(key, parts[1]))
            histogram_range_given = True
        elif key.startswith("mutation."):
            sub = key[len("mutation."):]
            if sub in _MUTATION_FLOAT_KEYS:
                values[sub] = _parse_float(key, value)
            elif sub in MUTATION_CLASSES:
                mutation_pct[sub] = _parse_float(key, value)
            else:
                raise ConfigError(f"unknown configuration key '{key}'")
        elif key.startswith("paths."):
            sub = key[len("paths."):]
            if sub not in _PATH_KEYS:
                raise ConfigError(f"unknown configuration key '{key}'")
            paths[sub] = value
        else:
            raise ConfigError(f"unknown configuration key '{key}'")

    cfg = PipelineConfig()
    merged_pct = dict(cfg.mutation_percentages)
    merged_pct.update(mutation_pct)
    values["mutation_percentages"] = merged_pct
    if paths:
        values["paths"] = PathsConfig(**paths)
    cfg = replace(cfg, **values)
    if not histogram_range_given and (
        "integrity_min" in values or "integrity_max" in values
    ):
        cfg = replace(cfg, histogram_range=(cfg.integrity_min, cfg.integrity_max))
    return validate_config(cfg)


def serialize_config(cfg: PipelineConfig) -> str:
    """Render a config as file text; parse_config(serialize_config(c)) == c."""
    lines = [
        "# pipeline configuration",
        f"window_size = {cfg.window_size}",
        f"enabled_dimensions = {', '.join(cfg.enabled_dimensions)}",
        f"integrity_min = {cfg.integrity_min!r}",
        f"integrity_max = {cfg.integrity_max!r}",
        f"anomaly_threshold_k = {cfg.anomaly_threshold_k!r}",
        f"histogram_bins = {cfg.histogram_bins}",
        f"histogram_range = {cfg.histogram_range[0]!r}, {cfg.histogram_range[1]!r}",
        f"beta = {cfg.beta}",
        f"n_ground_truth = {cfg.n_ground_truth}",
    ]
    if cfg.tau_mae is not None:
        lines.append(f"tau_mae = {cfg.tau_mae!r}")
    lines.append(f"tau_fraction = {cfg.tau_fraction!r}")
    for name in MUTATION_CLASSES:
        lines.append(f"mutation.{name} = {cfg.mutation_percentages[name]!r}")
    lines += [
        f"mutation.shift_magnitude = {cfg.shift_magnitude!r}",
        f"mutation.spike_magnitude = {cfg.spike_magnitude!r}",
        f"mutation.out_of_range_margin = {cfg.out_of_range_margin!r}",
        f"seed = {cfg.seed}",
        f"init_clean_windows = {cfg.init_clean_windows}",
        f"init_round_windows = {cfg.init_round_windows}",
        f"init_budget_windows = {cfg.init_budget_windows}",
        f"reference_sample_size = {cfg.reference_sample_size}",
        f"max_retrain_rounds = {cfg.max_retrain_rounds}",
        f"n_trees = {cfg.n_trees}",
        f"max_depth = {cfg.max_depth}",
        f"min_samples_leaf = {cfg.min_samples_leaf}",
    ]
    for name in sorted(_PATH_KEYS):
        value = getattr(cfg.paths, name)
        if value is not None:
            lines.append(f"paths.{name} = {value}")
    return "\n".join(lines) + "\n"


def load_config(path: str | Path) -> PipelineConfig:
    return parse_config(Path(path).read_text())


def save_config(cfg: PipelineConfig, path: str | Path) -> None:
    Path(path).write_text(serialize_config(cfg))
