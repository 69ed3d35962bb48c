"""Streaming data-quality scoring with a surrogate-accelerated fast path.

Two scoring routes over fixed-size stream windows: a standard path that
computes configurable per-dimension quality scores and consolidates them by
whitened first-principal-component projection, and a predicted path where a
regression-tree ensemble maps cheap window features straight to the
consolidated score. A chunk-level test oracle polices the predictor against
periodically computed ground truth and triggers retraining when it drifts.
"""

from .activator import (
    Activator,
    InitResult,
    Mode,
    load_artifacts,
    persist_initialization,
    run_initialization,
    run_stream,
)
from .aggregate import Aggregator, first_principal_component, standardize_zscore
from .anomaly import AnomalyDetector
from .config import (
    MUTATION_CLASSES,
    PathsConfig,
    PipelineConfig,
    load_config,
    parse_config,
    save_config,
    serialize_config,
    validate_config,
)
from .dimensions import (
    MetaInformation,
    ReferenceDistribution,
    build_reference,
    histogram,
    jensen_shannon_divergence,
    ks_statistic,
    normalize_minmax,
    score_accuracy,
    score_all_dimensions,
    score_completeness,
    score_consistency,
    score_skewness,
    score_timeliness,
    shannon_entropy,
)
from .features import FEATURE_NAMES, FEATURE_VERSION, extract_features
from .model import (
    DIMENSION_NAMES,
    ConsolidatedScore,
    DataWindow,
    DimensionScoreVector,
    ScoreMethod,
    ScoreRecord,
)
from .mutation import (
    GeneratorParams,
    MutationLedger,
    MutationPlan,
    draw_severity_plan,
    generate_clean_stream,
    mutate_window,
    synthetic_quality_stream,
)
from .oracle import OracleReport, evaluate_oracle
from .surrogate import SurrogateModel, load_model, save_model, train

__version__ = "0.1.0"
