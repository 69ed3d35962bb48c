import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from dqsops import PipelineConfig, generate_clean_stream
from dqsops.activator import persist_initialization, run_initialization
from dqsops.bench import run_bench


def desk_config(**overrides) -> PipelineConfig:
    """Small deterministic pipeline that initializes in about a second."""
    kwargs = dict(
        window_size=300,
        init_clean_windows=20,
        init_round_windows=60,
        init_budget_windows=200,
        reference_sample_size=6000,
        tau_mae=0.6,
        seed=0,
    )
    kwargs.update(overrides)
    return PipelineConfig(**kwargs)


@pytest.fixture(scope="session")
def desk_cfg() -> PipelineConfig:
    return desk_config()


@pytest.fixture(scope="session")
def desk_init(desk_cfg):
    source = generate_clean_stream(
        desk_cfg.init_budget_windows, desk_cfg.window_size, desk_cfg.seed
    )
    return run_initialization(source, desk_cfg)


@pytest.fixture(scope="session")
def desk_artifacts(desk_cfg, desk_init, tmp_path_factory):
    """Persisted artifacts plus the resolved config for CLI-level tests."""
    out = tmp_path_factory.mktemp("artifacts")
    resolved = persist_initialization(desk_init, desk_cfg, out)
    return resolved, out


@pytest.fixture(scope="session")
def bench_rows():
    """One default-scale bench shared by the timing assertions."""
    return run_bench(PipelineConfig(), measured=200, warmup=20)
