"""Command-line surface.

Subcommands:
    init            fit all artifacts from a synthetic (or file) clean stream
    run             drive the activator over a stream (file, stdin, synthetic)
    score           one-shot standard scoring of a file
    bench           per-window timing of both scoring paths, CSV + figure
    sweep-mutation  initialization quality across mutation ceilings, CSV + figure

Exit codes: 0 success, 1 configuration error, 2 data error,
3 initialization budget exhausted, 4 alert raised.

The DQSOPS_LOG environment variable sets the log level (DEBUG, INFO, ...).
"""

import argparse
import logging
import os
import sys
from dataclasses import replace
from pathlib import Path

from .activator import (
    load_artifacts,
    persist_initialization,
    run_initialization,
    run_stream,
)
from .bench import DEFAULT_SWEEP_GRID, run_bench, run_mutation_sweep
from .config import PipelineConfig, load_config
from .dimensions import score_all_dimensions
from .errors import ConfigError, DqError, InitializationBudgetExhausted, ParseError
from .mutation import generate_clean_stream, synthetic_quality_stream
from .reporting import (
    render_bench_figure,
    render_sweep_figure,
    write_bench_csv,
    write_sweep_csv,
)
from .streams import open_stream

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_CONFIG_ERROR = 1
EXIT_DATA_ERROR = 2
EXIT_INIT_BUDGET = 3
EXIT_ALERT = 4


def _configure_logging() -> None:
    level = os.environ.get("DQSOPS_LOG", "WARNING").upper()
    logging.basicConfig(
        level=getattr(logging, level, logging.WARNING),
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
    )


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="dqsops", description="Streaming data-quality scoring pipeline"
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, *, out_default="."):
        p.add_argument("--config", required=True, help="configuration file path")
        p.add_argument("--seed", type=int, default=None, help="override the config seed")
        p.add_argument("--out", default=out_default, help="output directory")

    p_init = sub.add_parser("init", help="run the initialization phase")
    common(p_init, out_default="artifacts")
    p_init.add_argument(
        "--input", default=None,
        help="clean stream file ('-' for stdin); defaults to the synthetic generator",
    )

    p_run = sub.add_parser("run", help="score a stream with the activator")
    common(p_run)
    p_run.add_argument(
        "--input", default=None,
        help="stream file ('-' for stdin); with --windows, a synthetic stream",
    )
    p_run.add_argument(
        "--windows", type=int, default=None, help="synthetic stream length in windows"
    )
    p_run.add_argument(
        "--canonical", action="store_true",
        help="write fixed wall-clock and duration columns for reproducibility checks",
    )

    p_score = sub.add_parser("score", help="one-shot standard scoring of a file")
    common(p_score)
    p_score.add_argument("--input", required=True, help="stream file ('-' for stdin)")
    p_score.add_argument("--format", choices=["csv"], default="csv")

    p_bench = sub.add_parser("bench", help="time both scoring paths")
    common(p_bench)
    p_bench.add_argument("--measured", type=int, default=200,
                         help="measured windows per cell")
    p_bench.add_argument("--warmup", type=int, default=20,
                         help="discarded warm-up windows per cell")
    p_bench.add_argument("--format", choices=["csv"], default="csv")

    p_sweep = sub.add_parser("sweep-mutation",
                             help="initialization quality across mutation ceilings")
    common(p_sweep)
    p_sweep.add_argument(
        "--grid", default=None,
        help="comma-separated mutation percentages "
             f"(default {','.join(str(int(p)) for p in DEFAULT_SWEEP_GRID)})",
    )
    p_sweep.add_argument("--validation-windows", type=int, default=60)
    p_sweep.add_argument("--format", choices=["csv"], default="csv")
    return parser


def _load_config(args) -> PipelineConfig:
    cfg = load_config(args.config)
    if args.seed is not None:
        cfg = replace(cfg, seed=args.seed)
    return cfg


def _cmd_init(args) -> int:
    cfg = _load_config(args)
    if args.input is not None:
        clean_source = open_stream(args.input, cfg.window_size)
    else:
        clean_source = generate_clean_stream(
            cfg.init_budget_windows, cfg.window_size, cfg.seed
        )
    exhausted = None
    try:
        result = run_initialization(clean_source, cfg)
    except InitializationBudgetExhausted as exc:
        if exc.best_result is None:
            raise
        exhausted = exc
        result = exc.best_result
    resolved = persist_initialization(result, cfg, args.out)
    last = result.rounds[-1]
    print(f"initialization used {result.windows_used} windows "
          f"in {len(result.rounds)} round(s)")
    print(f"tau = {result.tau!r}")
    print(f"validation MAE = {last.validation_mae!r}, "
          f"R2 = {'n/a' if last.validation_r2 is None else repr(last.validation_r2)}")
    print(f"artifacts written to {Path(args.out).resolve()}")
    print(f"resolved config: {Path(args.out) / 'pipeline.cfg'}")
    if exhausted is not None:
        print(f"warning: {exhausted}; best round persisted")
        return EXIT_INIT_BUDGET
    return EXIT_OK


def _cmd_run(args) -> int:
    cfg = _load_config(args)
    if args.input is not None:
        windows = open_stream(args.input, cfg.window_size)
    elif args.windows is not None:
        windows = synthetic_quality_stream(cfg, args.windows)
    else:
        raise ConfigError("run needs --input or --windows")
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    repo_path = out / "scores.csv"
    eval_path = out / "evaluation.log"
    summary = run_stream(cfg, windows, repo_path, eval_path, canonical=args.canonical)
    print(f"scored {summary.windows} windows ({summary.records} records), "
          f"{summary.checkpoints} chunk boundaries, "
          f"{summary.retrains} model swap(s), final mode {summary.final_mode.value}")
    print(f"repository: {repo_path}")
    print(f"evaluation log: {eval_path}")
    if summary.alert:
        (out / "status.txt").write_text("ALERT: retraining failed\n")
        print("ALERT: retraining exhausted its rounds; dual-path scoring continued")
        return EXIT_ALERT
    (out / "status.txt").write_text("ok\n")
    return EXIT_OK


def _cmd_score(args) -> int:
    cfg = _load_config(args)
    meta, aggregator, _, _ = load_artifacts(cfg)
    header_dims = ",".join(f"s_{name}" for name in cfg.enabled_dimensions)
    print(f"window_id,{header_dims},consolidated")
    for window in open_stream(args.input, cfg.window_size):
        vector = score_all_dimensions(window, meta, cfg)
        consolidated = aggregator.consolidate(vector)
        scores = ",".join(repr(vector.scores[name]) for name in cfg.enabled_dimensions)
        print(f"{window.window_id},{scores},{consolidated!r}")
    return EXIT_OK


def _cmd_bench(args) -> int:
    cfg = _load_config(args)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    rows = run_bench(cfg, measured=args.measured, warmup=args.warmup)
    csv_path = out / "bench.csv"
    fig_path = out / "bench.png"
    write_bench_csv(rows, csv_path)
    render_bench_figure(rows, fig_path)
    for row in rows:
        speedup = "" if row.speedup is None else f"  speedup {row.speedup:.2f}x"
        print(f"{row.dimension_count} dim {row.method:>9}: "
              f"mean {row.mean:.6f}s std {row.std:.6f}s cv {row.cv:.3f}{speedup}")
    print(f"wrote {csv_path} and {fig_path}")
    return EXIT_OK


def _cmd_sweep(args) -> int:
    cfg = _load_config(args)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    if args.grid is not None:
        try:
            grid = tuple(float(tok) for tok in args.grid.split(","))
        except ValueError:
            raise ConfigError(f"--grid must be comma-separated numbers (got {args.grid!r})")
    else:
        grid = DEFAULT_SWEEP_GRID
    rows = run_mutation_sweep(cfg, grid=grid, validation_windows=args.validation_windows)
    csv_path = out / "sweep.csv"
    fig_path = out / "sweep.png"
    write_sweep_csv(rows, csv_path)
    render_sweep_figure(rows, fig_path)
    for row in rows:
        r2 = "n/a" if row.r2 is None else f"{row.r2:.4f}"
        print(f"pct {row.pct:>5.1f}: MAE {row.mae:.6g}  R2 {r2}")
    print(f"wrote {csv_path} and {fig_path}")
    return EXIT_OK


_COMMANDS = {
    "init": _cmd_init,
    "run": _cmd_run,
    "score": _cmd_score,
    "bench": _cmd_bench,
    "sweep-mutation": _cmd_sweep,
}


def main(argv: list[str] | None = None) -> int:
    _configure_logging()
    args = build_parser().parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG_ERROR
    except (ParseError, FileNotFoundError) as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA_ERROR
    except InitializationBudgetExhausted as exc:
        print(f"initialization budget exhausted: {exc}", file=sys.stderr)
        return EXIT_INIT_BUDGET
    except (DqError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA_ERROR


if __name__ == "__main__":
    sys.exit(main())
