"""Report rendering: delimited output plus matplotlib figures.

Every report command writes a CSV (dot decimal separator, newline line
endings) and a PNG figure next to it. CSV content is deterministic given
the seed, except for the wall-time columns of the bench report.
"""

from pathlib import Path

from .bench import BenchRow, SweepRow


def write_bench_csv(rows: list[BenchRow], path: str | Path) -> None:
    lines = ["dimension_count,method,mean_seconds,std_seconds,cv,speedup"]
    for row in rows:
        speedup = "" if row.speedup is None else f"{row.speedup:.2f}"
        lines.append(
            f"{row.dimension_count},{row.method},{row.mean!r},{row.std!r},"
            f"{row.cv!r},{speedup}"
        )
    Path(path).write_text("\n".join(lines) + "\n")


def write_sweep_csv(rows: list[SweepRow], path: str | Path) -> None:
    lines = ["mutation_pct,mae,r2"]
    for row in rows:
        r2 = "" if row.r2 is None else repr(row.r2)
        lines.append(f"{row.pct!r},{row.mae!r},{r2}")
    Path(path).write_text("\n".join(lines) + "\n")


def _pyplot():
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    return plt


def render_bench_figure(rows: list[BenchRow], path: str | Path) -> None:
    """Mean per-window time by dimension count, one line per method, with
    the speedup on a second panel."""
    plt = _pyplot()
    counts = sorted({r.dimension_count for r in rows})
    std_means = [next(r.mean for r in rows
                      if r.dimension_count == c and r.method == "standard")
                 for c in counts]
    pred_means = [next(r.mean for r in rows
                       if r.dimension_count == c and r.method == "predicted")
                  for c in counts]
    speedups = [s / p for s, p in zip(std_means, pred_means)]

    fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(9, 3.5))
    ax1.plot(counts, std_means, "o-", label="standard")
    ax1.plot(counts, pred_means, "s-", label="predicted")
    ax1.set_yscale("log")
    ax1.set_xlabel("quality dimensions")
    ax1.set_ylabel("seconds per window")
    ax1.set_xticks(counts)
    ax1.legend()
    ax1.set_title("Scoring time per window")

    ax2.plot(counts, speedups, "d-", color="tab:green")
    ax2.set_xlabel("quality dimensions")
    ax2.set_ylabel("speedup (standard / predicted)")
    ax2.set_xticks(counts)
    ax2.set_title("Speedup")

    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def render_sweep_figure(rows: list[SweepRow], path: str | Path) -> None:
    """Oracle R2 and MAE against the training mutation percentage."""
    plt = _pyplot()
    pcts = [r.pct for r in rows]
    r2s = [float("nan") if r.r2 is None else r.r2 for r in rows]
    maes = [r.mae for r in rows]

    fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(9, 3.5))
    ax1.plot(pcts, r2s, "o-")
    ax1.set_xlabel("mutation percentage")
    ax1.set_ylabel("validation R2")
    ax1.set_title("R2")

    ax2.plot(pcts, maes, "o-", color="tab:red")
    ax2.set_xlabel("mutation percentage")
    ax2.set_ylabel("validation MAE")
    ax2.set_yscale("log")
    ax2.set_title("MAE")

    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
