"""Benchmark report files: delimited metrics plus a rendered figure."""

from __future__ import annotations

import csv
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt

from .benchmark import BenchmarkResult


def save_benchmark_report(result: BenchmarkResult, outdir) -> tuple[Path, Path]:
    """Write benchmark.csv and benchmark.png under ``outdir``.

    The CSV holds one metric per row; the figure shows the per-phase wall
    time breakdown with the headline throughput in the title.
    """
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)

    csv_path = outdir / "benchmark.csv"
    with open(csv_path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["metric", "value"])
        writer.writerow(["steps", result.steps])
        writer.writerow(["episodes", result.episodes])
        writer.writerow(["elapsed_seconds", f"{result.elapsed_seconds:.6f}"])
        writer.writerow(["steps_per_second", f"{result.steps_per_second:.3f}"])
        for name in sorted(result.phase_seconds):
            writer.writerow([f"phase_{name}_seconds", f"{result.phase_seconds[name]:.6f}"])

    fig_path = outdir / "benchmark.png"
    names = sorted(result.phase_seconds)
    values = [result.phase_seconds[n] for n in names]
    fig, ax = plt.subplots(figsize=(6.4, 3.6))
    ax.barh(names, values, color="#4878a8")
    ax.set_xlabel("wall time (s)")
    ax.set_title(f"{result.steps_per_second:.0f} steps/s over {result.steps} steps")
    ax.grid(axis="x", alpha=0.3)
    fig.tight_layout()
    fig.savefig(fig_path, dpi=120)
    plt.close(fig)
    return csv_path, fig_path
