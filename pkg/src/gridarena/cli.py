"""Scenario-driven command line: run, bench and validate.

Exit codes: 0 on success, 2 on scenario schema errors, 1 on other failures.
The only environment variable honoured is GRIDARENA_LOG_LEVEL.
"""

from __future__ import annotations

import logging
import os
import sys
from pathlib import Path

import click

from .benchmark import run_benchmark, run_benchmark_multiworker
from .errors import GridArenaError, SchemaError
from .render import frame_to_text, render_frame, render_ppm
from .report import save_benchmark_report
from .runner import run_episode
from .scenario import load_scenario

log = logging.getLogger("gridarena")


def _setup_logging() -> None:
    level = os.environ.get("GRIDARENA_LOG_LEVEL", "WARNING").upper()
    logging.basicConfig(level=getattr(logging, level, logging.WARNING), format="%(message)s")


def _load(scenario_path: str):
    try:
        return load_scenario(scenario_path)
    except SchemaError as err:
        click.echo(f"{scenario_path}: invalid scenario", err=True)
        for issue in err.issues:
            click.echo(f"  {issue}", err=True)
        sys.exit(2)
    except OSError as err:
        click.echo(str(err), err=True)
        sys.exit(1)


@click.group()
def main():
    """Deterministic grid-world episode runner and benchmark."""
    _setup_logging()


@main.command()
@click.argument("scenario", type=click.Path(exists=True, dir_okay=False))
@click.option("--seed", type=int, default=None, help="Override the scenario seed.")
@click.option("--max-steps", type=int, default=None, help="Override the step limit.")
@click.option("--trace", "trace_path", type=click.Path(dir_okay=False), default=None,
              help="Write the episode trace (JSON lines) here.")
@click.option("--render", "render_dir", type=click.Path(file_okay=False), default=None,
              help="Write per-step text and pixmap frames into this directory.")
@click.option("--trace-observations", is_flag=True, default=False,
              help="Include flattened per-step observations in the trace.")
def run(scenario, seed, max_steps, trace_path, render_dir, trace_observations):
    """Run one episode of SCENARIO with its built-in controllers."""
    sc = _load(scenario)
    frame_hook = None
    if render_dir is not None:
        out = Path(render_dir)
        out.mkdir(parents=True, exist_ok=True)

        def frame_hook(state, index):
            (out / f"step_{index:04d}.txt").write_text(frame_to_text(render_frame(state)))
            (out / f"step_{index:04d}.ppm").write_bytes(render_ppm(state))

    try:
        trace = run_episode(
            sc,
            seed=seed,
            max_steps=max_steps,
            include_observations=trace_observations,
            frame_hook=frame_hook,
        )
    except GridArenaError as err:
        click.echo(str(err), err=True)
        sys.exit(1)

    if trace_path is not None:
        trace.write(trace_path)
        log.info("trace written to %s", trace_path)
    last = trace.steps[-1] if trace.steps else {}
    cause = last.get("terminated", {}).get("cause", "none")
    totals = {}
    for record in trace.steps:
        for agent_id, value in record["rewards"].items():
            totals[agent_id] = totals.get(agent_id, 0.0) + value
    click.echo(f"episode finished after {len(trace.steps)} steps ({cause})")
    for agent_id in sorted(totals):
        click.echo(f"  total reward {agent_id}: {totals[agent_id]:.2f}")


@main.command()
@click.argument("scenario", type=click.Path(exists=True, dir_okay=False))
@click.option("--steps", type=int, default=None, help="Engine steps to measure.")
@click.option("--seconds", type=float, default=None, help="Wall-time budget to measure.")
@click.option("--workers", type=int, default=1, show_default=True,
              help="Independent worlds in separate processes; reports the aggregate.")
@click.option("--report", "report_dir", type=click.Path(file_okay=False), default=None,
              help="Write benchmark.csv and benchmark.png into this directory.")
def bench(scenario, steps, seconds, workers, report_dir):
    """Measure steps per second on SCENARIO."""
    sc = _load(scenario)
    try:
        if workers > 1:
            multi = run_benchmark_multiworker(sc, workers=workers, steps=steps, seconds=seconds)
            for line in multi.summary_lines():
                click.echo(line)
            result = multi.workers[0]
        else:
            result = run_benchmark(sc, steps=steps, seconds=seconds)
            for line in result.summary_lines():
                click.echo(line)
    except GridArenaError as err:
        click.echo(str(err), err=True)
        sys.exit(1)
    log.info("benchmark of %s finished", scenario)
    if report_dir is not None:
        csv_path, fig_path = save_benchmark_report(result, report_dir)
        click.echo(f"report written to {csv_path} and {fig_path}")


@main.command()
@click.argument("scenario", type=click.Path(exists=True, dir_okay=False))
def validate(scenario):
    """Check SCENARIO against the schema and report every issue."""
    sc = _load(scenario)
    click.echo(
        f"OK: {scenario} ({sc.world_size}x{sc.world_size}, "
        f"{len(sc.agents)} agents, {len(sc.foods)} foods, {len(sc.obstacles)} obstacles)"
    )


if __name__ == "__main__":
    main()
