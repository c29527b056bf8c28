"""Throughput measurement: engine steps per second with a phase breakdown.

Episodes run back to back, regenerating the world on termination.  Reported
throughput is engine steps over wall time of the measured section; phase
timers separate control (autopilots), dynamics, vision, observation assembly
and regeneration.  The default report is single-worker; a multi-worker mode
aggregates throughput over independent worlds in separate processes.
"""

from __future__ import annotations

import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

from .runner import EpisodeDriver
from .scenario import ScenarioFile, parse_scenario, serialize_scenario


class PhaseProfiler:
    """Accumulates wall time per named phase via start/lap pairs."""

    def __init__(self):
        self.seconds: dict[str, float] = {}

    def start(self) -> float:
        return time.perf_counter()

    def lap(self, name: str, since: float) -> float:
        now = time.perf_counter()
        self.seconds[name] = self.seconds.get(name, 0.0) + (now - since)
        return now


@dataclass
class BenchmarkResult:
    steps: int
    episodes: int
    elapsed_seconds: float
    steps_per_second: float
    phase_seconds: dict[str, float] = field(default_factory=dict)

    def summary_lines(self) -> list[str]:
        lines = [
            f"steps            {self.steps}",
            f"episodes         {self.episodes}",
            f"elapsed_seconds  {self.elapsed_seconds:.3f}",
            f"steps_per_second {self.steps_per_second:.1f}",
        ]
        for name in sorted(self.phase_seconds):
            share = self.phase_seconds[name] / self.elapsed_seconds if self.elapsed_seconds else 0.0
            lines.append(f"phase {name:<12} {self.phase_seconds[name]:.3f}s ({share:.1%})")
        return lines


def run_benchmark(
    scenario: ScenarioFile,
    steps: int | None = None,
    seconds: float | None = None,
    warmup_steps: int = 200,
) -> BenchmarkResult:
    """Measure steady-state throughput of a scenario with built-in controllers.

    Stops after ``steps`` engine steps or ``seconds`` of wall time, whichever
    is given (steps wins when both are).  A short untimed warmup builds the
    visibility tables and caches first.
    """
    if steps is None and seconds is None:
        steps = 2000
    driver = EpisodeDriver(scenario)
    profiler = PhaseProfiler()

    driver.start_episode()
    for _ in range(warmup_steps):
        if driver.state.terminated.terminated:
            driver.start_episode()
        driver.advance()
    if driver.state.terminated.terminated:
        driver.start_episode()

    counted = 0
    episodes = 0
    t0 = time.perf_counter()
    while True:
        if driver.state.terminated.terminated:
            tick = profiler.start()
            driver.start_episode()
            episodes += 1
            profiler.lap("regenerate", tick)
        tick = profiler.start()
        actions_result = driver.advance(profiler=_AdvanceProfiler(profiler, tick))
        counted += 1
        if steps is not None and counted >= steps:
            break
        if seconds is not None and steps is None and time.perf_counter() - t0 >= seconds:
            break
    elapsed = time.perf_counter() - t0
    del actions_result

    return BenchmarkResult(
        steps=counted,
        episodes=episodes,
        elapsed_seconds=elapsed,
        steps_per_second=counted / elapsed if elapsed > 0 else float("inf"),
        phase_seconds=dict(profiler.seconds),
    )


@dataclass
class MultiWorkerBenchmark:
    workers: list[BenchmarkResult]
    aggregate_steps_per_second: float

    def summary_lines(self) -> list[str]:
        lines = [f"workers          {len(self.workers)}"]
        for i, result in enumerate(self.workers):
            lines.append(f"worker {i}: {result.steps_per_second:.1f} steps/s over {result.steps} steps")
        lines.append(f"aggregate_steps_per_second {self.aggregate_steps_per_second:.1f}")
        return lines


def _bench_worker(scenario_text: str, steps: int | None, seconds: float | None) -> BenchmarkResult:
    return run_benchmark(parse_scenario(scenario_text), steps=steps, seconds=seconds)


def run_benchmark_multiworker(
    scenario: ScenarioFile,
    workers: int,
    steps: int | None = None,
    seconds: float | None = None,
) -> MultiWorkerBenchmark:
    """Aggregate throughput of independent worlds in separate processes.

    Each worker owns its own world and reports its own steps/s; the
    aggregate is their sum.
    """
    text = serialize_scenario(scenario)
    with ProcessPoolExecutor(max_workers=workers) as pool:
        results = list(pool.map(_bench_worker, [text] * workers, [steps] * workers, [seconds] * workers))
    return MultiWorkerBenchmark(
        workers=results,
        aggregate_steps_per_second=sum(r.steps_per_second for r in results),
    )


class _AdvanceProfiler:
    """Splits the driver's advance between control time and engine phases.

    The engine's step() laps dynamics/vision/observation itself; everything
    before its first lap is controller decision time.
    """

    def __init__(self, profiler: PhaseProfiler, started: float):
        self._profiler = profiler
        self._control_since = started
        self._charged_control = False

    def start(self) -> float:
        now = time.perf_counter()
        if not self._charged_control:
            self._profiler.seconds["control"] = (
                self._profiler.seconds.get("control", 0.0) + (now - self._control_since)
            )
            self._charged_control = True
        return now

    def lap(self, name: str, since: float) -> float:
        return self._profiler.lap(name, since)
