"""Episode execution and trace recording for built-in controllers.

A trace is line-delimited JSON: one header record followed by one record per
step.  Serialization is canonical (sorted keys, no whitespace), so replaying
the same scenario and seed reproduces the trace byte for byte.
"""

from __future__ import annotations

from dataclasses import dataclass, field
import json

from . import __version__
from .autopilot import Controller, build_controller
from .dynamics import Action, StepResult, encode_action, step
from .errors import CliError
from .rng import RNG_NAME
from .scenario import ScenarioFile, build_world, scenario_digest
from .types import VisionMode
from .vision import Observation, build_allocentric, flatten_observation, observation_manifest, observe
from .world import WorldState, generate_world


@dataclass
class EpisodeTrace:
    header: dict
    steps: list[dict] = field(default_factory=list)

    def lines(self):
        yield _dumps(self.header)
        for record in self.steps:
            yield _dumps(record)

    def to_jsonl(self) -> str:
        return "".join(line + "\n" for line in self.lines())

    def write(self, path) -> None:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(self.to_jsonl())


def _dumps(record: dict) -> str:
    return json.dumps(record, sort_keys=True, separators=(",", ":"))


class EpisodeDriver:
    """Owns one world plus its built-in controllers across episodes."""

    def __init__(self, scenario: ScenarioFile, seed: int | None = None, max_steps: int | None = None):
        self.scenario = scenario
        state, controller_names = build_world(scenario, seed=seed, max_steps=max_steps)
        external = sorted(a for a, name in controller_names.items() if name == "external")
        if external:
            raise CliError(
                f"agents {external} use the 'external' controller; drive this scenario "
                "through the environment binding instead of the episode runner"
            )
        self.state: WorldState = state
        self.controllers: dict[str, Controller] = {
            agent_id: build_controller(name) for agent_id, name in controller_names.items()
        }
        self.controller_obs: dict[str, Observation] = {}

    def start_episode(self) -> None:
        generate_world(self.state)
        for controller in self.controllers.values():
            controller.reset(self.state.world_size)
        self.controller_obs = {
            agent_id: observe(self.state, agent_id, mode=VisionMode.ALLOCENTRIC)
            for agent_id in self.state.config.action_order
        }

    def advance(self, profiler=None) -> tuple[dict[str, Action], StepResult]:
        """Query controllers in action order, step once, refresh their views."""
        state = self.state
        actions: dict[str, Action] = {}
        for agent_id in state.config.action_order:
            agent = state.agents[agent_id]
            actions[agent_id] = self.controllers[agent_id].act(
                self.controller_obs[agent_id], agent.position, agent.orientation, state.rng
            )
        result = step(state, actions, profiler=profiler)
        # Controllers always consume allocentric frames; rebuild from the
        # step's masks only for egocentric-configured agents.
        for agent_id in state.config.action_order:
            if state.agents[agent_id].vision.mode is VisionMode.EGOCENTRIC:
                self.controller_obs[agent_id] = build_allocentric(
                    state, agent_id, result.masks[agent_id]
                )
            else:
                self.controller_obs[agent_id] = result.observations[agent_id]
        return actions, result


def run_episode(
    scenario: ScenarioFile,
    seed: int | None = None,
    max_steps: int | None = None,
    include_observations: bool = False,
    frame_hook=None,
) -> EpisodeTrace:
    """Generate a world and run built-in controllers until termination.

    ``frame_hook(state, step_index)``, when given, is invoked on the initial
    state and after every step (for rendering).  Deterministic per seed.
    """
    driver = EpisodeDriver(scenario, seed=seed, max_steps=max_steps)
    state = driver.state
    header = {
        "type": "header",
        "engine": f"gridarena-{__version__}",
        "rng": RNG_NAME,
        "scenario_digest": scenario_digest(scenario),
        "scenario_name": scenario.name,
        "seed": state.config.seed,
        "max_steps": state.config.max_steps,
        "world_size": state.world_size,
        "action_order": list(state.config.action_order),
    }
    trace = EpisodeTrace(header=header)

    driver.start_episode()
    if include_observations:
        header["observation_manifest"] = {
            agent_id: [[name, list(shape)] for name, shape in observation_manifest(obs)]
            for agent_id, obs in (
                (a, observe(state, a)) for a in state.config.action_order
            )
        }
    if frame_hook is not None:
        frame_hook(state, 0)

    while not state.terminated.terminated:
        actions, result = driver.advance()
        record = {
            "type": "step",
            "step": state.step_count,
            "actions": {agent_id: encode_action(a) for agent_id, a in actions.items()},
            "events": [event.to_dict() for event in result.events],
            "rewards": result.rewards,
            "terminated": {
                "terminated": result.terminated.terminated,
                "cause": result.terminated.cause.value,
            },
        }
        if include_observations:
            record["observations"] = {
                agent_id: flatten_observation(obs).tolist()
                for agent_id, obs in result.observations.items()
            }
        trace.steps.append(record)
        if frame_hook is not None:
            frame_hook(state, state.step_count)

    return trace
