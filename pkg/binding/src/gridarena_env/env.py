"""The environment handle: one world, its controllers, flat observation
buffers."""

from __future__ import annotations

import numpy as np

from gridarena import (
    StateError,
    VisionMode,
    build_allocentric,
    build_controller,
    build_world,
    decode_action,
    flatten_observation,
    generate_world,
    load_scenario,
    observation_manifest,
    observe,
    step,
)
from gridarena.scenario import ScenarioFile


class GridArenaEnv:
    """Owns one world exclusively; use one handle per thread.

    Agents whose scenario controller is ``external`` take their actions from
    ``step``; agents with built-in controllers act automatically, drawing
    from the world's RNG in action order exactly as the CLI runner does.
    """

    def __init__(self, scenario: ScenarioFile, seed: int | None = None):
        self.scenario = scenario
        self._seed = seed
        self._build(seed)
        self.buffers: dict[str, np.ndarray] = {}

    # -- lifecycle ---------------------------------------------------------

    def _build(self, seed: int | None) -> None:
        state, controller_names = build_world(self.scenario, seed=seed)
        self.state = state
        self.controllers = {
            agent_id: build_controller(name) for agent_id, name in controller_names.items()
        }
        self._controller_obs = {}

    @property
    def agents(self) -> tuple[str, ...]:
        return self.state.config.action_order

    @property
    def external_agents(self) -> tuple[str, ...]:
        return tuple(a for a in self.agents if self.controllers[a] is None)

    def reset(self, seed: int | None = None) -> dict[str, np.ndarray]:
        """Regenerate the world and return initial observations per agent.

        An explicit ``seed`` re-seeds the world, overriding the scenario
        seed; otherwise regeneration continues the current random stream.
        """
        if seed is not None:
            self._build(seed)
        generate_world(self.state)
        for controller in self.controllers.values():
            if controller is not None:
                controller.reset(self.state.world_size)
        self._controller_obs = {
            agent_id: observe(self.state, agent_id, mode=VisionMode.ALLOCENTRIC)
            for agent_id in self.agents
            if self.controllers[agent_id] is not None
        }
        observations = {agent_id: observe(self.state, agent_id) for agent_id in self.agents}
        self.buffers = {a: flatten_observation(o) for a, o in observations.items()}
        return dict(self.buffers)

    def close(self) -> None:
        self.buffers = {}
        self._controller_obs = {}

    # -- stepping ----------------------------------------------------------

    def step(self, actions: dict) -> tuple[dict[str, np.ndarray], dict[str, float], bool, dict]:
        """Advance one time step.

        ``actions`` maps every external agent id to a wire code (int 0-8 or
        a [look, move] pair).  Returns (observations, rewards, terminated,
        info); ``info`` carries the step number, events and the termination
        cause.
        """
        if self.state.terminated.terminated:
            raise StateError("environment is terminated; call reset first")
        unknown = set(actions) - set(self.agents)
        if unknown:
            raise ValueError(f"actions reference unknown agents: {sorted(unknown)}")

        decoded = {}
        for agent_id in self.agents:
            controller = self.controllers[agent_id]
            if controller is None:
                if agent_id not in actions:
                    raise ValueError(f"missing action for external agent {agent_id!r}")
                decoded[agent_id] = decode_action(actions[agent_id])
            else:
                if agent_id in actions:
                    raise ValueError(
                        f"agent {agent_id!r} is autopilot-controlled and takes no external action"
                    )
                agent = self.state.agents[agent_id]
                decoded[agent_id] = controller.act(
                    self._controller_obs[agent_id], agent.position, agent.orientation,
                    self.state.rng,
                )

        result = step(self.state, decoded)

        for agent_id, controller in self.controllers.items():
            if controller is None:
                continue
            if self.state.agents[agent_id].vision.mode is VisionMode.EGOCENTRIC:
                self._controller_obs[agent_id] = build_allocentric(
                    self.state, agent_id, result.masks[agent_id]
                )
            else:
                self._controller_obs[agent_id] = result.observations[agent_id]

        self.buffers = {
            agent_id: flatten_observation(obs)
            for agent_id, obs in result.observations.items()
        }
        info = {
            "step": self.state.step_count,
            "events": [event.to_dict() for event in result.events],
            "cause": result.terminated.cause.value,
        }
        return dict(self.buffers), dict(result.rewards), result.terminated.terminated, info

    # -- wire description ----------------------------------------------------

    def observation_manifest(self, agent_id: str):
        """(name, shape, offset, length) per field of the agent's flat buffer."""
        obs = observe(self.state, agent_id)
        manifest = []
        offset = 0
        for name, shape in observation_manifest(obs):
            length = int(np.prod(shape))
            manifest.append((name, tuple(shape), offset, length))
            offset += length
        return tuple(manifest)


EnvHandle = GridArenaEnv


def make_env(scenario_path, seed: int | None = None) -> GridArenaEnv:
    """Parse a scenario file, build and generate its world, return a handle."""
    env = GridArenaEnv(load_scenario(scenario_path), seed=seed)
    env.reset()
    return env


def reset(handle: GridArenaEnv, seed: int | None = None) -> dict[str, np.ndarray]:
    return handle.reset(seed=seed)


def step_env(handle: GridArenaEnv, actions: dict):
    return handle.step(actions)
