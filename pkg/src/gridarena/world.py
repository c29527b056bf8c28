"""World state and episode lifecycle.

A world is a square N x N grid populated by agents, foods and obstacles.
``create_world`` registers elements without positions; ``generate_world``
places them by sampling their spawn distributions and starts a fresh
episode.  An episode ends when the step limit is hit or every food has been
consumed, whichever comes first.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError
from .placement import AgentSpec, FoodSpec, ObstacleSpec, PlacementSpec, ShapeMatrix, place_all
from .rng import SplitMix64
from .types import Cell, ObstacleKind, Orientation, VisionParams


class TerminationCause(enum.Enum):
    NONE = "none"
    MAX_STEPS = "max_steps"
    ALL_FOOD_CONSUMED = "all_food_consumed"


@dataclass(frozen=True)
class TerminationStatus:
    terminated: bool
    cause: TerminationCause

    def __getitem__(self, index: int) -> bool:
        # Index 0 kept indexable for drop-in familiarity with flag arrays.
        if index != 0:
            raise IndexError("only index 0 is defined")
        return self.terminated

    def __bool__(self) -> bool:
        return self.terminated


RUNNING = TerminationStatus(False, TerminationCause.NONE)


@dataclass
class RewardScheme:
    """Per-event reward values plus an optional full-override hook.

    ``custom_hook(event) -> {agent_id: reward}`` replaces the default
    attribution entirely when set; it receives every event, including both
    participant ids of a collision.
    """

    collision: float = -10.0
    food: float = 10.0
    time_step: float = -0.1
    custom_hook: object = None  # callable(StepEvent) -> dict[str, float]


@dataclass
class WorldConfig:
    world_size: int
    max_steps: int | None = None  # None means unlimited
    reward_scheme: RewardScheme | None = None
    action_order: tuple[str, ...] = ()
    seed: int = 0

    def __post_init__(self):
        if self.world_size < 1:
            raise ConfigError(f"world_size must be >= 1, got {self.world_size}")
        if self.max_steps is not None and self.max_steps < 1:
            raise ConfigError(f"max_steps must be positive or None, got {self.max_steps}")
        if self.reward_scheme is None:
            self.reward_scheme = RewardScheme()


@dataclass
class AgentBody:
    id: str
    power: int = 0
    transparent: bool = False
    vision: VisionParams = None
    position: Cell | None = None
    orientation: Orientation = Orientation.NORTH

    def __post_init__(self):
        if self.vision is None:
            self.vision = VisionParams()


@dataclass
class Food:
    id: str
    position: Cell | None = None
    consumed: bool = False


@dataclass
class Obstacle:
    id: str
    kind: ObstacleKind
    shape: ShapeMatrix
    center: Cell | None = None
    occupied_cells: frozenset[Cell] = frozenset()


class WorldState:
    """Authoritative mutable simulation state. Single-threaded by contract."""

    def __init__(self, config: WorldConfig, specs: list[PlacementSpec]):
        self.config = config
        self.specs = list(specs)
        self.agents: dict[str, AgentBody] = {}
        self.foods: dict[str, Food] = {}
        self.obstacles: dict[str, Obstacle] = {}
        self.step_count = 0
        self.terminated = RUNNING
        self.rng = SplitMix64(config.seed)
        self.generated = False
        # Per-episode caches rebuilt by generate_world.
        self._blocked_cells: np.ndarray | None = None
        self._wall_opacity: np.ndarray | None = None

    @property
    def world_size(self) -> int:
        return self.config.world_size

    def blocked_cells(self) -> np.ndarray:
        """Boolean grid of cells no agent may enter (walls and water)."""
        if self._blocked_cells is None:
            grid = np.zeros((self.world_size, self.world_size), dtype=bool)
            for obstacle in self.obstacles.values():
                for cell in obstacle.occupied_cells:
                    grid[cell] = True
            self._blocked_cells = grid
        return self._blocked_cells

    def wall_opacity(self) -> np.ndarray:
        """Boolean grid of vision-blocking obstacle cells (walls only)."""
        if self._wall_opacity is None:
            grid = np.zeros((self.world_size, self.world_size), dtype=bool)
            for obstacle in self.obstacles.values():
                if obstacle.kind.blocks_vision:
                    for cell in obstacle.occupied_cells:
                        grid[cell] = True
            self._wall_opacity = grid
        return self._wall_opacity


def create_world(config: WorldConfig, element_specs: list[PlacementSpec]) -> WorldState:
    """Register elements and seed the RNG; no positions are assigned yet.

    Raises ConfigError on duplicate element ids or when ``action_order``
    does not list each registered agent exactly once.
    """
    state = WorldState(config, element_specs)
    seen: set[str] = set()
    for spec in element_specs:
        if spec.id in seen:
            raise ConfigError(f"duplicate element id {spec.id!r}")
        seen.add(spec.id)
        if isinstance(spec, AgentSpec):
            state.agents[spec.id] = AgentBody(
                spec.id, power=spec.power, transparent=spec.transparent, vision=spec.vision
            )
        elif isinstance(spec, FoodSpec):
            state.foods[spec.id] = Food(spec.id)
        elif isinstance(spec, ObstacleSpec):
            state.obstacles[spec.id] = Obstacle(spec.id, spec.kind, spec.shape)
        else:
            raise ConfigError(f"unknown element spec type {type(spec).__name__}")

    order = config.action_order or tuple(state.agents)
    if sorted(order) != sorted(state.agents) or len(set(order)) != len(order):
        raise ConfigError(
            f"action_order {list(order)} must list each agent exactly once "
            f"(agents: {list(state.agents)})"
        )
    config.action_order = tuple(order)
    return state


def generate_world(state: WorldState) -> WorldState:
    """(Re)place every element and reset the episode counters.

    Identical seeds and specs yield identical layouts.  Placement draws
    advance the world RNG in the documented order (agents, foods, obstacles,
    registration order within each class).
    """
    for agent in state.agents.values():
        agent.position = None
        agent.orientation = Orientation.NORTH
    for food in state.foods.values():
        food.position = None
        food.consumed = False
    for obstacle in state.obstacles.values():
        obstacle.center = None
        obstacle.occupied_cells = frozenset()
    state._blocked_cells = None
    state._wall_opacity = None

    place_all(state, state.specs, state.rng)
    state.step_count = 0
    state.terminated = RUNNING
    state.generated = True
    return state


def check_termination(state: WorldState) -> TerminationStatus:
    """Episode-end status for the current state. Pure."""
    if state.config.max_steps is not None and state.step_count >= state.config.max_steps:
        return TerminationStatus(True, TerminationCause.MAX_STEPS)
    if all(food.consumed for food in state.foods.values()):
        return TerminationStatus(True, TerminationCause.ALL_FOOD_CONSUMED)
    return RUNNING
