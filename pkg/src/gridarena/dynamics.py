"""Actions, ordered multi-agent stepping, collisions, rewards, termination.

Agents act strictly sequentially in the configured action order, each seeing
the world as mutated by earlier agents in the same step.  Movement into the
border or an obstacle blocks; movement into another agent blocks and raises
a collision; movement onto an unconsumed food consumes it.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

from .errors import ConfigError, StateError
from .types import Orientation, VisionMode
from .vision import Observation, VisibilityMask, build_allocentric, build_egocentric, compute_visibility
from .world import RewardScheme, TerminationStatus, WorldState, check_termination


class ActionKind(enum.Enum):
    LOOK = "look"
    MOVE = "move"
    NOOP = "noop"
    COMPOSITE = "composite"


@dataclass(frozen=True)
class Action:
    """One of 9 primitives (4 look, 4 move, no-op) or a look-then-move
    composite executed within a single time step."""

    kind: ActionKind
    look_dir: Orientation | None = None
    move_dir: Orientation | None = None

    @staticmethod
    def look(direction: Orientation) -> "Action":
        return Action(ActionKind.LOOK, look_dir=direction)

    @staticmethod
    def move(direction: Orientation) -> "Action":
        return Action(ActionKind.MOVE, move_dir=direction)

    @staticmethod
    def noop() -> "Action":
        return Action(ActionKind.NOOP)

    @staticmethod
    def composite(look: Orientation, move: Orientation) -> "Action":
        return Action(ActionKind.COMPOSITE, look_dir=look, move_dir=move)


# Wire encoding, pinned: 0-3 look N,S,E,W; 4-7 move N,S,E,W; 8 no-op.
# Composites travel as [look_code, move_code] pairs.
PRIMITIVE_ACTIONS: tuple[Action, ...] = tuple(
    [Action.look(o) for o in Orientation]
    + [Action.move(o) for o in Orientation]
    + [Action.noop()]
)


def encode_action(action: Action) -> int | list[int]:
    if action.kind is ActionKind.LOOK:
        return int(action.look_dir)
    if action.kind is ActionKind.MOVE:
        return 4 + int(action.move_dir)
    if action.kind is ActionKind.NOOP:
        return 8
    return [int(action.look_dir), 4 + int(action.move_dir)]


def decode_action(code) -> Action:
    """Inverse of encode_action; accepts ints 0-8 or [look, move] pairs."""
    if isinstance(code, (list, tuple)):
        if len(code) != 2:
            raise ConfigError(f"composite action must be a [look, move] pair, got {code!r}")
        look, move = code
        if not (isinstance(look, int) and 0 <= look <= 3):
            raise ConfigError(f"composite look code must be 0-3, got {look!r}")
        if not (isinstance(move, int) and 4 <= move <= 7):
            raise ConfigError(f"composite move code must be 4-7, got {move!r}")
        return Action.composite(Orientation(look), Orientation(move - 4))
    if isinstance(code, bool) or not isinstance(code, int):
        raise ConfigError(f"action code must be an int 0-8 or a pair, got {code!r}")
    if not 0 <= code <= 8:
        raise ConfigError(f"action code must be in 0-8, got {code}")
    return PRIMITIVE_ACTIONS[code]


class EventKind(enum.Enum):
    COLLISION = "collision"
    FOOD_CONSUMED = "food_consumed"
    TIME_STEP = "time_step"
    BLOCKED = "blocked_by_obstacle"


@dataclass(frozen=True)
class StepEvent:
    """Something that happened during a step.

    ``agent`` is the acting agent (the mover for collisions); ``target`` is
    the collision occupant or the consumed food id, when applicable.
    """

    kind: EventKind
    agent: str
    target: str | None = None

    def to_dict(self) -> dict:
        out = {"kind": self.kind.value, "agent": self.agent}
        if self.target is not None:
            out["target"] = self.target
        return out


@dataclass
class StepResult:
    rewards: dict[str, float]
    events: list[StepEvent]
    observations: dict[str, Observation]
    terminated: TerminationStatus
    # Post-action visibility masks, kept so callers can re-frame observations
    # without recomputing the field of view.
    masks: dict[str, VisibilityMask] = field(default_factory=dict)


def apply_action(state: WorldState, agent_id: str, action: Action) -> list[StepEvent]:
    """Execute one agent's action against the current state.

    Move resolution for target cell one step in the move direction:
    out of bounds or obstacle -> stay, blocked event; another agent -> stay,
    collision event; unconsumed food -> enter and consume it; else enter.
    Look never moves, move never re-orients.
    """
    if state.terminated.terminated:
        raise StateError("cannot act on a terminated world; call generate_world first")
    agent = state.agents[agent_id]
    if agent.position is None:
        raise StateError(f"agent {agent_id!r} has no position; generate the world first")

    events: list[StepEvent] = []
    if action.kind in (ActionKind.LOOK, ActionKind.COMPOSITE):
        agent.orientation = action.look_dir
    if action.kind in (ActionKind.MOVE, ActionKind.COMPOSITE):
        dr, dc = action.move_dir.delta
        target = (agent.position[0] + dr, agent.position[1] + dc)
        n = state.world_size
        if not (0 <= target[0] < n and 0 <= target[1] < n) or state.blocked_cells()[target]:
            events.append(StepEvent(EventKind.BLOCKED, agent_id))
        else:
            occupant = _agent_at(state, target, exclude=agent_id)
            if occupant is not None:
                events.append(StepEvent(EventKind.COLLISION, agent_id, occupant))
            else:
                agent.position = target
                for food in state.foods.values():
                    if not food.consumed and food.position == target:
                        food.consumed = True
                        events.append(StepEvent(EventKind.FOOD_CONSUMED, agent_id, food.id))
    return events


def _agent_at(state: WorldState, cell, exclude: str) -> str | None:
    for other in state.agents.values():
        if other.id != exclude and other.position == cell:
            return other.id
    return None


def reward_contributions(event: StepEvent, state: WorldState) -> dict[str, float]:
    """Default event-to-reward attribution under the configured scheme.

    Collisions charge the strictly lower-power participant, or both on equal
    power.  Blocked moves carry no reward.
    """
    scheme: RewardScheme = state.config.reward_scheme
    if event.kind is EventKind.TIME_STEP:
        return {event.agent: scheme.time_step}
    if event.kind is EventKind.FOOD_CONSUMED:
        return {event.agent: scheme.food}
    if event.kind is EventKind.COLLISION:
        mover = state.agents[event.agent]
        occupant = state.agents[event.target]
        if mover.power < occupant.power:
            return {mover.id: scheme.collision}
        if occupant.power < mover.power:
            return {occupant.id: scheme.collision}
        return {mover.id: scheme.collision, occupant.id: scheme.collision}
    return {}


def step(state: WorldState, actions: dict[str, Action], profiler=None) -> StepResult:
    """Advance the world one time step.

    Actions are applied sequentially in action order; agents without an
    entry default to no-op.  One time-step event is appended per agent.
    Rewards sum the scheme's per-event values (or the custom hook's), the
    step counter advances, fresh observations are computed for every agent
    against the post-action state, and termination is evaluated last.
    """
    if state.terminated.terminated:
        raise StateError("cannot step a terminated world; call generate_world first")
    unknown = set(actions) - set(state.agents)
    if unknown:
        raise ConfigError(f"actions reference unknown agents: {sorted(unknown)}")

    tick = profiler.start() if profiler else None
    events: list[StepEvent] = []
    for agent_id in state.config.action_order:
        events.extend(apply_action(state, agent_id, actions.get(agent_id, Action.noop())))
    for agent_id in state.config.action_order:
        events.append(StepEvent(EventKind.TIME_STEP, agent_id))

    state.step_count += 1

    rewards = {agent_id: 0.0 for agent_id in state.config.action_order}
    hook = state.config.reward_scheme.custom_hook
    for event in events:
        contributions = hook(event) if hook is not None else reward_contributions(event, state)
        for agent_id, value in contributions.items():
            rewards[agent_id] += value

    state.terminated = check_termination(state)
    if profiler:
        tick = profiler.lap("dynamics", tick)

    masks = {agent_id: compute_visibility(state, agent_id) for agent_id in state.config.action_order}
    if profiler:
        tick = profiler.lap("vision", tick)

    observations = {}
    for agent_id in state.config.action_order:
        build = (
            build_egocentric
            if state.agents[agent_id].vision.mode is VisionMode.EGOCENTRIC
            else build_allocentric
        )
        observations[agent_id] = build(state, agent_id, masks[agent_id])
    if profiler:
        profiler.lap("observation", tick)

    return StepResult(
        rewards=rewards,
        events=events,
        observations=observations,
        terminated=state.terminated,
        masks=masks,
    )
