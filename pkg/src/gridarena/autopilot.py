"""Built-in controllers: a uniform random walker and a map-building agent
that explores unseen cells and routes to spotted food with A*.

The map-building agent consumes allocentric observations.  It cannot see
obstacles directly (observations carry no obstacle layer), so it learns them
the hard way: when an intended move did not change its position and no other
agent is visible on the target cell, that cell is recorded as blocking.
Other agents are never written into the map; they move.
"""

from __future__ import annotations

import enum
import heapq
from collections import deque
from dataclasses import dataclass

import numpy as np

from .dynamics import Action, PRIMITIVE_ACTIONS
from .rng import SplitMix64
from .types import Cell, Orientation
from .vision import Observation

_STEP_ORDER = (Orientation.NORTH, Orientation.SOUTH, Orientation.EAST, Orientation.WEST)
_DELTA_TO_ORIENTATION = {o.delta: o for o in Orientation}


class CellKnowledge(enum.IntEnum):
    UNKNOWN = 0
    FREE = 1
    OBSTACLE_KNOWN = 2
    FOOD_KNOWN = 3


_BLOCKED = int(CellKnowledge.OBSTACLE_KNOWN)


@dataclass
class KnownMap:
    """Incremental-vision memory: everything seen stays known."""

    cell_knowledge: np.ndarray
    last_seen_step: np.ndarray
    updates: int = 0

    @staticmethod
    def fresh(world_size: int) -> "KnownMap":
        return KnownMap(
            cell_knowledge=np.zeros((world_size, world_size), dtype=np.int8),
            last_seen_step=np.full((world_size, world_size), -1, dtype=np.int32),
        )

    @property
    def size(self) -> int:
        return self.cell_knowledge.shape[0]


def update_known_map(known: KnownMap, obs: Observation) -> KnownMap:
    """Fold one allocentric observation into the map, in place.

    Visible cells become food-known or free; blocking knowledge is sticky
    and only ever set through move feedback, never cleared.  Food knowledge
    clears when the cell is later seen empty.
    """
    if obs.observability.shape != known.cell_knowledge.shape:
        raise ValueError("known-map updates require allocentric observations")
    known.updates += 1
    visible = obs.observability.view(bool)
    food = obs.food_map.view(bool)
    k = known.cell_knowledge
    k[visible & food] = CellKnowledge.FOOD_KNOWN
    k[visible & ~food & (k != CellKnowledge.OBSTACLE_KNOWN)] = CellKnowledge.FREE
    known.last_seen_step[visible] = known.updates
    return known


def random_walker(rng: SplitMix64) -> Action:
    """Uniform draw over the 9 primitive actions; never reads the world."""
    return PRIMITIVE_ACTIONS[rng.below(9)]


def a_star(known: KnownMap, start: Cell, goal: Cell) -> list[Cell] | None:
    """Shortest 4-neighbour path over cells not known to block.

    Unknown cells count as traversable.  Unit step cost with a Manhattan
    heuristic; ties break by neighbour order N, S, E, W then queue order.
    Returns the cell sequence after ``start`` up to ``goal`` inclusive, an
    empty list when start == goal, or None when unreachable.

    Runs on flat indices; visited per agent per step, so it is hot.
    """
    if start == goal:
        return []
    n = known.size
    blocked = known.cell_knowledge.tobytes()
    goal_flat = goal[0] * n + goal[1]
    if blocked[goal_flat] == _BLOCKED:
        return None
    start_flat = start[0] * n + start[1]
    gr, gc = goal
    big = 1 << 30
    g_score = [big] * (n * n)
    g_score[start_flat] = 0
    came_from = [-1] * (n * n)
    open_heap = [(abs(start[0] - gr) + abs(start[1] - gc), 0, start_flat)]
    push, pop = heapq.heappush, heapq.heappop
    seq = 0
    while open_heap:
        f, _, current = pop(open_heap)
        if current == goal_flat:
            path = []
            while current != start_flat:
                path.append((current // n, current % n))
                current = came_from[current]
            path.reverse()
            return path
        r, c = current // n, current % n
        if f - (abs(r - gr) + abs(c - gc)) > g_score[current]:
            continue  # stale heap entry, a better g arrived after this push
        g_next = g_score[current] + 1
        for nbr, inside in (
            (current - n, r > 0),
            (current + n, r < n - 1),
            (current + 1, c < n - 1),
            (current - 1, c > 0),
        ):
            if not inside or blocked[nbr] == _BLOCKED:
                continue
            if g_next < g_score[nbr]:
                g_score[nbr] = g_next
                came_from[nbr] = current
                seq += 1
                push(open_heap, (g_next + abs(nbr // n - gr) + abs(nbr % n - gc), seq, nbr))
    return None


def _reachable(known: KnownMap, start: Cell) -> np.ndarray:
    """Cells reachable from start over non-blocking cells (start included)."""
    n = known.size
    blocked = known.cell_knowledge.tobytes()
    seen = np.zeros(n * n, dtype=bool)
    start_flat = start[0] * n + start[1]
    seen[start_flat] = True
    queue = deque([start_flat])
    while queue:
        current = queue.popleft()
        r, c = current // n, current % n
        for nbr, inside in (
            (current - n, r > 0),
            (current + n, r < n - 1),
            (current + 1, c < n - 1),
            (current - 1, c > 0),
        ):
            if inside and not seen[nbr] and blocked[nbr] != _BLOCKED:
                seen[nbr] = True
                queue.append(nbr)
    return seen.reshape(n, n)


@dataclass
class AutopilotState:
    """Controller-side memory for the map-building agent."""

    known: KnownMap
    current_target: Cell | None = None
    planned_path: list[Cell] | None = None
    exploration_target: Cell | None = None
    # Feedback channel: where the last emitted move aimed, and from where.
    pending_move_target: Cell | None = None
    last_position: Cell | None = None

    @staticmethod
    def fresh(world_size: int) -> "AutopilotState":
        return AutopilotState(known=KnownMap.fresh(world_size))


def algorithmic_policy(
    ap: AutopilotState,
    obs: Observation,
    position: Cell,
    orientation: Orientation,
    rng: SplitMix64,
) -> tuple[Action, AutopilotState]:
    """One decision of the exploring A* agent.

    Known food wins: the nearest food cell by path length (row-major on
    ties) becomes the target.  Otherwise the agent walks to a persistent
    exploration target drawn uniformly (one rng draw) from the unseen cells
    currently reachable, re-drawn when reached or unreachable.  The emitted
    action looks toward and moves onto the first path cell; no-op when there
    is nowhere to go.
    """
    known = ap.known

    # Interpret the outcome of the previous move before updating the map.
    if ap.pending_move_target is not None and position == ap.last_position:
        bumped = ap.pending_move_target
        agent_there = any(view.position_map[bumped] for view in obs.others.values())
        if not agent_there:
            known.cell_knowledge[bumped] = CellKnowledge.OBSTACLE_KNOWN
        ap.planned_path = None
    ap.pending_move_target = None

    update_known_map(known, obs)

    path: list[Cell] | None = None
    target: Cell | None = None
    food_cells = np.argwhere(known.cell_knowledge == CellKnowledge.FOOD_KNOWN)
    for r, c in food_cells:
        candidate = a_star(known, position, (int(r), int(c)))
        if candidate is not None and (path is None or len(candidate) < len(path)):
            path, target = candidate, (int(r), int(c))

    if target is None:
        if ap.exploration_target is not None:
            if position == ap.exploration_target:
                ap.exploration_target = None
            else:
                candidate = a_star(known, position, ap.exploration_target)
                if candidate is None:
                    ap.exploration_target = None
                else:
                    path, target = candidate, ap.exploration_target
        if target is None:
            reachable = _reachable(known, position)
            frontier = np.argwhere(reachable & (known.cell_knowledge == CellKnowledge.UNKNOWN))
            if len(frontier):
                r, c = frontier[rng.below(len(frontier))]
                ap.exploration_target = (int(r), int(c))
                path = a_star(known, position, ap.exploration_target)
                target = ap.exploration_target

    ap.current_target = target
    ap.planned_path = path
    ap.last_position = position
    if not path:
        return Action.noop(), ap

    first = path[0]
    direction = _DELTA_TO_ORIENTATION[(first[0] - position[0], first[1] - position[1])]
    ap.pending_move_target = first
    return Action.composite(direction, direction), ap


# ---------------------------------------------------------------------------
# Controller objects used by the episode runner and the binding


class Controller:
    """Per-agent decision maker driven between engine steps."""

    def reset(self, world_size: int) -> None:  # pragma: no cover - trivial default
        pass

    def act(self, obs: Observation, position: Cell, orientation: Orientation, rng: SplitMix64) -> Action:
        raise NotImplementedError


class RandomWalkerController(Controller):
    def act(self, obs, position, orientation, rng):
        return random_walker(rng)


class AlgorithmicController(Controller):
    def __init__(self):
        self.state: AutopilotState | None = None

    def reset(self, world_size: int) -> None:
        self.state = AutopilotState.fresh(world_size)

    def act(self, obs, position, orientation, rng):
        action, self.state = algorithmic_policy(self.state, obs, position, orientation, rng)
        return action


CONTROLLER_NAMES = ("random_walker", "astar", "external")


def build_controller(name: str) -> Controller | None:
    """Instantiate a built-in controller; None marks externally driven agents."""
    if name == "random_walker":
        return RandomWalkerController()
    if name == "astar":
        return AlgorithmicController()
    if name == "external":
        return None
    raise ValueError(f"unknown controller {name!r}; expected one of {CONTROLLER_NAMES}")
