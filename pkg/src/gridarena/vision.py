"""Field-of-view computation and observation assembly.

Visibility model
----------------
A cell is visible to an agent iff the straight sight line from the agent's
cell centre to the target's cell centre crosses no opaque cell interior
(walls and non-transparent agents are opaque; water and foods are not;
opaque cells are themselves visible), the target centre lies within half the
vision angle of the facing direction, and its Euclidean centre distance is
within the vision range.

Lines that graze a corner between two opaque cells squeeze through: only
crossing an open cell interior blocks.  The implementation evaluates this
model exactly.  Occluder sets per (viewer, target) offset depend only on the
offset, so they are computed once per world size with exact rational
arithmetic and the per-step work reduces to one gather plus a segmented
maximum over the opacity grid, swept octant by octant in the precomputed
tables.

Angle and range predicates are closed (boundary cells count as visible) and
exact at the common half-angles 0/30/45/60/90 degrees where cos^2 is a small
rational.  The agent's own cell is always visible regardless of parameters.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .errors import StateError
from .types import Cell, Orientation, VisionMode, VisionParams
from .world import WorldState


@dataclass
class VisibilityMask:
    """Boolean N x N grid of cells the focal agent currently sees."""

    visible: np.ndarray


@dataclass
class OtherAgentView:
    """What the focal agent knows about one other agent; all zeros if unseen."""

    position_map: np.ndarray
    orientation: np.ndarray


@dataclass
class Observation:
    """Structured per-agent observation.

    Allocentric arrays are N x N in world coordinates; egocentric arrays are
    (2N-1) x (2N-1) with the focal agent at the centre.  ``others`` is keyed
    by agent id in action order.
    """

    frame: VisionMode
    observability: np.ndarray
    food_map: np.ndarray
    self_position: np.ndarray
    self_orientation: np.ndarray
    others: dict[str, OtherAgentView]


# ---------------------------------------------------------------------------
# Exact line-of-sight tables


def _segment_crosses_open_box(a: tuple[int, int], b: tuple[int, int], cell: Cell) -> bool:
    """Whether the open segment a->b (coords scaled by 2) meets the open unit
    box of ``cell``.  Exact; never ambiguous because cell centres have odd
    scaled coordinates while cell boundaries are even."""
    lo, hi = Fraction(0), Fraction(1)
    for axis in (0, 1):
        d = b[axis] - a[axis]
        low, high = 2 * cell[axis], 2 * cell[axis] + 2
        if d == 0:
            if not low < a[axis] < high:
                return False
        else:
            t1 = Fraction(low - a[axis], d)
            t2 = Fraction(high - a[axis], d)
            if t1 > t2:
                t1, t2 = t2, t1
            if t1 > lo:
                lo = t1
            if t2 < hi:
                hi = t2
    return lo < hi


def _offset_blockers(dr: int, dc: int) -> list[tuple[int, int]]:
    """Cells (relative to the viewer) whose interior the centre-to-centre
    sight line to offset (dr, dc) crosses, excluding both endpoints."""
    a = (1, 1)
    b = (2 * dr + 1, 2 * dc + 1)
    out = []
    for br in range(min(0, dr), max(0, dr) + 1):
        for bc in range(min(0, dc), max(0, dc) + 1):
            if (br, bc) in ((0, 0), (dr, dc)):
                continue
            if _segment_crosses_open_box(a, b, (br, bc)):
                out.append((br, bc))
    return out


@dataclass
class _LosTable:
    """Per-viewer CSR layout over all targets in row-major order.

    ``idx[v]`` indexes an opacity vector extended by one always-clear pad
    slot at position N*N; every target segment starts with the pad so that
    no segment is empty and ``np.maximum.reduceat`` is well defined.
    """

    idx: list[np.ndarray]
    starts: list[np.ndarray]
    pad: int


_LOS_TABLES: dict[int, _LosTable] = {}


def _los_table(n: int) -> _LosTable:
    table = _LOS_TABLES.get(n)
    if table is not None:
        return table

    pad = n * n
    rel_arrays: dict[tuple[int, int], np.ndarray] = {}
    for dr in range(-(n - 1), n):
        for dc in range(-(n - 1), n):
            blockers = _offset_blockers(dr, dc)
            # Leading slot is rewritten to the pad index after the shift.
            arr = np.empty(len(blockers) + 1, dtype=np.int64)
            arr[0] = 0
            for i, (br, bc) in enumerate(blockers):
                arr[i + 1] = br * n + bc
            rel_arrays[(dr, dc)] = arr

    idx_per_viewer: list[np.ndarray] = []
    starts_per_viewer: list[np.ndarray] = []
    for vr in range(n):
        for vc in range(n):
            segments = [rel_arrays[(tr - vr, tc - vc)] for tr in range(n) for tc in range(n)]
            lengths = np.fromiter((len(s) for s in segments), dtype=np.int64, count=pad)
            starts = np.zeros(pad, dtype=np.int64)
            np.cumsum(lengths[:-1], out=starts[1:])
            idx = np.concatenate(segments) + (vr * n + vc)
            idx[starts] = pad
            idx_per_viewer.append(idx.astype(np.int32))
            starts_per_viewer.append(starts.astype(np.int32))

    table = _LosTable(idx_per_viewer, starts_per_viewer, pad)
    _LOS_TABLES[n] = table
    return table


def line_of_sight_grid(opaque: np.ndarray, position: Cell) -> np.ndarray:
    """Boolean grid of cells with a clear centre-to-centre sight line from
    ``position``, ignoring angle and range limits."""
    n = opaque.shape[0]
    table = _los_table(n)
    v = position[0] * n + position[1]
    ext = np.empty(n * n + 1, dtype=np.uint8)
    ext[:-1] = opaque.ravel()
    ext[-1] = 0
    blocked = np.maximum.reduceat(ext[table.idx[v]], table.starts[v])
    return (blocked == 0).reshape(n, n)


# ---------------------------------------------------------------------------
# Angle and range predicates (shared with the test oracle)


def _snap_cos_sq(half_angle_deg: float) -> float:
    c = math.cos(math.radians(half_angle_deg))
    c2 = c * c
    for exact in (0.0, 0.25, 0.5, 0.75, 1.0):
        if abs(c2 - exact) < 1e-12:
            return exact
    return c2


def angle_admits(dr, dc, facing: Orientation, angle_deg: float):
    """Closed angle test: angular offset of (dr, dc) from facing <= angle/2.

    The zero offset (the agent's own cell) always passes.  Works on scalars
    and on numpy arrays.  angle 0 admits only the zero offset; angle 360
    admits everything.
    """
    dr = np.asarray(dr, dtype=np.int64)
    dc = np.asarray(dc, dtype=np.int64)
    n2 = dr * dr + dc * dc
    if angle_deg >= 360.0:
        return np.ones_like(n2, dtype=bool)
    if angle_deg <= 0.0:
        return n2 == 0
    fr, fc = facing.delta
    dot = fr * dr + fc * dc
    half = angle_deg / 2.0
    if half < 90.0:
        c2 = _snap_cos_sq(half)
        result = (dot >= 0) & (dot * dot >= c2 * n2)
    elif half == 90.0:
        result = dot >= 0
    else:
        c2 = _snap_cos_sq(half)
        result = (dot >= 0) | (dot * dot <= c2 * n2)
    return result | (n2 == 0)


def range_admits(dr, dc, vision_range: float):
    """Closed Euclidean range test on centre distance."""
    dr = np.asarray(dr, dtype=np.int64)
    dc = np.asarray(dc, dtype=np.int64)
    n2 = dr * dr + dc * dc
    if math.isinf(vision_range):
        return np.ones_like(n2, dtype=bool)
    return n2 <= vision_range * vision_range


_ANGLE_MASKS: dict[tuple[int, int, float], np.ndarray] = {}
_RANGE_MASKS: dict[tuple[int, float], np.ndarray] = {}


def _offset_grids(n: int) -> tuple[np.ndarray, np.ndarray]:
    span = np.arange(-(n - 1), n, dtype=np.int64)
    return np.meshgrid(span, span, indexing="ij")


def _angle_mask(n: int, facing: Orientation, angle_deg: float) -> np.ndarray:
    key = (n, int(facing), angle_deg)
    mask = _ANGLE_MASKS.get(key)
    if mask is None:
        rr, cc = _offset_grids(n)
        mask = angle_admits(rr, cc, facing, angle_deg)
        mask.setflags(write=False)
        _ANGLE_MASKS[key] = mask
    return mask


def _range_mask(n: int, vision_range: float) -> np.ndarray:
    key = (n, vision_range)
    mask = _RANGE_MASKS.get(key)
    if mask is None:
        rr, cc = _offset_grids(n)
        mask = range_admits(rr, cc, vision_range)
        mask.setflags(write=False)
        _RANGE_MASKS[key] = mask
    return mask


def _centered_slice(full: np.ndarray, position: Cell, n: int) -> np.ndarray:
    r, c = position
    return full[n - 1 - r : 2 * n - 1 - r, n - 1 - c : 2 * n - 1 - c]


# ---------------------------------------------------------------------------
# Public visibility API


def visibility_from_grids(
    opaque: np.ndarray, position: Cell, orientation: Orientation, params: VisionParams
) -> VisibilityMask:
    """Visibility mask for a viewer on an explicit opacity grid.

    ``opaque[position]`` is ignored: the viewer never occludes itself.
    """
    n = opaque.shape[0]
    los = line_of_sight_grid(opaque, position)
    mask = los & _centered_slice(_angle_mask(n, orientation, params.angle_deg), position, n)
    mask &= _centered_slice(_range_mask(n, params.range), position, n)
    mask[position] = True
    return VisibilityMask(mask)


def opacity_grid(state: WorldState, viewer: str | None = None) -> np.ndarray:
    """Vision-blocking cells: walls plus non-transparent placed agents,
    excluding ``viewer`` itself."""
    opaque = state.wall_opacity().copy()
    for agent in state.agents.values():
        if agent.id != viewer and agent.position is not None and not agent.transparent:
            opaque[agent.position] = True
    return opaque


def compute_visibility(state: WorldState, agent_id: str) -> VisibilityMask:
    """Current visibility mask of one agent. Read-only on the state."""
    agent = state.agents[agent_id]
    if agent.position is None:
        raise StateError(f"agent {agent_id!r} has no position; generate the world first")
    return visibility_from_grids(
        opacity_grid(state, viewer=agent_id), agent.position, agent.orientation, agent.vision
    )


# ---------------------------------------------------------------------------
# Observation assembly


def build_allocentric(state: WorldState, agent_id: str, mask: VisibilityMask) -> Observation:
    """World-frame observation: unobserved regions zeroed, self always filled."""
    agent = state.agents[agent_id]
    visible = mask.visible
    n = state.world_size

    food_map = np.zeros((n, n), dtype=np.uint8)
    for food in state.foods.values():
        if not food.consumed and food.position is not None and visible[food.position]:
            food_map[food.position] = 1

    self_position = np.zeros((n, n), dtype=np.uint8)
    self_position[agent.position] = 1

    others: dict[str, OtherAgentView] = {}
    for other_id in state.config.action_order:
        if other_id == agent_id:
            continue
        other = state.agents[other_id]
        position_map = np.zeros((n, n), dtype=np.uint8)
        if other.position is not None and visible[other.position]:
            position_map[other.position] = 1
            orientation = other.orientation.one_hot()
        else:
            orientation = np.zeros(4, dtype=np.uint8)
        others[other_id] = OtherAgentView(position_map, orientation)

    return Observation(
        frame=VisionMode.ALLOCENTRIC,
        observability=visible.astype(np.uint8),
        food_map=food_map,
        self_position=self_position,
        self_orientation=agent.orientation.one_hot(),
        others=others,
    )


def build_egocentric(state: WorldState, agent_id: str, mask: VisibilityMask) -> Observation:
    """Re-centred observation on a (2N-1) x (2N-1) frame.

    World cell (r, c) maps to (r - ar + N - 1, c - ac + N - 1) for an agent
    at (ar, ac); the frame translates with the agent but never rotates.
    """
    allo = build_allocentric(state, agent_id, mask)
    n = state.world_size
    ar, ac = state.agents[agent_id].position

    def embed(arr: np.ndarray) -> np.ndarray:
        out = np.zeros((2 * n - 1, 2 * n - 1), dtype=np.uint8)
        out[n - 1 - ar : 2 * n - 1 - ar, n - 1 - ac : 2 * n - 1 - ac] = arr
        return out

    self_position = np.zeros((2 * n - 1, 2 * n - 1), dtype=np.uint8)
    self_position[n - 1, n - 1] = 1
    others = {
        other_id: OtherAgentView(embed(view.position_map), view.orientation)
        for other_id, view in allo.others.items()
    }
    return Observation(
        frame=VisionMode.EGOCENTRIC,
        observability=embed(allo.observability),
        food_map=embed(allo.food_map),
        self_position=self_position,
        self_orientation=allo.self_orientation,
        others=others,
    )


def observe(state: WorldState, agent_id: str, mode: VisionMode | None = None) -> Observation:
    """Mask plus observation for one agent, in its configured mode unless
    overridden."""
    mask = compute_visibility(state, agent_id)
    mode = mode if mode is not None else state.agents[agent_id].vision.mode
    if mode is VisionMode.EGOCENTRIC:
        return build_egocentric(state, agent_id, mask)
    return build_allocentric(state, agent_id, mask)


def observe_all(state: WorldState) -> dict[str, Observation]:
    return {agent_id: observe(state, agent_id) for agent_id in state.config.action_order}


# ---------------------------------------------------------------------------
# Flat serialization (binding and trace wire format)


def observation_manifest(obs: Observation) -> list[tuple[str, tuple[int, ...]]]:
    """Field order and shapes for the flat wire encoding."""
    manifest = [
        ("observability", obs.observability.shape),
        ("food", obs.food_map.shape),
        ("self_position", obs.self_position.shape),
        ("self_orientation", (4,)),
    ]
    for other_id, view in obs.others.items():
        manifest.append((f"other:{other_id}:position", view.position_map.shape))
        manifest.append((f"other:{other_id}:orientation", (4,)))
    return manifest


def flatten_observation(obs: Observation) -> np.ndarray:
    """Row-major concatenation of all fields in manifest order (uint8)."""
    parts = [
        obs.observability.ravel(),
        obs.food_map.ravel(),
        obs.self_position.ravel(),
        obs.self_orientation,
    ]
    for view in obs.others.values():
        parts.append(view.position_map.ravel())
        parts.append(view.orientation)
    return np.concatenate(parts)
