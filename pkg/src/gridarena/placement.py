"""Spawn distributions, obstacle shapes and episode-start placement.

Every element samples its cell from a probability distribution matrix (PDM)
over the grid.  Conflicts are resolved by class priority: agents first, then
foods, then obstacles.  An obstacle's sampled cell is its shape centre; shape
extensions yield to anything placed earlier, the centre never does.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import TYPE_CHECKING, Union

import numpy as np

from .errors import PdmError, PlacementError
from .rng import SplitMix64
from .types import Cell, ObstacleKind, VisionParams

if TYPE_CHECKING:
    from .world import WorldState


@dataclass(frozen=True)
class Pdm:
    """Normalized spawn distribution over an N x N grid."""

    weights: np.ndarray

    @property
    def size(self) -> int:
        return self.weights.shape[0]

    def __eq__(self, other) -> bool:
        return isinstance(other, Pdm) and np.array_equal(self.weights, other.weights)


def normalize_pdm(weights) -> Pdm:
    """Validate a non-negative square weight grid and scale it to sum 1.

    Raises PdmError on negative entries, an all-zero grid, or a non-square
    grid.
    """
    arr = np.asarray(weights, dtype=np.float64)
    if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
        raise PdmError(f"PDM must be a square 2D grid, got shape {arr.shape}")
    if np.any(arr < 0):
        raise PdmError("PDM entries must be non-negative")
    total = float(arr.sum())
    if total <= 0.0:
        raise PdmError("PDM must have at least one positive entry")
    out = arr / total
    out.setflags(write=False)
    return Pdm(out)


def uniform_pdm(world_size: int) -> Pdm:
    return normalize_pdm(np.ones((world_size, world_size)))


@dataclass(frozen=True)
class ShapeMatrix:
    """Binary footprint of an obstacle; the anchor is the floor-centre cell."""

    cells: np.ndarray

    def __post_init__(self):
        arr = np.asarray(self.cells, dtype=np.uint8)
        if arr.ndim != 2 or not np.isin(arr, (0, 1)).all():
            raise ValueError("shape must be a rectangular binary grid")
        if arr.sum() == 0:
            raise ValueError("shape must contain at least one cell")
        if arr[arr.shape[0] // 2, arr.shape[1] // 2] != 1:
            raise ValueError("shape anchor cell must be set")
        arr.setflags(write=False)
        object.__setattr__(self, "cells", arr)

    @property
    def anchor(self) -> Cell:
        return self.cells.shape[0] // 2, self.cells.shape[1] // 2


@dataclass(frozen=True)
class AgentSpec:
    """Registration record for one agent."""

    id: str
    pdm: Pdm | None = None
    power: int = 0
    transparent: bool = False
    vision: VisionParams = field(default_factory=VisionParams)


@dataclass(frozen=True)
class FoodSpec:
    id: str
    pdm: Pdm | None = None


@dataclass(frozen=True)
class ObstacleSpec:
    id: str
    kind: ObstacleKind
    shape: ShapeMatrix
    pdm: Pdm | None = None


# Spawn-priority order is the union order: agents, then foods, then obstacles.
PlacementSpec = Union[AgentSpec, FoodSpec, ObstacleSpec]


def sample_position(pdm: Pdm, occupied_mask: np.ndarray, rng: SplitMix64) -> Cell:
    """Draw one cell proportional to ``pdm`` restricted to unoccupied cells.

    Consumes exactly one u64 from ``rng``.  The draw is the documented
    inverse-CDF over unoccupied support cells in row-major order.
    """
    flat = np.where(admissible_cells(pdm.weights, occupied_mask))[0]
    if flat.size == 0:
        raise PlacementError("<sample>", "no unoccupied cell with positive probability")
    support = pdm.weights.ravel()[flat]
    cum = np.cumsum(support)
    target = rng.random() * cum[-1]
    idx = int(np.searchsorted(cum, target, side="right"))
    idx = min(idx, flat.size - 1)
    n = pdm.size
    pick = int(flat[idx])
    return pick // n, pick % n


def admissible_cells(weights: np.ndarray, occupied_mask: np.ndarray) -> np.ndarray:
    """Flat boolean mask of admissible cells: positive weight and unoccupied."""
    return (weights.ravel() > 0) & ~occupied_mask.ravel()


def stamp_obstacle(shape: ShapeMatrix, center: Cell, world_size: int) -> set[Cell]:
    """Cells covered when the shape's anchor is aligned to ``center``.

    Out-of-bounds extensions are clipped silently.
    """
    ar, ac = shape.anchor
    rows, cols = np.nonzero(shape.cells)
    out: set[Cell] = set()
    for r, c in zip(rows.tolist(), cols.tolist()):
        rr, cc = center[0] + r - ar, center[1] + c - ac
        if 0 <= rr < world_size and 0 <= cc < world_size:
            out.add((rr, cc))
    return out


def place_all(state: "WorldState", specs: list[PlacementSpec], rng: SplitMix64) -> "WorldState":
    """Assign positions to all registered elements, mutating ``state``.

    Draw order is fixed: agents, foods, obstacles, each in registration
    order, one draw per element.  Each draw excludes cells claimed by
    equal-or-higher-priority elements; obstacle extensions are additionally
    dropped wherever they overlap anything placed earlier.
    """
    n = state.config.world_size
    claimed = np.zeros((n, n), dtype=bool)
    uniform = uniform_pdm(n)

    def draw(element_id: str, pdm: Pdm | None) -> Cell:
        dist = pdm if pdm is not None else uniform
        if dist.size != n:
            raise PlacementError(element_id, f"PDM is {dist.size}x{dist.size}, world is {n}x{n}")
        if not admissible_cells(dist.weights, claimed).any():
            raise PlacementError(element_id, "no free cell with nonzero probability remains")
        return sample_position(dist, claimed, rng)

    for spec in specs:
        if isinstance(spec, AgentSpec):
            cell = draw(spec.id, spec.pdm)
            claimed[cell] = True
            state.agents[spec.id].position = cell
    for spec in specs:
        if isinstance(spec, FoodSpec):
            cell = draw(spec.id, spec.pdm)
            claimed[cell] = True
            food = state.foods[spec.id]
            food.position = cell
            food.consumed = False
    for spec in specs:
        if isinstance(spec, ObstacleSpec):
            center = draw(spec.id, spec.pdm)
            cells = stamp_obstacle(spec.shape, center, n)
            kept = {c for c in cells if not claimed[c]} | {center}
            for c in kept:
                claimed[c] = True
            obstacle = state.obstacles[spec.id]
            obstacle.center = center
            obstacle.occupied_cells = frozenset(kept)
    return state
