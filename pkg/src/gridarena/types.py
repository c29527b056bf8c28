"""Shared primitive types: cells, orientations, vision parameters, item kinds."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

# Grid cell as (row, col), 0-based, top-left origin.
Cell = tuple[int, int]


class Orientation(enum.IntEnum):
    """Facing direction. The wire order North, South, East, West is fixed."""

    NORTH = 0
    SOUTH = 1
    EAST = 2
    WEST = 3

    @property
    def delta(self) -> Cell:
        return _DELTAS[self]

    def one_hot(self) -> np.ndarray:
        vec = np.zeros(4, dtype=np.uint8)
        vec[int(self)] = 1
        return vec


_DELTAS: dict[Orientation, Cell] = {
    Orientation.NORTH: (-1, 0),
    Orientation.SOUTH: (1, 0),
    Orientation.EAST: (0, 1),
    Orientation.WEST: (0, -1),
}

ORIENTATION_NAMES = {
    Orientation.NORTH: "north",
    Orientation.SOUTH: "south",
    Orientation.EAST: "east",
    Orientation.WEST: "west",
}
ORIENTATIONS_BY_NAME = {v: k for k, v in ORIENTATION_NAMES.items()}


class ObstacleKind(enum.Enum):
    """Wall blocks movement and sight; water blocks movement only."""

    WALL = "wall"
    WATER = "water"

    @property
    def blocks_vision(self) -> bool:
        return self is ObstacleKind.WALL


class VisionMode(enum.Enum):
    ALLOCENTRIC = "allocentric"
    EGOCENTRIC = "egocentric"


@dataclass(frozen=True)
class VisionParams:
    """Field-of-view settings for one agent.

    ``angle_deg`` spans 0..360 degrees centred on the facing direction.
    ``range`` is the maximum Euclidean centre distance; ``math.inf`` means
    unlimited.  The interface sentinel -1 is accepted and converted.
    """

    mode: VisionMode = VisionMode.ALLOCENTRIC
    angle_deg: float = 360.0
    range: float = math.inf

    def __post_init__(self):
        if self.range == -1:
            object.__setattr__(self, "range", math.inf)
        if not 0.0 <= self.angle_deg <= 360.0:
            raise ValueError(f"vision angle must be in [0, 360], got {self.angle_deg}")
        if not self.range > 0:
            raise ValueError(f"vision range must be positive or -1, got {self.range}")
