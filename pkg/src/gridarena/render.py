"""Text and flat-colour frame rendering of world snapshots.

Glyphs: '.' empty, '#' wall, '~' water, '*' food, 'A'.. agents in action
order.  Paint order follows placement priority, agents on top.  The raster
form is an ASCII portable pixmap (P3) with a fixed palette.
"""

from __future__ import annotations

from dataclasses import dataclass

from .world import WorldState

_AGENT_GLYPHS = "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz"

PALETTE = {
    ".": (250, 250, 250),
    "#": (60, 60, 60),
    "~": (90, 150, 240),
    "*": (40, 180, 70),
}
_AGENT_COLORS = [
    (220, 50, 50),
    (50, 90, 220),
    (240, 160, 40),
    (150, 60, 200),
    (20, 160, 160),
    (200, 200, 60),
]


@dataclass
class RenderFrame:
    rows: list[str]
    legend: dict[str, str]

    def __str__(self) -> str:
        return "\n".join(self.rows)


def render_frame(state: WorldState) -> RenderFrame:
    """Glyph grid for the current state. Total: renders any placed world."""
    n = state.world_size
    grid = [["."] * n for _ in range(n)]
    legend = {".": "empty"}
    for obstacle in state.obstacles.values():
        glyph = "#" if obstacle.kind.blocks_vision else "~"
        legend[glyph] = obstacle.kind.value
        for r, c in obstacle.occupied_cells:
            grid[r][c] = glyph
    for food in state.foods.values():
        if not food.consumed and food.position is not None:
            grid[food.position[0]][food.position[1]] = "*"
            legend["*"] = "food"
    for index, agent_id in enumerate(state.config.action_order):
        agent = state.agents[agent_id]
        if agent.position is not None:
            glyph = _AGENT_GLYPHS[index % len(_AGENT_GLYPHS)]
            grid[agent.position[0]][agent.position[1]] = glyph
            legend[glyph] = f"agent {agent_id}"
    return RenderFrame(["".join(row) for row in grid], legend)


def frame_to_text(frame: RenderFrame) -> str:
    lines = list(frame.rows)
    lines.append("")
    for glyph in sorted(frame.legend):
        lines.append(f"{glyph} {frame.legend[glyph]}")
    return "\n".join(lines) + "\n"


def render_ppm(state: WorldState, scale: int = 16) -> bytes:
    """ASCII P3 pixmap of the frame, ``scale`` pixels per cell."""
    frame = render_frame(state)
    n = len(frame.rows)
    agent_index = {}
    for index, agent_id in enumerate(state.config.action_order):
        agent_index[_AGENT_GLYPHS[index % len(_AGENT_GLYPHS)]] = index

    def color(glyph: str) -> tuple[int, int, int]:
        if glyph in PALETTE:
            return PALETTE[glyph]
        return _AGENT_COLORS[agent_index.get(glyph, 0) % len(_AGENT_COLORS)]

    size = n * scale
    lines = [f"P3 {size} {size} 255"]
    for r in range(n):
        row_colors = [color(g) for g in frame.rows[r]]
        pixel_row = " ".join(" ".join(map(str, row_colors[c // scale])) for c in range(size))
        lines.extend([pixel_row] * scale)
    return ("\n".join(lines) + "\n").encode("ascii")
