"""Builders for worlds with pinned layouts (via single-cell PDMs)."""

import importlib.resources

import numpy as np

from gridarena import (
    AgentSpec,
    FoodSpec,
    ObstacleSpec,
    ShapeMatrix,
    WorldConfig,
    create_world,
    generate_world,
    normalize_pdm,
    parse_scenario,
)
from gridarena.types import ObstacleKind, VisionParams
from gridarena.world import RewardScheme


def cell_pdm(n: int, *cells):
    weights = np.zeros((n, n))
    for cell in cells:
        weights[cell] = 1.0
    return normalize_pdm(weights)


def fixed_world(
    n,
    agents=None,
    foods=None,
    walls=None,
    water=None,
    max_steps=None,
    reward=None,
    seed=0,
    vision=None,
    powers=None,
    transparent=frozenset(),
    generate=True,
):
    """World whose elements land on exact cells.

    ``agents``/``foods`` map id -> cell; ``walls``/``water`` are cell lists
    (1x1 obstacles).  Optional per-agent ``vision`` and ``powers`` dicts.
    """
    agents = agents or {}
    foods = foods or {}
    specs = []
    for agent_id, cell in agents.items():
        specs.append(
            AgentSpec(
                id=agent_id,
                pdm=cell_pdm(n, cell),
                power=(powers or {}).get(agent_id, 0),
                transparent=agent_id in transparent,
                vision=(vision or {}).get(agent_id, VisionParams()),
            )
        )
    for food_id, cell in foods.items():
        specs.append(FoodSpec(id=food_id, pdm=cell_pdm(n, cell)))
    shape1 = ShapeMatrix(np.ones((1, 1), dtype=np.uint8))
    for i, cell in enumerate(walls or []):
        specs.append(ObstacleSpec(id=f"wall{i}", kind=ObstacleKind.WALL, shape=shape1, pdm=cell_pdm(n, cell)))
    for i, cell in enumerate(water or []):
        specs.append(ObstacleSpec(id=f"water{i}", kind=ObstacleKind.WATER, shape=shape1, pdm=cell_pdm(n, cell)))
    config = WorldConfig(
        world_size=n, max_steps=max_steps, reward_scheme=reward or RewardScheme(), seed=seed
    )
    state = create_world(config, specs)
    if generate:
        generate_world(state)
    return state


def shipped_scenario():
    text = (importlib.resources.files("gridarena") / "scenarios/competition.json").read_text()
    return parse_scenario(text)
