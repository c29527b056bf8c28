import math

import numpy as np
import pytest

from gridarena.dynamics import Action, step
from gridarena.errors import StateError
from gridarena.types import Orientation, VisionMode, VisionParams
from gridarena.vision import (
    build_allocentric,
    build_egocentric,
    compute_visibility,
    flatten_observation,
    observation_manifest,
    observe,
    visibility_from_grids,
)

from helpers import fixed_world
from oracles import ray_cast_visibility

ALLO = VisionMode.ALLOCENTRIC
FULL = VisionParams(ALLO, 360.0, math.inf)


def grid_mask(opaque, pos, facing=Orientation.NORTH, angle=360.0, rng=math.inf):
    params = VisionParams(ALLO, angle, rng)
    return visibility_from_grids(np.asarray(opaque, dtype=np.uint8), pos, facing, params).visible


class TestVisibilityBasics:
    def test_empty_grid_full_angle_sees_everything(self):
        empty = np.zeros((5, 5), dtype=np.uint8)
        for pos in ((0, 0), (2, 2), (4, 1)):
            assert grid_mask(empty, pos).all()

    def test_half_plane_when_facing_north_180(self):
        # 180 degree angle with unlimited range: exactly the closed half
        # plane of rows at or above the agent.
        empty = np.zeros((7, 7), dtype=np.uint8)
        for row in range(7):
            mask = grid_mask(empty, (row, 3), Orientation.NORTH, 180.0)
            expected = np.zeros((7, 7), dtype=bool)
            expected[: row + 1, :] = True
            assert np.array_equal(mask, expected)

    def test_wall_is_visible_beyond_is_not(self):
        opaque = np.zeros((5, 5), dtype=np.uint8)
        opaque[2, 3] = 1
        mask = grid_mask(opaque, (2, 0), Orientation.EAST)
        assert mask[2, 3]
        assert not mask[2, 4]

    def test_range_one_front_half_disc(self):
        empty = np.zeros((5, 5), dtype=np.uint8)
        mask = grid_mask(empty, (2, 2), Orientation.NORTH, 180.0, 1.0)
        expected = np.zeros((5, 5), dtype=bool)
        for cell in ((2, 2), (1, 2), (2, 1), (2, 3)):
            expected[cell] = True
        assert np.array_equal(mask, expected)

    def test_angle_zero_only_self(self):
        empty = np.zeros((5, 5), dtype=np.uint8)
        for facing in Orientation:
            mask = grid_mask(empty, (2, 2), facing, 0.0)
            assert mask.sum() == 1 and mask[2, 2]

    def test_angle_90_closed_diagonal_boundary(self):
        empty = np.zeros((5, 5), dtype=np.uint8)
        mask = grid_mask(empty, (4, 2), Orientation.NORTH, 90.0)
        # diagonals at exactly 45 degrees count as visible
        assert mask[3, 1] and mask[3, 3] and mask[0, 2]
        assert not mask[4, 0] and not mask[4, 4]

    def test_diagonal_squeezes_through_corner_gap(self):
        # Opaque cells at (1,2) and (2,1) touch corners with the viewer's
        # cell: the diagonal sight line to (1,1) passes exactly between them
        # and is clear, while the cells straight behind each wall are not.
        opaque = np.zeros((3, 3), dtype=np.uint8)
        opaque[1, 2] = opaque[2, 1] = 1
        mask = grid_mask(opaque, (2, 2))
        assert mask[1, 1] and mask[0, 0]
        assert mask[1, 2] and mask[2, 1]  # walls themselves visible
        assert not mask[0, 2] and not mask[2, 0]

    def test_diagonal_cell_between_blocks_diagonal_line(self):
        opaque = np.zeros((3, 3), dtype=np.uint8)
        opaque[1, 1] = 1
        mask = grid_mask(opaque, (2, 2))
        assert mask[1, 1]
        assert not mask[0, 0]

    def test_unplaced_agent_raises(self):
        state = fixed_world(3, agents={"a": (0, 0)}, generate=False)
        with pytest.raises(StateError):
            compute_visibility(state, "a")


class TestVisibilityAgainstOracle:
    def test_random_layouts_exact(self):
        rng = np.random.default_rng(99)
        for n in (3, 5, 7):
            for _ in range(25):
                opaque = (rng.random((n, n)) < 0.3).astype(np.uint8)
                r, c = int(rng.integers(n)), int(rng.integers(n))
                facing = Orientation(int(rng.integers(4)))
                angle = float(rng.choice([90, 180, 270, 360]))
                limit = float(rng.choice([1.0, 2.0, np.inf]))
                got = grid_mask(opaque, (r, c), facing, angle, limit)
                want = ray_cast_visibility(opaque, (r, c), facing, angle, limit)
                assert np.array_equal(got, want)


class TestVisibilityProperties:
    def test_monotone_in_angle_and_range(self):
        rng = np.random.default_rng(5)
        angles = [0.0, 45.0, 90.0, 135.0, 180.0, 270.0, 360.0]
        ranges = [1.0, 2.0, 3.5, math.inf]
        for _ in range(20):
            opaque = (rng.random((6, 6)) < 0.25).astype(np.uint8)
            pos = (int(rng.integers(6)), int(rng.integers(6)))
            facing = Orientation(int(rng.integers(4)))
            previous = None
            for angle in angles:
                mask = grid_mask(opaque, pos, facing, angle)
                if previous is not None:
                    assert (previous <= mask).all()
                previous = mask
            previous = None
            for limit in ranges:
                mask = grid_mask(opaque, pos, facing, 360.0, limit)
                if previous is not None:
                    assert (previous <= mask).all()
                previous = mask

    def test_transparency_never_shrinks_third_party_view(self):
        for seed in range(15):
            agents = {"viewer": (0, 0), "blocker": (2, 2), "third": (4, 4)}
            base = fixed_world(6, agents=agents, seed=seed)
            transparent = fixed_world(6, agents=agents, seed=seed, transparent={"blocker"})
            opaque_mask = compute_visibility(base, "viewer").visible
            clear_mask = compute_visibility(transparent, "viewer").visible
            assert (opaque_mask <= clear_mask).all()

    def test_self_cell_always_visible(self):
        empty = np.zeros((4, 4), dtype=np.uint8)
        for angle in (0.0, 1.0, 90.0, 360.0):
            for limit in (0.5, 1.0, math.inf):
                assert grid_mask(empty, (1, 3), Orientation.WEST, angle, limit)[1, 3]

    def test_water_does_not_block_vision_but_wall_does(self):
        state = fixed_world(5, agents={"a": (2, 0)}, water=[(2, 2)])
        assert compute_visibility(state, "a").visible[2, 4]
        walled = fixed_world(5, agents={"a": (2, 0)}, walls=[(2, 2)])
        assert not compute_visibility(walled, "a").visible[2, 4]

    def test_nontransparent_agent_occludes(self):
        state = fixed_world(5, agents={"a": (2, 0), "b": (2, 2)})
        mask = compute_visibility(state, "a").visible
        assert mask[2, 2] and not mask[2, 3]

    def test_consumed_food_never_occludes(self):
        state = fixed_world(5, agents={"a": (2, 0)}, foods={"f": (2, 2)})
        assert compute_visibility(state, "a").visible[2, 4]
        state.foods["f"].consumed = True
        assert compute_visibility(state, "a").visible[2, 4]


class TestAllocentric:
    def test_food_projection(self):
        state = fixed_world(5, agents={"a": (0, 0)}, foods={"f": (3, 3)})
        obs = build_allocentric(state, "a", compute_visibility(state, "a"))
        assert obs.food_map[3, 3] == 1 and obs.food_map.sum() == 1
        assert obs.self_position[0, 0] == 1 and obs.self_position.sum() == 1

    def test_unobserved_other_is_all_zeros(self):
        vision = {"a": VisionParams(ALLO, 90.0, math.inf)}
        state = fixed_world(7, agents={"a": (3, 3), "b": (6, 3)}, vision=vision)
        state.agents["a"].orientation = Orientation.NORTH
        obs = build_allocentric(state, "a", compute_visibility(state, "a"))
        assert obs.others["b"].position_map.sum() == 0
        assert obs.others["b"].orientation.sum() == 0

    def test_observed_other_orientation_one_hot(self):
        state = fixed_world(7, agents={"a": (3, 3), "b": (3, 5)})
        state.agents["b"].orientation = Orientation.WEST
        obs = build_allocentric(state, "a", compute_visibility(state, "a"))
        assert obs.others["b"].position_map[3, 5] == 1
        assert list(obs.others["b"].orientation) == [0, 0, 0, 1]

    def test_consumed_food_absent(self):
        state = fixed_world(5, agents={"a": (0, 0)}, foods={"f": (3, 3)})
        state.foods["f"].consumed = True
        obs = build_allocentric(state, "a", compute_visibility(state, "a"))
        assert obs.food_map.sum() == 0


class TestEgocentric:
    def test_center_position_and_shapes(self):
        state = fixed_world(3, agents={"a": (0, 0)}, foods={"f": (0, 1)})
        obs = build_egocentric(state, "a", compute_visibility(state, "a"))
        assert obs.observability.shape == (5, 5)
        assert obs.self_position[2, 2] == 1 and obs.self_position.sum() == 1
        # world (0,1) -> ego (0-0+2, 1-0+2) = (2, 3)
        assert obs.food_map[2, 3] == 1 and obs.food_map.sum() == 1

    def test_centered_agent_matches_padded_allocentric(self):
        state = fixed_world(5, agents={"a": (2, 2), "b": (0, 4)}, foods={"f": (4, 0)})
        mask = compute_visibility(state, "a")
        allo = build_allocentric(state, "a", mask)
        ego = build_egocentric(state, "a", mask)
        assert np.array_equal(ego.observability[2:7, 2:7], allo.observability)
        assert ego.observability[:2, :].sum() == 0 and ego.observability[7:, :].sum() == 0
        assert np.array_equal(ego.food_map[2:7, 2:7], allo.food_map)
        assert np.array_equal(ego.others["b"].position_map[2:7, 2:7], allo.others["b"].position_map)

    def test_moving_east_shifts_layers_west(self):
        state = fixed_world(5, agents={"a": (2, 1)}, foods={"f": (0, 3)}, max_steps=50)
        before = observe(state, "a", mode=VisionMode.EGOCENTRIC)
        step(state, {"a": Action.move(Orientation.EAST)})
        after = observe(state, "a", mode=VisionMode.EGOCENTRIC)
        assert np.array_equal(after.food_map[:, :-1], before.food_map[:, 1:])
        assert np.array_equal(after.observability[:, :-1], before.observability[:, 1:])

    def test_frame_consistency_every_visible_cell(self):
        rng = np.random.default_rng(3)
        for seed in range(10):
            n = 5
            state = fixed_world(
                n,
                agents={"a": (int(rng.integers(n)), int(rng.integers(n)))},
                seed=seed,
            )
            ar, ac = state.agents["a"].position
            mask = compute_visibility(state, "a")
            allo = build_allocentric(state, "a", mask)
            ego = build_egocentric(state, "a", mask)
            for r in range(n):
                for c in range(n):
                    assert (
                        ego.observability[r - ar + n - 1, c - ac + n - 1]
                        == allo.observability[r, c]
                    )


class TestObserveAll:
    def test_configured_modes_in_action_order(self):
        vision = {
            "a": VisionParams(ALLO, 360.0, math.inf),
            "b": VisionParams(VisionMode.EGOCENTRIC, 360.0, math.inf),
        }
        state = fixed_world(4, agents={"a": (0, 0), "b": (3, 3)}, vision=vision)
        from gridarena.vision import observe_all

        observations = observe_all(state)
        assert list(observations) == list(state.config.action_order)
        assert observations["a"].frame is VisionMode.ALLOCENTRIC
        assert observations["b"].frame is VisionMode.EGOCENTRIC
        assert observations["b"].observability.shape == (7, 7)


class TestObservationWire:
    def test_manifest_order_and_flat_length(self):
        state = fixed_world(4, agents={"a": (0, 0), "b": (3, 3), "c": (1, 2)})
        obs = observe(state, "a")
        manifest = observation_manifest(obs)
        names = [name for name, _ in manifest]
        assert names == [
            "observability",
            "food",
            "self_position",
            "self_orientation",
            "other:b:position",
            "other:b:orientation",
            "other:c:position",
            "other:c:orientation",
        ]
        flat = flatten_observation(obs)
        assert flat.shape[0] == sum(int(np.prod(shape)) for _, shape in manifest)
