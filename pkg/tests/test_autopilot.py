import math

import numpy as np
import pytest
from scipy import stats

from gridarena.autopilot import (
    AlgorithmicController,
    AutopilotState,
    CellKnowledge,
    KnownMap,
    a_star,
    algorithmic_policy,
    build_controller,
    random_walker,
    update_known_map,
)
from gridarena.dynamics import Action, ActionKind, EventKind, encode_action, step
from gridarena.rng import SplitMix64
from gridarena.runner import EpisodeDriver
from gridarena.types import Orientation, VisionMode, VisionParams
from gridarena.vision import observe

from helpers import fixed_world, shipped_scenario
from oracles import bfs_distance


class TestRandomWalker:
    def test_uniform_within_three_sigma(self):
        rng = SplitMix64(1001)
        draws = 90_000
        counts = np.zeros(9)
        for _ in range(draws):
            counts[encode_action(random_walker(rng))] += 1
        p = 1 / 9
        sigma = math.sqrt(draws * p * (1 - p))
        assert np.all(np.abs(counts - draws * p) <= 3 * sigma)

    def test_uniform_chi_square(self):
        rng = SplitMix64(77)
        draws = 100_000
        counts = np.zeros(9)
        for _ in range(draws):
            counts[encode_action(random_walker(rng))] += 1
        chi2 = ((counts - draws / 9) ** 2 / (draws / 9)).sum()
        assert chi2 < stats.chi2.ppf(1 - 0.001, 8)

    def test_fixed_seed_fixed_sequence(self):
        first = [encode_action(random_walker(SplitMix64(5))) for _ in range(1)]
        rng_a, rng_b = SplitMix64(5), SplitMix64(5)
        seq_a = [encode_action(random_walker(rng_a)) for _ in range(50)]
        seq_b = [encode_action(random_walker(rng_b)) for _ in range(50)]
        assert seq_a == seq_b and seq_a[0] == first[0]

    def test_walls_do_not_stop_walker_engine_blocks(self):
        state = fixed_world(3, agents={"a": (1, 1)}, walls=[(1, 0)], foods={"f": (2, 2)}, max_steps=99)
        result = step(state, {"a": Action.move(Orientation.WEST)})
        assert [e.kind for e in result.events if e.agent == "a" and e.kind is EventKind.BLOCKED]
        assert state.agents["a"].position == (1, 1)


class TestKnownMap:
    def test_full_visibility_clears_unknown(self):
        state = fixed_world(5, agents={"a": (2, 2)}, foods={"f": (0, 4)})
        known = KnownMap.fresh(5)
        update_known_map(known, observe(state, "a"))
        assert (known.cell_knowledge != CellKnowledge.UNKNOWN).all()
        assert known.cell_knowledge[0, 4] == CellKnowledge.FOOD_KNOWN

    def test_food_cleared_when_seen_absent(self):
        state = fixed_world(5, agents={"a": (2, 2)}, foods={"f": (0, 4)})
        known = KnownMap.fresh(5)
        update_known_map(known, observe(state, "a"))
        state.foods["f"].consumed = True
        update_known_map(known, observe(state, "a"))
        assert known.cell_knowledge[0, 4] == CellKnowledge.FREE

    def test_invisible_cells_stay_unknown(self):
        vision = {"a": VisionParams(VisionMode.ALLOCENTRIC, 90.0, math.inf)}
        state = fixed_world(5, agents={"a": (4, 2)}, vision=vision)
        known = KnownMap.fresh(5)
        update_known_map(known, observe(state, "a"))
        assert known.cell_knowledge[4, 0] == CellKnowledge.UNKNOWN

    def test_obstacle_knowledge_sticky(self):
        state = fixed_world(5, agents={"a": (2, 2)})
        known = KnownMap.fresh(5)
        known.cell_knowledge[1, 1] = CellKnowledge.OBSTACLE_KNOWN
        update_known_map(known, observe(state, "a"))
        assert known.cell_knowledge[1, 1] == CellKnowledge.OBSTACLE_KNOWN

    def test_unknown_count_monotone_over_episode(self):
        driver = EpisodeDriver(shipped_scenario(), seed=3)
        driver.start_episode()
        controller = driver.controllers["red"]
        previous = None
        while not driver.state.terminated.terminated:
            driver.advance()
            unknown = int(
                (controller.state.known.cell_knowledge == CellKnowledge.UNKNOWN).sum()
            )
            if previous is not None:
                assert unknown <= previous
            previous = unknown

    def test_rejects_egocentric_frames(self):
        state = fixed_world(3, agents={"a": (1, 1)})
        ego = observe(state, "a", mode=VisionMode.EGOCENTRIC)
        with pytest.raises(ValueError):
            update_known_map(KnownMap.fresh(3), ego)


class TestAStar:
    def test_straight_line(self):
        known = KnownMap.fresh(5)
        assert a_star(known, (0, 0), (0, 3)) == [(0, 1), (0, 2), (0, 3)]

    def test_start_equals_goal(self):
        assert a_star(KnownMap.fresh(4), (2, 2), (2, 2)) == []

    def test_wall_with_gap_matches_bfs(self):
        known = KnownMap.fresh(7)
        known.cell_knowledge[:, 3] = CellKnowledge.OBSTACLE_KNOWN
        known.cell_knowledge[5, 3] = CellKnowledge.UNKNOWN  # the gap
        path = a_star(known, (0, 0), (0, 6))
        blocked = known.cell_knowledge == CellKnowledge.OBSTACLE_KNOWN
        assert path is not None
        assert len(path) == bfs_distance(blocked, (0, 0), (0, 6))

    def test_enclosed_goal_unreachable(self):
        known = KnownMap.fresh(7)
        for r, c in ((2, 3), (4, 3), (3, 2), (3, 4)):
            known.cell_knowledge[r, c] = CellKnowledge.OBSTACLE_KNOWN
        assert a_star(known, (0, 0), (3, 3)) is None

    def test_path_is_4_connected_and_avoids_blocks(self):
        rng = np.random.default_rng(17)
        for _ in range(300):
            known = KnownMap.fresh(9)
            known.cell_knowledge[rng.random((9, 9)) < 0.3] = CellKnowledge.OBSTACLE_KNOWN
            start = (int(rng.integers(9)), int(rng.integers(9)))
            goal = (int(rng.integers(9)), int(rng.integers(9)))
            known.cell_knowledge[start] = CellKnowledge.FREE
            path = a_star(known, start, goal)
            if path is None:
                continue
            previous = start
            for cell in path:
                assert abs(cell[0] - previous[0]) + abs(cell[1] - previous[1]) == 1
                assert known.cell_knowledge[cell] != CellKnowledge.OBSTACLE_KNOWN
                previous = cell
            assert previous == goal

    def test_optimal_against_bfs_sweep(self):
        rng = np.random.default_rng(4)
        for _ in range(500):
            known = KnownMap.fresh(9)
            known.cell_knowledge[rng.random((9, 9)) < 0.35] = CellKnowledge.OBSTACLE_KNOWN
            start = (int(rng.integers(9)), int(rng.integers(9)))
            goal = (int(rng.integers(9)), int(rng.integers(9)))
            known.cell_knowledge[start] = CellKnowledge.FREE
            blocked = known.cell_knowledge == CellKnowledge.OBSTACLE_KNOWN
            path = a_star(known, start, goal)
            distance = bfs_distance(blocked, start, goal)
            if distance is None:
                assert path is None
            else:
                assert path is not None and len(path) == distance


class TestAlgorithmicPolicy:
    def test_corridor_food_three_steps_east(self):
        state = fixed_world(5, agents={"a": (2, 1)}, foods={"f": (2, 4)}, max_steps=50)
        controller = AlgorithmicController()
        controller.reset(5)
        rng = state.rng
        consumed_at = None
        for step_no in range(1, 6):
            obs = observe(state, "a")
            agent = state.agents["a"]
            action = controller.act(obs, agent.position, agent.orientation, rng)
            if step_no <= 3:
                assert action.kind is ActionKind.COMPOSITE
                assert action.look_dir is Orientation.EAST
                assert action.move_dir is Orientation.EAST
            result = step(state, {"a": action})
            if any(e.kind is EventKind.FOOD_CONSUMED for e in result.events):
                consumed_at = step_no
                break
        assert consumed_at == 3

    def test_fully_explored_no_food_noop(self):
        state = fixed_world(3, agents={"a": (1, 1)}, max_steps=50)
        controller = AlgorithmicController()
        controller.reset(3)
        obs = observe(state, "a")
        action = controller.act(obs, (1, 1), Orientation.NORTH, state.rng)
        # full 360 vision on a 3x3: everything seen at once, nothing to do
        assert action.kind is ActionKind.NOOP

    def test_learns_obstacles_from_bumps(self):
        # blind agent: range 1 vision cannot distinguish the wall, so the
        # first bump into it must mark the cell and trigger a replan
        vision = {"a": VisionParams(VisionMode.ALLOCENTRIC, 360.0, 1.0)}
        state = fixed_world(
            5, agents={"a": (2, 1)}, foods={"f": (2, 4)}, walls=[(2, 2)], vision=vision,
            max_steps=100,
        )
        controller = AlgorithmicController()
        controller.reset(5)
        bumped = False
        for _ in range(60):
            if state.terminated.terminated:
                break
            obs = observe(state, "a")
            agent = state.agents["a"]
            action = controller.act(obs, agent.position, agent.orientation, state.rng)
            result = step(state, {"a": action})
            if any(e.kind is EventKind.BLOCKED for e in result.events):
                bumped = True
        assert controller.state.known.cell_knowledge[2, 2] == CellKnowledge.OBSTACLE_KNOWN or not bumped

    def test_collision_does_not_poison_map(self):
        state = fixed_world(5, agents={"a": (2, 1), "b": (2, 2)}, foods={"f": (2, 4)}, max_steps=9)
        controller = AlgorithmicController()
        controller.reset(5)
        obs = observe(state, "a")
        action = controller.act(obs, (2, 1), Orientation.NORTH, state.rng)
        step(state, {"a": action})  # collides with b
        obs = observe(state, "a")
        controller.act(obs, state.agents["a"].position, state.agents["a"].orientation, state.rng)
        assert controller.state.known.cell_knowledge[2, 2] != CellKnowledge.OBSTACLE_KNOWN

    def test_progress_towards_food_target(self):
        state = fixed_world(
            7, agents={"a": (0, 0)}, foods={"f": (6, 6)}, walls=[(3, 3), (3, 4)], max_steps=100
        )
        controller = AlgorithmicController()
        controller.reset(7)
        distances = []
        while not state.terminated.terminated:
            obs = observe(state, "a")
            agent = state.agents["a"]
            action = controller.act(obs, agent.position, agent.orientation, state.rng)
            if controller.state.current_target == (6, 6) and controller.state.planned_path:
                distances.append(len(controller.state.planned_path))
            step(state, {"a": action})
        assert distances == sorted(distances, reverse=True)
        assert len(set(distances)) == len(distances)  # strictly decreasing

    def test_exploration_draw_order_documented(self):
        # one rng draw picks among reachable unknown cells in row-major order
        vision = {"a": VisionParams(VisionMode.ALLOCENTRIC, 360.0, 1.0)}
        state = fixed_world(5, agents={"a": (2, 2)}, foods={"f": (0, 0)}, vision=vision, max_steps=9)
        ap = AutopilotState.fresh(5)
        obs = observe(state, "a")
        rng = SplitMix64(123)
        mirror = SplitMix64(123)
        action, ap = algorithmic_policy(ap, obs, (2, 2), Orientation.NORTH, rng)
        known = ap.known.cell_knowledge
        from gridarena.autopilot import _reachable

        candidates = np.argwhere(
            _reachable(ap.known, (2, 2)) & (known == CellKnowledge.UNKNOWN)
        )
        expected = tuple(candidates[mirror.below(len(candidates))])
        assert ap.exploration_target == (int(expected[0]), int(expected[1]))
        assert rng.getstate() == mirror.getstate()

    def test_build_controller_names(self):
        assert build_controller("external") is None
        assert isinstance(build_controller("astar"), AlgorithmicController)
        with pytest.raises(ValueError):
            build_controller("nonsense")


class TestCompetitionIntegration:
    def test_ten_seeds_terminate_with_food_consumed(self):
        scenario = shipped_scenario()
        causes = []
        for seed in range(10):
            driver = EpisodeDriver(scenario, seed=seed)
            driver.start_episode()
            while not driver.state.terminated.terminated:
                driver.advance()
            causes.append(driver.state.terminated.cause.value)
        assert all(c in ("all_food_consumed", "max_steps") for c in causes)
        assert causes.count("all_food_consumed") >= 8
