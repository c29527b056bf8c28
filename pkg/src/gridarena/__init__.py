"""Deterministic multi-agent grid-world simulator.

Library surface: build worlds directly (``create_world`` / ``generate_world``
/ ``step``) or drive declarative scenarios (``load_scenario`` /
``run_episode`` / ``run_benchmark``).  The ``gridarena`` CLI wraps the
scenario path.
"""

__version__ = "0.1.0"

from .errors import (
    CliError,
    ConfigError,
    GridArenaError,
    PdmError,
    PlacementError,
    SchemaError,
    StateError,
)
from .rng import RNG_NAME, SplitMix64
from .types import Cell, ObstacleKind, Orientation, VisionMode, VisionParams
from .placement import (
    AgentSpec,
    FoodSpec,
    ObstacleSpec,
    Pdm,
    ShapeMatrix,
    normalize_pdm,
    sample_position,
    stamp_obstacle,
)
from .world import (
    AgentBody,
    Food,
    Obstacle,
    RewardScheme,
    TerminationCause,
    TerminationStatus,
    WorldConfig,
    WorldState,
    check_termination,
    create_world,
    generate_world,
)
from .vision import (
    Observation,
    VisibilityMask,
    build_allocentric,
    build_egocentric,
    compute_visibility,
    flatten_observation,
    observation_manifest,
    observe,
    observe_all,
)
from .dynamics import (
    Action,
    EventKind,
    StepEvent,
    StepResult,
    apply_action,
    decode_action,
    encode_action,
    step,
)
from .autopilot import (
    AlgorithmicController,
    AutopilotState,
    CellKnowledge,
    KnownMap,
    RandomWalkerController,
    a_star,
    algorithmic_policy,
    build_controller,
    random_walker,
    update_known_map,
)
from .scenario import (
    ScenarioFile,
    build_world,
    load_scenario,
    parse_scenario,
    register_reward_hook,
    scenario_digest,
    serialize_scenario,
)
from .runner import EpisodeDriver, EpisodeTrace, run_episode
from .render import RenderFrame, frame_to_text, render_frame, render_ppm
from .benchmark import BenchmarkResult, MultiWorkerBenchmark, run_benchmark, run_benchmark_multiworker

__all__ = [name for name in dir() if not name.startswith("_")]
