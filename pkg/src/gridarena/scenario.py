"""Declarative scenario files: parsing, validation, canonical serialization.

A scenario is a JSON document describing the world, its spawn distributions
and its agents.  PDMs are either dense row-major grids or inclusive band
shorthands ({"rows": [3, 7], "cols": [5, 5]}) that expand to binary grids.
The document pins the PRNG name so traces stay portable.

Validation reports every problem it finds, each tagged with the document
line of the offending value.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field

import numpy as np

from .errors import SchemaError, SchemaIssue
from .placement import AgentSpec, FoodSpec, ObstacleSpec, ShapeMatrix, normalize_pdm
from .rng import RNG_NAME
from .types import ObstacleKind, VisionMode, VisionParams
from .world import RewardScheme, WorldConfig, WorldState, create_world

DEFAULT_REWARD_TRIPLE = (-10.0, 10.0, -0.1)

# Named reward hooks referencable from scenario files.
REWARD_HOOKS: dict[str, object] = {}


def register_reward_hook(name: str, hook) -> None:
    """Expose ``hook(event) -> {agent_id: reward}`` to scenario documents."""
    REWARD_HOOKS[name] = hook


# ---------------------------------------------------------------------------
# JSON reading with line positions


class _PositionedReader:
    """Minimal JSON reader that records the line of every value by path.

    Values themselves are decoded with the stdlib ``json`` semantics; this
    class only walks the structure to know where things are.
    """

    def __init__(self, text: str):
        self.text = text
        self.i = 0
        self.line = 1
        self.positions: dict[str, int] = {}

    def fail(self, message: str, path: str = "") -> "SchemaError":
        return SchemaError([SchemaIssue(path, message, self.line)])

    def read(self):
        self._ws()
        value = self._value("")
        self._ws()
        if self.i != len(self.text):
            raise self.fail("trailing data after JSON document")
        return value

    def _ws(self):
        while self.i < len(self.text) and self.text[self.i] in " \t\r\n":
            if self.text[self.i] == "\n":
                self.line += 1
            self.i += 1

    def _value(self, path: str):
        if self.i >= len(self.text):
            raise self.fail("unexpected end of document", path)
        self.positions[path] = self.line
        ch = self.text[self.i]
        if ch == "{":
            return self._object(path)
        if ch == "[":
            return self._array(path)
        if ch == '"':
            return self._string(path)
        if ch in "-0123456789":
            return self._number(path)
        for literal, value in (("true", True), ("false", False), ("null", None)):
            if self.text.startswith(literal, self.i):
                self.i += len(literal)
                return value
        raise self.fail(f"unexpected character {ch!r}", path)

    def _object(self, path: str) -> dict:
        out: dict = {}
        self.i += 1
        self._ws()
        if self.i < len(self.text) and self.text[self.i] == "}":
            self.i += 1
            return out
        while True:
            self._ws()
            if self.i >= len(self.text) or self.text[self.i] != '"':
                raise self.fail("expected object key", path)
            key = self._string(path)
            self._ws()
            if self.i >= len(self.text) or self.text[self.i] != ":":
                raise self.fail("expected ':' after object key", path)
            self.i += 1
            self._ws()
            child = f"{path}.{key}" if path else key
            if key in out:
                raise self.fail(f"duplicate key {key!r}", child)
            out[key] = self._value(child)
            self._ws()
            if self.i < len(self.text) and self.text[self.i] == ",":
                self.i += 1
                continue
            if self.i < len(self.text) and self.text[self.i] == "}":
                self.i += 1
                return out
            raise self.fail("expected ',' or '}' in object", path)

    def _array(self, path: str) -> list:
        out: list = []
        self.i += 1
        self._ws()
        if self.i < len(self.text) and self.text[self.i] == "]":
            self.i += 1
            return out
        while True:
            self._ws()
            out.append(self._value(f"{path}[{len(out)}]"))
            self._ws()
            if self.i < len(self.text) and self.text[self.i] == ",":
                self.i += 1
                continue
            if self.i < len(self.text) and self.text[self.i] == "]":
                self.i += 1
                return out
            raise self.fail("expected ',' or ']' in array", path)

    def _string(self, path: str) -> str:
        start = self.i
        self.i += 1
        while self.i < len(self.text):
            ch = self.text[self.i]
            if ch == "\\":
                self.i += 2
                continue
            if ch == '"':
                self.i += 1
                try:
                    return json.loads(self.text[start : self.i])
                except json.JSONDecodeError:
                    raise self.fail("invalid string escape", path) from None
            if ch == "\n":
                raise self.fail("unterminated string", path)
            self.i += 1
        raise self.fail("unterminated string", path)

    def _number(self, path: str):
        start = self.i
        while self.i < len(self.text) and self.text[self.i] in "-+.eE0123456789":
            self.i += 1
        try:
            return json.loads(self.text[start : self.i])
        except json.JSONDecodeError:
            raise self.fail(f"invalid number {self.text[start:self.i]!r}", path) from None

    def line_for(self, path: str) -> int | None:
        while True:
            if path in self.positions:
                return self.positions[path]
            if "." in path or "[" in path:
                cut = max(path.rfind("."), path.rfind("["))
                path = path[:cut]
            elif path:
                path = ""
            else:
                return self.positions.get("", 1)


# ---------------------------------------------------------------------------
# Scenario data model


@dataclass
class ScenarioAgent:
    id: str
    pdm: str | None = None
    power: int = 0
    transparent: bool = False
    vision_mode: str = "allocentric"
    vision_angle: float = 360.0
    vision_range: float = -1.0
    controller: str = "external"


@dataclass
class ScenarioFood:
    id: str
    pdm: str | None = None


@dataclass
class ScenarioObstacle:
    id: str
    kind: str
    shape: tuple[tuple[int, ...], ...]
    pdm: str | None = None


@dataclass
class ScenarioFile:
    world_size: int
    name: str | None = None
    max_steps: int | None = None
    seed: int = 0
    rng: str = RNG_NAME
    reward_scheme: tuple[float, float, float] = DEFAULT_REWARD_TRIPLE
    reward_hook: str | None = None
    pdms: dict[str, dict] = field(default_factory=dict)
    agents: list[ScenarioAgent] = field(default_factory=list)
    foods: list[ScenarioFood] = field(default_factory=list)
    obstacles: list[ScenarioObstacle] = field(default_factory=list)
    action_order: tuple[str, ...] = ()

    def pdm_weights(self, name: str) -> np.ndarray:
        spec = self.pdms[name]
        n = self.world_size
        if "grid" in spec:
            return np.asarray(spec["grid"], dtype=np.float64)
        grid = np.zeros((n, n), dtype=np.float64)
        r0, r1 = spec["rows"]
        c0, c1 = spec["cols"]
        grid[r0 : r1 + 1, c0 : c1 + 1] = 1.0
        return grid


# ---------------------------------------------------------------------------
# Validation


class _Checker:
    def __init__(self, reader: _PositionedReader):
        self.reader = reader
        self.issues: list[SchemaIssue] = []

    def error(self, path: str, message: str) -> None:
        self.issues.append(SchemaIssue(path, message, self.reader.line_for(path)))

    def expect_keys(self, obj: dict, path: str, allowed: set[str], required: set[str]) -> bool:
        ok = True
        for key in obj:
            if key not in allowed:
                self.error(f"{path}.{key}" if path else key, f"unknown key {key!r}")
                ok = False
        for key in required:
            if key not in obj:
                self.error(path, f"missing required key {key!r}")
                ok = False
        return ok

    def get_int(self, obj, path, key, default=None, minimum=None):
        if key not in obj:
            return default
        value = obj[key]
        vpath = f"{path}.{key}" if path else key
        if isinstance(value, bool) or not isinstance(value, int):
            self.error(vpath, f"{key} must be an integer")
            return default
        if minimum is not None and value < minimum:
            self.error(vpath, f"{key} must be >= {minimum}")
            return default
        return value

    def get_number(self, obj, path, key, default=None):
        if key not in obj:
            return default
        value = obj[key]
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            self.error(f"{path}.{key}" if path else key, f"{key} must be a number")
            return default
        return float(value)

    def get_str(self, obj, path, key, default=None, choices=None):
        if key not in obj:
            return default
        value = obj[key]
        vpath = f"{path}.{key}" if path else key
        if not isinstance(value, str):
            self.error(vpath, f"{key} must be a string")
            return default
        if choices is not None and value not in choices:
            self.error(vpath, f"{key} must be one of {sorted(choices)}, got {value!r}")
            return default
        return value


def parse_scenario(text: str) -> ScenarioFile:
    """Parse and validate a scenario document.

    Raises SchemaError listing every schema problem with line positions.
    """
    reader = _PositionedReader(text)
    doc = reader.read()
    checker = _Checker(reader)
    if not isinstance(doc, dict):
        checker.error("", "scenario document must be a JSON object")
        raise SchemaError(checker.issues)

    checker.expect_keys(
        doc,
        "",
        allowed={
            "name",
            "world_size",
            "max_steps",
            "seed",
            "rng",
            "reward_scheme",
            "reward_hook",
            "pdms",
            "agents",
            "foods",
            "obstacles",
            "action_order",
        },
        required={"world_size"},
    )

    world_size = checker.get_int(doc, "", "world_size", minimum=1)
    name = checker.get_str(doc, "", "name")
    seed = checker.get_int(doc, "", "seed", default=0)
    max_steps = None
    if doc.get("max_steps") is not None:
        max_steps = checker.get_int(doc, "", "max_steps", minimum=1)
    rng_name = checker.get_str(doc, "", "rng", default=RNG_NAME)
    if rng_name != RNG_NAME:
        checker.error("rng", f"unsupported rng {rng_name!r}; this engine pins {RNG_NAME!r}")

    reward = DEFAULT_REWARD_TRIPLE
    if "reward_scheme" in doc:
        raw = doc["reward_scheme"]
        if (
            isinstance(raw, list)
            and len(raw) == 3
            and all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in raw)
        ):
            reward = (float(raw[0]), float(raw[1]), float(raw[2]))
        else:
            checker.error("reward_scheme", "reward_scheme must be [collision, food, time_step]")
    reward_hook = checker.get_str(doc, "", "reward_hook")
    if reward_hook is not None and reward_hook not in REWARD_HOOKS:
        checker.error("reward_hook", f"reward hook {reward_hook!r} is not registered")

    pdms: dict[str, dict] = {}
    raw_pdms = doc.get("pdms", {})
    if not isinstance(raw_pdms, dict):
        checker.error("pdms", "pdms must be an object of name -> pdm spec")
        raw_pdms = {}
    for pdm_name, spec in raw_pdms.items():
        path = f"pdms.{pdm_name}"
        if not isinstance(spec, dict):
            checker.error(path, "pdm spec must be an object")
            continue
        if "grid" in spec:
            if not checker.expect_keys(spec, path, {"grid"}, {"grid"}):
                continue
            grid = spec["grid"]
            ok = isinstance(grid, list) and world_size is not None and len(grid) == world_size
            if ok:
                for row in grid:
                    if (
                        not isinstance(row, list)
                        or len(row) != world_size
                        or not all(
                            isinstance(v, (int, float)) and not isinstance(v, bool) and v >= 0
                            for v in row
                        )
                    ):
                        ok = False
                        break
            if not ok:
                checker.error(
                    f"{path}.grid",
                    "grid must be a square non-negative matrix matching world_size",
                )
                continue
            if not any(v > 0 for row in grid for v in row):
                checker.error(f"{path}.grid", "grid must contain a positive entry")
                continue
            pdms[pdm_name] = {"grid": grid}
        else:
            if not checker.expect_keys(spec, path, {"rows", "cols"}, {"rows", "cols"}):
                continue
            ok = True
            for key in ("rows", "cols"):
                band = spec.get(key)
                if (
                    not isinstance(band, list)
                    or len(band) != 2
                    or not all(isinstance(v, int) and not isinstance(v, bool) for v in band)
                    or (world_size is not None and not 0 <= band[0] <= band[1] < world_size)
                ):
                    checker.error(f"{path}.{key}", f"{key} must be [lo, hi] within the grid")
                    ok = False
            if ok:
                pdms[pdm_name] = {"rows": list(spec["rows"]), "cols": list(spec["cols"])}

    def check_pdm_ref(obj: dict, path: str) -> str | None:
        pdm_ref = checker.get_str(obj, path, "pdm")
        if pdm_ref is not None and pdm_ref not in pdms:
            checker.error(f"{path}.pdm", f"undefined pdm {pdm_ref!r}")
            return None
        return pdm_ref

    all_ids: set[str] = set()

    def check_id(obj: dict, path: str) -> str | None:
        element_id = checker.get_str(obj, path, "id")
        if element_id is None:
            checker.error(path, "missing required key 'id'")
            return None
        if element_id in all_ids:
            checker.error(f"{path}.id", f"duplicate element id {element_id!r}")
            return None
        all_ids.add(element_id)
        return element_id

    agents: list[ScenarioAgent] = []
    for i, raw in enumerate(doc.get("agents", []) or []):
        path = f"agents[{i}]"
        if not isinstance(raw, dict):
            checker.error(path, "agent must be an object")
            continue
        checker.expect_keys(
            raw, path, {"id", "pdm", "power", "transparent", "vision", "controller"}, {"id"}
        )
        agent_id = check_id(raw, path)
        if agent_id is None:
            continue
        vision = raw.get("vision", {})
        vpath = f"{path}.vision"
        if not isinstance(vision, dict):
            checker.error(vpath, "vision must be an object")
            vision = {}
        checker.expect_keys(vision, vpath, {"mode", "angle", "range"}, set())
        angle = checker.get_number(vision, vpath, "angle", default=360.0)
        if angle is not None and not 0 <= angle <= 360:
            checker.error(f"{vpath}.angle", "angle must be in [0, 360]")
            angle = 360.0
        vision_range = checker.get_number(vision, vpath, "range", default=-1.0)
        if vision_range is not None and vision_range != -1 and not vision_range > 0:
            checker.error(f"{vpath}.range", "range must be positive or -1 for unlimited")
            vision_range = -1.0
        transparent = raw.get("transparent", False)
        if not isinstance(transparent, bool):
            checker.error(f"{path}.transparent", "transparent must be a boolean")
            transparent = False
        agents.append(
            ScenarioAgent(
                id=agent_id,
                pdm=check_pdm_ref(raw, path),
                power=checker.get_int(raw, path, "power", default=0) or 0,
                transparent=transparent,
                vision_mode=checker.get_str(
                    vision, vpath, "mode", default="allocentric",
                    choices={"allocentric", "egocentric"},
                )
                or "allocentric",
                vision_angle=angle if angle is not None else 360.0,
                vision_range=vision_range if vision_range is not None else -1.0,
                controller=checker.get_str(
                    raw, path, "controller", default="external",
                    choices={"random_walker", "astar", "external"},
                )
                or "external",
            )
        )

    foods: list[ScenarioFood] = []
    for i, raw in enumerate(doc.get("foods", []) or []):
        path = f"foods[{i}]"
        if not isinstance(raw, dict):
            checker.error(path, "food must be an object")
            continue
        checker.expect_keys(raw, path, {"id", "pdm"}, {"id"})
        food_id = check_id(raw, path)
        if food_id is None:
            continue
        foods.append(ScenarioFood(id=food_id, pdm=check_pdm_ref(raw, path)))

    obstacles: list[ScenarioObstacle] = []
    for i, raw in enumerate(doc.get("obstacles", []) or []):
        path = f"obstacles[{i}]"
        if not isinstance(raw, dict):
            checker.error(path, "obstacle must be an object")
            continue
        checker.expect_keys(raw, path, {"id", "kind", "shape", "pdm"}, {"id", "kind", "shape"})
        obstacle_id = check_id(raw, path)
        if obstacle_id is None:
            continue
        kind = checker.get_str(raw, path, "kind", choices={"wall", "water"})
        shape_raw = raw.get("shape")
        shape: tuple[tuple[int, ...], ...] | None = None
        if (
            isinstance(shape_raw, list)
            and shape_raw
            and all(
                isinstance(row, list) and row and all(v in (0, 1) for v in row)
                and len(row) == len(shape_raw[0])
                for row in shape_raw
            )
        ):
            shape = tuple(tuple(int(v) for v in row) for row in shape_raw)
            anchor = (len(shape) // 2, len(shape[0]) // 2)
            if shape[anchor[0]][anchor[1]] != 1:
                checker.error(f"{path}.shape", "shape centre cell must be 1")
                shape = None
        else:
            checker.error(f"{path}.shape", "shape must be a rectangular binary grid")
        if kind is None or shape is None:
            continue
        obstacles.append(
            ScenarioObstacle(id=obstacle_id, kind=kind, shape=shape, pdm=check_pdm_ref(raw, path))
        )

    agent_ids = [a.id for a in agents]
    action_order = doc.get("action_order")
    if action_order is None:
        action_order = agent_ids
    elif not isinstance(action_order, list) or sorted(action_order) != sorted(agent_ids):
        checker.error("action_order", "action_order must list each agent id exactly once")
        action_order = agent_ids

    if checker.issues:
        raise SchemaError(checker.issues)

    return ScenarioFile(
        world_size=world_size,
        name=name,
        max_steps=max_steps,
        seed=seed,
        rng=rng_name,
        reward_scheme=reward,
        reward_hook=reward_hook,
        pdms=pdms,
        agents=agents,
        foods=foods,
        obstacles=obstacles,
        action_order=tuple(action_order),
    )


def load_scenario(path) -> ScenarioFile:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_scenario(fh.read())


# ---------------------------------------------------------------------------
# Serialization and world building


def scenario_to_document(sc: ScenarioFile) -> dict:
    doc: dict = {}
    if sc.name is not None:
        doc["name"] = sc.name
    doc["world_size"] = sc.world_size
    doc["max_steps"] = sc.max_steps
    doc["seed"] = sc.seed
    doc["rng"] = sc.rng
    doc["reward_scheme"] = list(sc.reward_scheme)
    if sc.reward_hook is not None:
        doc["reward_hook"] = sc.reward_hook
    doc["pdms"] = sc.pdms
    doc["agents"] = [
        {
            "id": a.id,
            "pdm": a.pdm,
            "power": a.power,
            "transparent": a.transparent,
            "vision": {"mode": a.vision_mode, "angle": a.vision_angle, "range": a.vision_range},
            "controller": a.controller,
        }
        for a in sc.agents
    ]
    doc["foods"] = [{"id": f.id, "pdm": f.pdm} for f in sc.foods]
    doc["obstacles"] = [
        {"id": o.id, "kind": o.kind, "shape": [list(row) for row in o.shape], "pdm": o.pdm}
        for o in sc.obstacles
    ]
    doc["action_order"] = list(sc.action_order)
    return doc


def serialize_scenario(sc: ScenarioFile) -> str:
    """Canonical single-line JSON used for digests and round-trips."""
    return json.dumps(scenario_to_document(sc), sort_keys=True, separators=(",", ":"))


def scenario_digest(sc: ScenarioFile) -> str:
    return hashlib.sha256(serialize_scenario(sc).encode("utf-8")).hexdigest()


def build_world(
    sc: ScenarioFile, seed: int | None = None, max_steps: int | None = None
) -> tuple[WorldState, dict[str, str]]:
    """Instantiate an (ungenerated) world from a scenario.

    Returns the world plus the controller name per agent.  ``seed`` and
    ``max_steps`` override the scenario's values when given.
    """
    named_pdms = {pdm_name: normalize_pdm(sc.pdm_weights(pdm_name)) for pdm_name in sc.pdms}

    specs = []
    controllers: dict[str, str] = {}
    for a in sc.agents:
        specs.append(
            AgentSpec(
                id=a.id,
                pdm=named_pdms[a.pdm] if a.pdm else None,
                power=a.power,
                transparent=a.transparent,
                vision=VisionParams(
                    mode=VisionMode(a.vision_mode),
                    angle_deg=a.vision_angle,
                    range=a.vision_range,
                ),
            )
        )
        controllers[a.id] = a.controller
    for f in sc.foods:
        specs.append(FoodSpec(id=f.id, pdm=named_pdms[f.pdm] if f.pdm else None))
    for o in sc.obstacles:
        specs.append(
            ObstacleSpec(
                id=o.id,
                kind=ObstacleKind(o.kind),
                shape=ShapeMatrix(np.asarray(o.shape, dtype=np.uint8)),
                pdm=named_pdms[o.pdm] if o.pdm else None,
            )
        )

    hook = REWARD_HOOKS[sc.reward_hook] if sc.reward_hook is not None else None
    config = WorldConfig(
        world_size=sc.world_size,
        max_steps=sc.max_steps if max_steps is None else max_steps,
        reward_scheme=RewardScheme(
            collision=sc.reward_scheme[0],
            food=sc.reward_scheme[1],
            time_step=sc.reward_scheme[2],
            custom_hook=hook,
        ),
        action_order=tuple(sc.action_order),
        seed=sc.seed if seed is None else seed,
    )
    return create_world(config, specs), controllers
