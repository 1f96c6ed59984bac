"""Task specifications: the declarative battle configs shipped with the package.

A task file is a single JSON document describing one battle: the family
it is scored under, its budgets, the enemy waves, and the ally team.
Eight canonical tasks ship in ``engine/data/``; ``load_task_spec`` also
accepts paths to user-supplied files with the same schema.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

from squadbench.engine.types import (
    AV_BASE_DEFAULT,
    BREAK_DAMAGE_TAKEN_MULT_DEFAULT,
    BREAK_DELAY_FRAC_DEFAULT,
    ELEMENTS,
    SP_CAP_DEFAULT,
    SP_INITIAL_DEFAULT,
    Kit,
    Move,
    MoveDef,
    Targeting,
)

FAMILIES = ("eow", "moc", "pf", "as")

# Short family tags used in task files and reports:
#   eow - single boss, scored by decision steps and shaped reward
#   moc - multi-wave, scored by remaining cycles under a cycle budget
#   pf  - score chase: elimination points inside a global AV budget
#   as  - composite: boss HP depletion plus remaining-AV bonus
FAMILY_EOW = "eow"
FAMILY_MOC = "moc"
FAMILY_PF = "pf"
FAMILY_AS = "as"

PF_AV_MAX_DEFAULT = 450.0
AS_WEIGHTS_DEFAULT = (30.0, 2.0)
EOW_STEP_BUDGET_DEFAULT = 150


class ConfigError(ValueError):
    """A task spec failed validation; the message names the offending field."""


@dataclass
class EnemyDef:
    id: str
    name: str
    element: str
    max_hp: float
    speed: float
    toughness_max: float
    weaknesses: set[str]
    damage: float
    score_value: float = 0.0


@dataclass
class AllyDef:
    id: str
    name: str
    max_hp: float
    speed: float
    energy_max: float
    ult_kind: str
    kit: Kit


@dataclass
class RewardCalibration:
    """Fixed per-task constants anchoring the 0-100 reward scale."""

    r_min: float
    r_max: float
    dmg_ref: float | None = None  # None: total enemy max HP of the task


@dataclass
class TaskSpec:
    task_id: int
    name: str
    family: str
    allies: list[AllyDef]
    waves: list[list[EnemyDef]]
    seed_base: int
    no_assistance: bool = False
    sp_cap: int = SP_CAP_DEFAULT
    sp_initial: int = SP_INITIAL_DEFAULT
    av_base: float = AV_BASE_DEFAULT
    break_delay_frac: float = BREAK_DELAY_FRAC_DEFAULT
    break_damage_taken_mult: float = BREAK_DAMAGE_TAKEN_MULT_DEFAULT
    step_budget: int = EOW_STEP_BUDGET_DEFAULT
    av_budget: float | None = None
    c_max: int | None = None
    as_weights: tuple[float, float] | None = None
    reward: RewardCalibration = field(
        default_factory=lambda: RewardCalibration(r_min=-75.0, r_max=40.0)
    )

    @property
    def dmg_ref(self) -> float:
        """Damage normalizer: a full clear sums to roughly 1.0."""
        if self.reward.dmg_ref is not None:
            return self.reward.dmg_ref
        return sum(e.max_hp for wave in self.waves for e in wave)

    def moc_av_budget(self) -> float:
        """AV bound equivalent to the cycle budget (first cycle 150, then 100)."""
        assert self.c_max is not None
        return 150.0 + 100.0 * self.c_max


def _require(data: dict, key: str, ctx: str):
    if key not in data:
        raise ConfigError(f"{ctx}: missing required field '{key}'")
    return data[key]


def _parse_move(data: dict, ctx: str) -> MoveDef:
    targeting = data.get("targeting", "single_enemy")
    try:
        targeting = Targeting(targeting)
    except ValueError:
        raise ConfigError(f"{ctx}: unknown targeting '{targeting}'") from None
    implant = data.get("implant_element")
    if implant is not None and implant not in ELEMENTS:
        raise ConfigError(f"{ctx}: unknown implant element '{implant}'")
    statuses = data.get("statuses", [])
    for s in statuses:
        if s.get("affects") not in ("speed", "damage_dealt", "damage_taken", "defense"):
            raise ConfigError(f"{ctx}: status affects '{s.get('affects')}' is not valid")
    return MoveDef(
        damage=float(data.get("damage", 0.0)),
        toughness_damage=float(data.get("toughness_damage", 0.0)),
        targeting=targeting,
        energy_gain=float(data.get("energy_gain", 0.0)),
        heal_frac=float(data.get("heal_frac", 0.0)),
        advance_frac=float(data.get("advance_frac", 0.0)),
        implant_element=implant,
        statuses=list(statuses),
    )


def _parse_kit(data: dict, ctx: str) -> Kit:
    element = _require(data, "element", ctx)
    if element not in ELEMENTS:
        raise ConfigError(f"{ctx}: unknown element '{element}'")
    moves_data = _require(data, "moves", ctx)
    moves: dict[Move, MoveDef] = {}
    for move_name, move_data in moves_data.items():
        try:
            move = Move(move_name)
        except ValueError:
            raise ConfigError(f"{ctx}: unknown move kind '{move_name}'") from None
        moves[move] = _parse_move(move_data, f"{ctx}.moves.{move_name}")
    return Kit(
        element=element,
        crit_chance=float(data.get("crit_chance", 0.0)),
        crit_mult=float(data.get("crit_mult", 1.0)),
        energy_on_hit=float(data.get("energy_on_hit", 0.0)),
        extra_turn_on_kill=bool(data.get("extra_turn_on_kill", False)),
        moves=moves,
    )


def _parse_ally(data: dict, ctx: str) -> AllyDef:
    kit = _parse_kit(data, ctx)
    ult_kind = data.get("ult_kind", "damage")
    if ult_kind not in ("damage", "healing"):
        raise ConfigError(f"{ctx}: ult_kind must be 'damage' or 'healing'")
    for move in (Move.BASIC, Move.SKILL, Move.ULTIMATE):
        if move not in kit.moves:
            raise ConfigError(f"{ctx}: ally kit is missing the '{move.value}' move")
    return AllyDef(
        id=_require(data, "id", ctx),
        name=data.get("name", data["id"]),
        max_hp=float(_require(data, "max_hp", ctx)),
        speed=float(_require(data, "speed", ctx)),
        energy_max=float(_require(data, "energy_max", ctx)),
        ult_kind=ult_kind,
        kit=kit,
    )


def _parse_enemy(data: dict, ctx: str) -> EnemyDef:
    element = _require(data, "element", ctx)
    if element not in ELEMENTS:
        raise ConfigError(f"{ctx}: unknown element '{element}'")
    weaknesses = set(data.get("weaknesses", []))
    for w in weaknesses:
        if w not in ELEMENTS:
            raise ConfigError(f"{ctx}: unknown weakness element '{w}'")
    return EnemyDef(
        id=_require(data, "id", ctx),
        name=data.get("name", data["id"]),
        element=element,
        max_hp=float(_require(data, "max_hp", ctx)),
        speed=float(_require(data, "speed", ctx)),
        toughness_max=float(data.get("toughness_max", 0.0)),
        weaknesses=weaknesses,
        damage=float(_require(data, "damage", ctx)),
        score_value=float(data.get("score_value", 0.0)),
    )


def _data_text(filename: str) -> str:
    return resources.files("squadbench.engine").joinpath("data", filename).read_text()


def parse_task_spec(data: dict, source: str = "<dict>") -> TaskSpec:
    """Validate and build a TaskSpec from a parsed JSON document."""
    task_id = int(_require(data, "task_id", source))
    family = _require(data, "family", source)
    if family not in FAMILIES:
        raise ConfigError(f"{source}: unknown family '{family}'")

    allies_data = _require(data, "ally_kits", source)
    if isinstance(allies_data, dict) and "preset" in allies_data:
        preset = allies_data["preset"]
        team = json.loads(_data_text(f"team_{preset}.json"))
        allies_data = team["allies"]
    if not isinstance(allies_data, list) or len(allies_data) != 4:
        raise ConfigError(f"{source}: ally_kits must define exactly 4 allies")
    allies = [_parse_ally(a, f"{source}.ally_kits[{i}]") for i, a in enumerate(allies_data)]

    waves_data = _require(data, "waves", source)
    if not waves_data or any(not wave for wave in waves_data):
        raise ConfigError(f"{source}: waves must be non-empty lists of enemies")
    waves = [
        [_parse_enemy(e, f"{source}.waves[{wi}][{ei}]") for ei, e in enumerate(wave)]
        for wi, wave in enumerate(waves_data)
    ]

    reward_data = data.get("reward", {})
    reward = RewardCalibration(
        r_min=float(reward_data.get("r_min", -75.0)),
        r_max=float(reward_data.get("r_max", 40.0)),
        dmg_ref=(
            float(reward_data["dmg_ref"])
            if reward_data.get("dmg_ref") is not None
            else None
        ),
    )
    if reward.r_max <= reward.r_min:
        raise ConfigError(f"{source}: reward.r_max must exceed reward.r_min")

    break_data = data.get("break", {})
    as_weights = data.get("as_weights")

    spec = TaskSpec(
        task_id=task_id,
        name=_require(data, "name", source),
        family=family,
        allies=allies,
        waves=waves,
        seed_base=int(_require(data, "seed_base", source)),
        no_assistance=bool(data.get("no_assistance", False)),
        sp_cap=int(data.get("sp_cap", SP_CAP_DEFAULT)),
        sp_initial=int(data.get("sp_initial", SP_INITIAL_DEFAULT)),
        av_base=float(data.get("av_base", AV_BASE_DEFAULT)),
        break_delay_frac=float(break_data.get("delay_frac", BREAK_DELAY_FRAC_DEFAULT)),
        break_damage_taken_mult=float(
            break_data.get("damage_taken_mult", BREAK_DAMAGE_TAKEN_MULT_DEFAULT)
        ),
        step_budget=int(data.get("step_budget", EOW_STEP_BUDGET_DEFAULT)),
        av_budget=(float(data["av_budget"]) if data.get("av_budget") is not None else None),
        c_max=(int(data["c_max"]) if data.get("c_max") is not None else None),
        as_weights=(tuple(float(w) for w in as_weights) if as_weights else None),
        reward=reward,
    )

    # Family-specific required fields.
    if spec.family == FAMILY_MOC:
        if spec.c_max is None:
            raise ConfigError(f"{source}: family 'moc' requires c_max")
        if len(spec.waves) < 2:
            raise ConfigError(f"{source}: family 'moc' requires at least two waves")
        spec.av_budget = spec.moc_av_budget()
    elif spec.family == FAMILY_PF:
        if spec.av_budget is None:
            spec.av_budget = PF_AV_MAX_DEFAULT
        if all(e.score_value <= 0 for wave in spec.waves for e in wave):
            raise ConfigError(f"{source}: family 'pf' requires enemies with score_value")
    elif spec.family == FAMILY_AS:
        if spec.av_budget is None:
            raise ConfigError(f"{source}: family 'as' requires av_budget")
        if spec.as_weights is None:
            spec.as_weights = AS_WEIGHTS_DEFAULT
    elif spec.family == FAMILY_EOW:
        if spec.step_budget <= 0:
            raise ConfigError(f"{source}: family 'eow' requires a positive step_budget")

    if spec.sp_initial < 0 or spec.sp_initial > spec.sp_cap:
        raise ConfigError(f"{source}: sp_initial must lie in [0, sp_cap]")

    return spec


BUNDLED_TASK_FILES = {
    1: "task01_rimefang.json",
    2: "task02_lotus_regent.json",
    3: "task03_hive_sovereign.json",
    4: "task04_mirror_troupe.json",
    5: "task05_gale_marshal.json",
    6: "task06_twin_bastion.json",
    7: "task07_lantern_swarm.json",
    8: "task08_null_devourer.json",
}


def load_task_spec(source: int | str | Path) -> TaskSpec:
    """Load a task spec from a bundled task id (1-8) or a JSON file path."""
    if isinstance(source, int):
        if source not in BUNDLED_TASK_FILES:
            raise ConfigError(f"no bundled task with id {source}")
        text = _data_text(BUNDLED_TASK_FILES[source])
        return parse_task_spec(json.loads(text), f"task:{source}")
    path = Path(source)
    return parse_task_spec(json.loads(path.read_text()), str(path))


def load_all_tasks() -> list[TaskSpec]:
    return [load_task_spec(task_id) for task_id in sorted(BUNDLED_TASK_FILES)]
