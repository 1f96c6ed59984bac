"""Builders for small custom task specs used across the test modules."""

from __future__ import annotations

import copy
import json
from importlib import resources

from squadbench.engine.tasks import TaskSpec, parse_task_spec


def standard_team() -> list[dict]:
    text = resources.files("squadbench.engine").joinpath("data", "team_standard.json").read_text()
    return json.loads(text)["allies"]


def enemy_dict(
    id: str = "dummy",
    element: str = "physical",
    max_hp: float = 800.0,
    speed: float = 100.0,
    toughness_max: float = 30.0,
    weaknesses: tuple[str, ...] = ("quantum",),
    damage: float = 60.0,
    score_value: float = 0.0,
) -> dict:
    return {
        "id": id,
        "element": element,
        "max_hp": max_hp,
        "speed": speed,
        "toughness_max": toughness_max,
        "weaknesses": list(weaknesses),
        "damage": damage,
        "score_value": score_value,
    }


def make_spec(
    waves: list[list[dict]] | None = None,
    family: str = "eow",
    ally_overrides: dict[int, dict] | None = None,
    **overrides,
) -> TaskSpec:
    """Build a validated spec: standard team, custom enemies, easy tweaks.

    ``ally_overrides`` maps team slot to a dict merged over that ally's
    definition (nested ``moves`` merge one level deep).
    """
    allies = copy.deepcopy(standard_team())
    for slot, patch in (ally_overrides or {}).items():
        for key, value in patch.items():
            if key == "moves":
                for move_name, move_patch in value.items():
                    allies[slot]["moves"].setdefault(move_name, {}).update(move_patch)
            else:
                allies[slot][key] = value
    doc = {
        "task_id": overrides.pop("task_id", 90),
        "name": overrides.pop("name", "test_task"),
        "family": family,
        "seed_base": overrides.pop("seed_base", 7),
        "ally_kits": allies,
        "waves": waves if waves is not None else [[enemy_dict()]],
        "reward": overrides.pop("reward", {"r_min": -1.4, "r_max": -0.3}),
    }
    doc.update(overrides)
    return parse_task_spec(doc, "test")
