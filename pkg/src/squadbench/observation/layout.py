"""Screen layout: fixed widget anchors for the rendered battle UI.

Geometry lives in ``data/layout.json`` so the coordinates the renderer
draws and the coordinates click resolution tests against come from one
place.  Anchors are fixed for a whole episode; only bindings (which
enemy occupies which target frame, who is next on the order track) and
enabled flags change between frames.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from functools import lru_cache
from importlib import resources

from squadbench.engine.types import BattleState, Side

SCREEN_W = 1920
SCREEN_H = 1080


@dataclass(frozen=True)
class Widget:
    kind: str  # basic_button|skill_button|ult_icon|target_frame|ally_frame|order_track_slot|sp_pip|auto_toggle
    rect: tuple[int, int, int, int]  # x, y, w, h
    bound_id: str | None = None
    enabled: bool = True

    def contains(self, x: int, y: int) -> bool:
        rx, ry, rw, rh = self.rect
        return rx <= x < rx + rw and ry <= y < ry + rh

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "rect": list(self.rect),
            "bound_id": self.bound_id,
            "enabled": self.enabled,
        }


@lru_cache(maxsize=1)
def layout_config() -> dict:
    text = resources.files("squadbench.observation").joinpath("data", "layout.json").read_text()
    return json.loads(text)


def _rect(cfg: dict, dx_steps: int = 0, dy_steps: int = 0) -> tuple[int, int, int, int]:
    x = cfg["x"] + dx_steps * cfg.get("dx", 0)
    y = cfg["y"] + dy_steps * cfg.get("dy", 0)
    return (x, y, cfg["w"], cfg["h"])


def build_widgets(state: BattleState) -> list[Widget]:
    """Instantiate the widget list for the current state.

    Ordering is the draw order; hit testing walks it back to front.
    """
    cfg = layout_config()
    widgets: list[Widget] = []

    state.sort_queue()
    upcoming = [e.combatant_id for e in state.turn_queue][: cfg["order_track"]["slots"]]
    for i, actor_id in enumerate(upcoming):
        widgets.append(
            Widget("order_track_slot", _rect(cfg["order_track"], dy_steps=i), actor_id, True)
        )

    enemies = state.living(Side.ENEMY)[: cfg["enemy_row"]["max"]]
    if enemies:
        row = cfg["enemy_row"]
        span = (len(enemies) - 1) * row["dx"] + row["w"]
        x0 = row["center_x"] - span // 2
        for i, enemy in enumerate(enemies):
            rect = (x0 + i * row["dx"], row["y"], row["w"], row["h"])
            widgets.append(Widget("target_frame", rect, enemy.id, True))

    for slot, ally in enumerate(state.allies()):
        if not ally.alive:
            continue
        widgets.append(
            Widget("ally_frame", _rect(cfg["ally_row"], dx_steps=slot), ally.id, True)
        )
        widgets.append(
            Widget(
                "ult_icon",
                _rect(cfg["ult_row"], dx_steps=slot),
                ally.id,
                enabled=ally.energy >= ally.energy_max,
            )
        )

    pips = cfg["sp_pips"]
    for i in range(pips["count"]):
        widgets.append(
            Widget("sp_pip", _rect(pips, dx_steps=i), None, enabled=i < state.skill_points)
        )

    widgets.append(Widget("basic_button", _rect(cfg["basic_button"]), None, True))
    widgets.append(
        Widget("skill_button", _rect(cfg["skill_button"]), None, enabled=state.skill_points >= 1)
    )
    widgets.append(Widget("auto_toggle", _rect(cfg["auto_toggle"]), None, False))
    return widgets
