"""Structured textual observations for the tool-assisted regime.

The simulator itself plays the role of the perception stack, projecting
ground truth into the record an agent would otherwise recover from the
screen.  With text extraction disabled, every numeric/textual field is
withheld and only entity identities, visually-apparent flags, and icon
information remain.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from squadbench.engine.types import BattleState, Side

TURN_ORDER_DEPTH = 5


@dataclass
class StructuredObservation:
    enemies: list[dict]
    allies: list[dict]
    skill_available: bool
    ocr_fields_present: bool
    turn_order: list[str] = field(default_factory=list)
    skill_points: int | None = None
    last_turn_damage: float | None = None

    def to_payload(self) -> dict:
        """Serializable record; absent fields are omitted, not nulled, so
        the no-text variant's key set is a strict subset."""
        payload: dict = {
            "enemies": [dict(e) for e in self.enemies],
            "allies": [dict(a) for a in self.allies],
            "skill_available": self.skill_available,
            "turn_order": list(self.turn_order),
            "ocr_fields_present": self.ocr_fields_present,
        }
        if self.ocr_fields_present:
            payload["skill_points"] = self.skill_points
            payload["last_turn_damage"] = self.last_turn_damage
        return payload


def _status_names(combatant) -> list[str]:
    return [f"{s.kind}:{s.name}({s.affects}{s.magnitude:+g},{s.remaining_turns}t)" for s in combatant.statuses]


def textify(state: BattleState, ocr_enabled: bool = True) -> StructuredObservation:
    """Project the state into the structured record for one decision step."""
    enemies = []
    for enemy in state.living(Side.ENEMY):
        record: dict = {
            "id": enemy.id,
            "weaknesses": sorted(enemy.weaknesses),
            "broken": enemy.broken,
            "toughness_pct": (
                round(100.0 * enemy.toughness / enemy.toughness_max, 1)
                if enemy.toughness_max > 0
                else 0.0
            ),
        }
        if ocr_enabled:
            record["hp_pct"] = round(100.0 * enemy.hp / enemy.max_hp, 1)
            record["statuses"] = _status_names(enemy)
        enemies.append(record)

    allies = []
    for ally in state.allies():
        record = {
            "id": ally.id,
            "alive": ally.alive,
            "ult_ready": ally.alive and ally.energy >= ally.energy_max,
        }
        if ocr_enabled:
            record["hp_pct"] = round(100.0 * ally.hp / ally.max_hp, 1)
            record["energy_pct"] = round(100.0 * ally.energy / ally.energy_max, 1)
            record["statuses"] = _status_names(ally)
        allies.append(record)

    state.sort_queue()
    turn_order = [e.combatant_id for e in state.turn_queue][:TURN_ORDER_DEPTH]

    return StructuredObservation(
        enemies=enemies,
        allies=allies,
        skill_available=state.skill_points >= 1,
        turn_order=turn_order,
        ocr_fields_present=ocr_enabled,
        skill_points=state.skill_points if ocr_enabled else None,
        last_turn_damage=state.last_action_damage if ocr_enabled else None,
    )
