"""Core combat domain types.

The battle state is a plain mutable value: one episode runner owns it at
a time, and everything needed to reproduce a battle (including the
random stream position) serializes through :meth:`BattleState.to_dict`.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum

from squadbench.rng import Stream

ELEMENTS = ("physical", "fire", "ice", "lightning", "wind", "quantum", "imaginary")

AV_BASE_DEFAULT = 10000.0
SP_CAP_DEFAULT = 5
SP_INITIAL_DEFAULT = 3
BREAK_DELAY_FRAC_DEFAULT = 0.25
BREAK_DAMAGE_TAKEN_MULT_DEFAULT = 1.10


class Side(str, Enum):
    ALLY = "ally"
    ENEMY = "enemy"


class Move(str, Enum):
    BASIC = "basic"
    SKILL = "skill"
    ULTIMATE = "ultimate"
    HOLD = "hold"


class Targeting(str, Enum):
    """Target multiplicity and side a move accepts."""

    SINGLE_ENEMY = "single_enemy"
    ALL_ENEMIES = "all_enemies"
    SINGLE_ALLY = "single_ally"
    ALL_ALLIES = "all_allies"


ALL_ENEMIES = "all-enemies"
ALL_ALLIES = "all-allies"


@dataclass
class Status:
    """A timed buff or debuff on one combatant.

    ``remaining_turns`` is decremented exactly once, at the owner's turn
    end; the status is dropped when it reaches 0.
    """

    kind: str  # "buff" | "debuff"
    name: str
    magnitude: float
    remaining_turns: int
    affects: str  # "speed" | "damage_dealt" | "damage_taken" | "defense"

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "name": self.name,
            "magnitude": self.magnitude,
            "remaining_turns": self.remaining_turns,
            "affects": self.affects,
        }


@dataclass
class MoveDef:
    """One ability in a kit: damage numbers, targeting, resource effects."""

    damage: float = 0.0
    toughness_damage: float = 0.0
    targeting: Targeting = Targeting.SINGLE_ENEMY
    energy_gain: float = 0.0
    heal_frac: float = 0.0          # fraction of each target's max_hp restored
    advance_frac: float = 0.0       # fraction of target's remaining av removed
    implant_element: str | None = None  # weakness added to targets
    statuses: list[dict] = field(default_factory=list)  # applied to targets


@dataclass
class Kit:
    """Ability definitions for one combatant archetype."""

    element: str
    crit_chance: float = 0.0
    crit_mult: float = 1.0
    energy_on_hit: float = 0.0
    extra_turn_on_kill: bool = False
    moves: dict[Move, MoveDef] = field(default_factory=dict)

    def move(self, move: Move) -> MoveDef:
        return self.moves[move]


@dataclass
class Combatant:
    id: str
    side: Side
    max_hp: float
    hp: float
    speed: float
    element: str
    kit: Kit
    energy: float = 0.0
    energy_max: float = 1.0
    weaknesses: set[str] = field(default_factory=set)   # enemies only
    toughness: float = 0.0                              # enemies only
    toughness_max: float = 0.0
    broken: bool = False
    statuses: list[Status] = field(default_factory=list)
    ult_kind: str = "damage"                            # "damage" | "healing"
    score_value: float = 0.0                            # points granted on kill
    pending_av_scale: float = 1.0   # applied to the next requeue, then reset
    pending_av_offset: float = 0.0
    extra_turn_pending: bool = False

    @property
    def alive(self) -> bool:
        return self.hp > 0

    def status_total(self, affects: str) -> float:
        return sum(s.magnitude for s in self.statuses if s.affects == affects)

    def effective_speed(self) -> float:
        return self.speed * (1.0 + self.status_total("speed"))

    def to_dict(self) -> dict:
        return {
            "id": self.id,
            "side": self.side.value,
            "max_hp": self.max_hp,
            "hp": self.hp,
            "speed": self.speed,
            "element": self.element,
            "energy": self.energy,
            "energy_max": self.energy_max,
            "weaknesses": sorted(self.weaknesses),
            "toughness": self.toughness,
            "toughness_max": self.toughness_max,
            "broken": self.broken,
            "statuses": [s.to_dict() for s in self.statuses],
            "ult_kind": self.ult_kind,
        }


@dataclass
class ResolvedAction:
    """A fully decoded action the engine can apply."""

    actor: str
    move: Move
    target: str  # combatant id, ALL_ENEMIES, or ALL_ALLIES
    off_turn: bool = False

    def to_dict(self) -> dict:
        return {
            "actor": self.actor,
            "move": self.move.value,
            "target": self.target,
            "off_turn": self.off_turn,
        }


@dataclass
class ActionOutcome:
    """What one applied action did to the state."""

    damage_dealt: float = 0.0
    toughness_delta: float = 0.0
    break_triggered: bool = False
    sp_delta: int = 0
    energy_gains: dict[str, float] = field(default_factory=dict)
    hp_deltas: dict[str, float] = field(default_factory=dict)
    kills: list[str] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "damage_dealt": self.damage_dealt,
            "toughness_delta": self.toughness_delta,
            "break_triggered": self.break_triggered,
            "sp_delta": self.sp_delta,
            "energy_gains": dict(sorted(self.energy_gains.items())),
            "hp_deltas": dict(sorted(self.hp_deltas.items())),
            "kills": list(self.kills),
        }


@dataclass
class QueueEntry:
    combatant_id: str
    av_to_act: float


@dataclass
class BattleState:
    """Full latent battle state, owned by a single episode runner."""

    roster: list[Combatant]
    skill_points: int
    sp_cap: int
    av_base: float
    rng: Stream
    turn_queue: list[QueueEntry] = field(default_factory=list)
    av_clock: float = 0.0
    wave_index: int = 0
    current_actor: str | None = None  # popped turn-holder, None between turns
    pending_interrupts: list[str] = field(default_factory=list)
    score_events: list[tuple[float, float]] = field(default_factory=list)
    step_count: int = 0
    break_delay_frac: float = BREAK_DELAY_FRAC_DEFAULT
    break_damage_taken_mult: float = BREAK_DAMAGE_TAKEN_MULT_DEFAULT
    last_action_damage: float = 0.0

    def find(self, combatant_id: str) -> Combatant:
        for c in self.roster:
            if c.id == combatant_id:
                return c
        raise KeyError(combatant_id)

    def allies(self) -> list[Combatant]:
        return [c for c in self.roster if c.side is Side.ALLY]

    def enemies(self) -> list[Combatant]:
        return [c for c in self.roster if c.side is Side.ENEMY]

    def living(self, side: Side | None = None) -> list[Combatant]:
        return [
            c for c in self.roster
            if c.alive and (side is None or c.side is side)
        ]

    def roster_index(self, combatant_id: str) -> int:
        for i, c in enumerate(self.roster):
            if c.id == combatant_id:
                return i
        raise KeyError(combatant_id)

    def ally_slot(self, combatant_id: str) -> int:
        """Team-slot index (0-3) of an ally."""
        for i, c in enumerate(self.allies()):
            if c.id == combatant_id:
                return i
        raise KeyError(combatant_id)

    def queue_key(self, entry: QueueEntry) -> tuple:
        c = self.find(entry.combatant_id)
        side_rank = 0 if c.side is Side.ALLY else 1
        return (entry.av_to_act, side_rank, self.roster_index(entry.combatant_id))

    def sort_queue(self) -> None:
        self.turn_queue.sort(key=self.queue_key)

    def to_dict(self) -> dict:
        return {
            "roster": [c.to_dict() for c in self.roster],
            "skill_points": self.skill_points,
            "sp_cap": self.sp_cap,
            "av_base": self.av_base,
            "av_clock": self.av_clock,
            "wave_index": self.wave_index,
            "current_actor": self.current_actor,
            "turn_queue": [
                {"id": e.combatant_id, "av_to_act": e.av_to_act}
                for e in self.turn_queue
            ],
            "pending_interrupts": list(self.pending_interrupts),
            "score_events": [[av, pts] for av, pts in self.score_events],
            "step_count": self.step_count,
            "rng": self.rng.state_token(),
        }
