"""Battle state machine: scheduling, legality, action resolution, termination.

Turn order runs on an action-value clock: each combatant waits
``av_base / effective_speed`` between turns, the globally smallest wait
acts next, and the clock advances by the amount waited.  All randomness
(crit rolls) flows through the state's single named stream in strict
resolution order, so a battle replays bit-identically from its seed.
"""

from __future__ import annotations

import hashlib
import json
from enum import Enum

from squadbench.engine.tasks import (
    FAMILY_EOW,
    FAMILY_MOC,
    EnemyDef,
    TaskSpec,
)
from squadbench.engine.types import (
    ALL_ALLIES,
    ALL_ENEMIES,
    ActionOutcome,
    BattleState,
    Combatant,
    Kit,
    Move,
    MoveDef,
    QueueEntry,
    ResolvedAction,
    Side,
    Status,
    Targeting,
)
from squadbench.metrics import moc_cycles
from squadbench.rng import Stream


class EngineError(RuntimeError):
    """An internal invariant was violated (a bug, not an agent mistake)."""


class IllegalAction(ValueError):
    """An action failed legality checks; ``reason`` is machine-readable."""

    def __init__(self, reason: str, detail: str = ""):
        super().__init__(f"{reason}: {detail}" if detail else reason)
        self.reason = reason


class Termination(str, Enum):
    ONGOING = "ongoing"
    VICTORY = "victory"
    DEFEAT = "defeat"
    BUDGET_EXHAUSTED = "budget_exhausted"


def _enemy_kit(e: EnemyDef) -> Kit:
    return Kit(
        element=e.element,
        moves={Move.BASIC: MoveDef(damage=e.damage, targeting=Targeting.SINGLE_ENEMY)},
    )


def _spawn_enemies(spec: TaskSpec, wave_index: int) -> list[Combatant]:
    return [
        Combatant(
            id=f"w{wave_index}_{e.id}",
            side=Side.ENEMY,
            max_hp=e.max_hp,
            hp=e.max_hp,
            speed=e.speed,
            element=e.element,
            kit=_enemy_kit(e),
            weaknesses=set(e.weaknesses),
            toughness=e.toughness_max,
            toughness_max=e.toughness_max,
            score_value=e.score_value,
        )
        for e in spec.waves[wave_index]
    ]


def load_task(spec: TaskSpec, seed: int) -> BattleState:
    """Build the initial battle state for one episode.

    The engine stream is seeded from (spec.seed_base, seed) so distinct
    trials draw independent crit sequences while identical (spec, seed)
    pairs reproduce exactly.
    """
    allies = [
        Combatant(
            id=a.id,
            side=Side.ALLY,
            max_hp=a.max_hp,
            hp=a.max_hp,
            speed=a.speed,
            element=a.kit.element,
            kit=a.kit,
            energy=0.0,
            energy_max=a.energy_max,
            ult_kind=a.ult_kind,
        )
        for a in spec.allies
    ]
    state = BattleState(
        roster=allies,
        skill_points=spec.sp_initial,
        sp_cap=spec.sp_cap,
        av_base=spec.av_base,
        rng=Stream("combat", spec.seed_base, seed),
        break_delay_frac=spec.break_delay_frac,
        break_damage_taken_mult=spec.break_damage_taken_mult,
    )
    state.roster.extend(_spawn_enemies(spec, 0))
    for c in state.roster:
        state.turn_queue.append(QueueEntry(c.id, spec.av_base / c.effective_speed()))
    state.sort_queue()
    return state


def next_turn(state: BattleState) -> tuple[str, float]:
    """Pop the next actor from the queue and advance the AV clock.

    Returns (actor id, av advanced).  Every other queue entry is rebased
    by the advanced amount.  Allies sitting at full energy (other than
    the actor, who can cast on-turn) are offered an off-turn ultimate
    interrupt before the turn is handed over.
    """
    if not state.turn_queue:
        raise EngineError("turn queue is empty")
    state.sort_queue()
    head = state.turn_queue.pop(0)
    advanced = head.av_to_act
    state.av_clock += advanced
    state.current_actor = head.combatant_id
    for entry in state.turn_queue:
        entry.av_to_act -= advanced
    state.pending_interrupts = [
        a.id
        for a in state.living(Side.ALLY)
        if a.id != head.combatant_id and a.energy >= a.energy_max
    ]
    return head.combatant_id, advanced


def _opponents(state: BattleState, actor: Combatant) -> list[Combatant]:
    side = Side.ENEMY if actor.side is Side.ALLY else Side.ALLY
    return state.living(side)


def _comrades(state: BattleState, actor: Combatant) -> list[Combatant]:
    return state.living(actor.side)


def _move_targets(state: BattleState, actor: Combatant, move_def: MoveDef) -> list[str]:
    """Legal target designators for one move, relative to the actor's side."""
    if move_def.targeting is Targeting.SINGLE_ENEMY:
        return [c.id for c in _opponents(state, actor)]
    if move_def.targeting is Targeting.SINGLE_ALLY:
        return [c.id for c in _comrades(state, actor)]
    if move_def.targeting is Targeting.ALL_ENEMIES:
        return [ALL_ENEMIES] if _opponents(state, actor) else []
    return [ALL_ALLIES] if _comrades(state, actor) else []


def legal_actions(state: BattleState, actor_id: str) -> list[ResolvedAction]:
    """All actions the current turn-holder or interrupt-holder may take.

    Order is deterministic (moves in basic/skill/ultimate order, targets
    in roster order) so serialized action masks are stable.
    """
    actor = state.find(actor_id)
    if not actor.alive:
        raise EngineError(f"legal_actions for dead combatant {actor_id}")

    actions: list[ResolvedAction] = []
    if state.pending_interrupts and state.pending_interrupts[0] == actor_id:
        ult = actor.kit.moves.get(Move.ULTIMATE)
        if ult is not None and actor.energy >= actor.energy_max:
            for target in _move_targets(state, actor, ult):
                actions.append(
                    ResolvedAction(actor_id, Move.ULTIMATE, target, off_turn=True)
                )
        actions.append(ResolvedAction(actor_id, Move.HOLD, actor_id, off_turn=True))
        return actions

    basic = actor.kit.moves.get(Move.BASIC)
    if basic is not None:
        for target in _move_targets(state, actor, basic):
            actions.append(ResolvedAction(actor_id, Move.BASIC, target))
    skill = actor.kit.moves.get(Move.SKILL)
    if skill is not None and state.skill_points >= 1:
        for target in _move_targets(state, actor, skill):
            actions.append(ResolvedAction(actor_id, Move.SKILL, target))
    ult = actor.kit.moves.get(Move.ULTIMATE)
    if ult is not None and actor.energy >= actor.energy_max:
        for target in _move_targets(state, actor, ult):
            actions.append(ResolvedAction(actor_id, Move.ULTIMATE, target))
    return actions


def _validate(state: BattleState, action: ResolvedAction) -> None:
    for legal in legal_actions(state, action.actor):
        if (
            legal.move == action.move
            and legal.target == action.target
            and legal.off_turn == action.off_turn
        ):
            return
    actor = state.find(action.actor)
    if action.move is Move.SKILL and state.skill_points < 1:
        raise IllegalAction("no_skill_points")
    if action.move is Move.ULTIMATE and actor.energy < actor.energy_max:
        raise IllegalAction("ult_not_ready")
    raise IllegalAction("illegal_action", json.dumps(action.to_dict()))


def _resolve_target_list(state: BattleState, action: ResolvedAction) -> list[Combatant]:
    actor = state.find(action.actor)
    if action.target == ALL_ENEMIES:
        return _opponents(state, actor)
    if action.target == ALL_ALLIES:
        return _comrades(state, actor)
    return [state.find(action.target)]


def _damage_multiplier(attacker: Combatant, target: Combatant, state: BattleState) -> float:
    dealt = 1.0 + attacker.status_total("damage_dealt")
    taken = 1.0 + target.status_total("damage_taken")
    defense = max(0.0, 1.0 - target.status_total("defense"))
    mult = dealt * taken * defense
    if target.broken:
        mult *= state.break_damage_taken_mult
    return mult


def _adjust_av(state: BattleState, target: Combatant, scale: float = 1.0, offset: float = 0.0) -> None:
    """Adjust a unit's wait: queued entries change now, the popped actor's
    adjustment is stashed and applied when it requeues."""
    for entry in state.turn_queue:
        if entry.combatant_id == target.id:
            entry.av_to_act = entry.av_to_act * scale + offset
            state.sort_queue()
            return
    target.pending_av_scale *= scale
    target.pending_av_offset += offset


def _apply_kill(state: BattleState, victim: Combatant, outcome: ActionOutcome) -> None:
    victim.hp = 0.0
    outcome.kills.append(victim.id)
    state.turn_queue = [e for e in state.turn_queue if e.combatant_id != victim.id]
    if victim.id in state.pending_interrupts:
        state.pending_interrupts.remove(victim.id)
    if victim.side is Side.ENEMY and victim.score_value > 0:
        state.score_events.append((state.av_clock, victim.score_value))


def apply_action(
    state: BattleState, action: ResolvedAction, agent_issued: bool = True
) -> ActionOutcome:
    """Validate and resolve one action, mutating the state.

    Raises :class:`IllegalAction` without touching the state when the
    action is not currently legal.  ``agent_issued`` distinguishes agent
    decisions (which consume the step budget) from engine-driven enemy
    moves.
    """
    _validate(state, action)
    actor = state.find(action.actor)
    outcome = ActionOutcome()

    if action.move is Move.HOLD:
        state.pending_interrupts.pop(0)
        if agent_issued:
            state.step_count += 1
        state.last_action_damage = 0.0
        return outcome

    if action.off_turn:
        state.pending_interrupts.pop(0)

    move_def = actor.kit.move(action.move)
    targets = _resolve_target_list(state, action)

    # Shared-resource bookkeeping; the point pool belongs to the ally team.
    if actor.side is Side.ALLY:
        if action.move is Move.BASIC:
            if state.skill_points < state.sp_cap:
                state.skill_points += 1
                outcome.sp_delta = +1
        elif action.move is Move.SKILL:
            state.skill_points -= 1
            outcome.sp_delta = -1
        elif action.move is Move.ULTIMATE:
            actor.energy = 0.0

    # One crit roll per action, shared by every target, keeps the draw
    # order independent of target count.
    crit = 1.0
    if move_def.damage > 0 and actor.kit.crit_chance > 0:
        if state.rng.uniform() < actor.kit.crit_chance:
            crit = actor.kit.crit_mult

    for target in targets:
        if not target.alive:
            continue
        if move_def.damage > 0:
            dmg = move_def.damage * _damage_multiplier(actor, target, state) * crit
            dmg = min(dmg, target.hp)
            target.hp -= dmg
            outcome.damage_dealt += dmg
            outcome.hp_deltas[target.id] = outcome.hp_deltas.get(target.id, 0.0) - dmg
            if target.side is Side.ALLY and target.kit.energy_on_hit > 0 and target.alive:
                gain = min(target.kit.energy_on_hit, target.energy_max - target.energy)
                if gain > 0:
                    target.energy += gain
                    outcome.energy_gains[target.id] = (
                        outcome.energy_gains.get(target.id, 0.0) + gain
                    )
            if (
                move_def.toughness_damage > 0
                and target.side is Side.ENEMY
                and target.toughness > 0
                and actor.kit.element in target.weaknesses
            ):
                delta = min(move_def.toughness_damage, target.toughness)
                target.toughness -= delta
                outcome.toughness_delta -= delta
                if target.toughness <= 0 and target.alive:
                    target.toughness = 0.0
                    target.broken = True
                    outcome.break_triggered = True
                    delay = state.break_delay_frac * state.av_base / target.effective_speed()
                    _adjust_av(state, target, offset=delay)
        if move_def.implant_element and target.side is not actor.side:
            target.weaknesses.add(move_def.implant_element)
        if move_def.heal_frac > 0 and target.side is actor.side and target.alive:
            heal = min(move_def.heal_frac * target.max_hp, target.max_hp - target.hp)
            if heal > 0:
                target.hp += heal
                outcome.hp_deltas[target.id] = (
                    outcome.hp_deltas.get(target.id, 0.0) + heal
                )
        if move_def.advance_frac > 0 and target.side is actor.side and target.alive:
            _adjust_av(state, target, scale=1.0 - move_def.advance_frac)
        if target.alive:
            for status_spec in move_def.statuses:
                target.statuses.append(
                    Status(
                        kind=status_spec.get("kind", "buff"),
                        name=status_spec["name"],
                        magnitude=float(status_spec["magnitude"]),
                        remaining_turns=int(status_spec.get("turns", 2)),
                        affects=status_spec["affects"],
                    )
                )
        else:
            _apply_kill(state, target, outcome)

    if move_def.energy_gain > 0 and actor.side is Side.ALLY and actor.alive:
        gain = min(move_def.energy_gain, actor.energy_max - actor.energy)
        if gain > 0:
            actor.energy += gain
            outcome.energy_gains[actor.id] = (
                outcome.energy_gains.get(actor.id, 0.0) + gain
            )

    if actor.kit.extra_turn_on_kill and outcome.kills and not action.off_turn:
        actor.extra_turn_pending = True

    if agent_issued:
        state.step_count += 1
    state.last_action_damage = outcome.damage_dealt
    return outcome


def note_noop(state: BattleState) -> None:
    """Record an empty or timed-out decision: spends budget, changes nothing else."""
    state.step_count += 1
    state.last_action_damage = 0.0


def finish_turn(state: BattleState, actor_id: str) -> None:
    """Close out a turn: tick the actor's statuses, restore toughness if it
    spent this turn broken, and requeue it."""
    if state.current_actor == actor_id:
        state.current_actor = None
    try:
        actor = state.find(actor_id)
    except KeyError:
        return
    if not actor.alive:
        return

    kept = []
    for status in actor.statuses:
        status.remaining_turns -= 1
        if status.remaining_turns > 0:
            kept.append(status)
    actor.statuses = kept

    if actor.broken:
        actor.broken = False
        actor.toughness = actor.toughness_max

    if actor.extra_turn_pending:
        actor.extra_turn_pending = False
        av = 0.0
    else:
        av = state.av_base / actor.effective_speed()
        av = av * actor.pending_av_scale + actor.pending_av_offset
    actor.pending_av_scale = 1.0
    actor.pending_av_offset = 0.0
    state.turn_queue.append(QueueEntry(actor_id, av))
    state.sort_queue()


def enemy_action(state: BattleState, actor_id: str) -> ResolvedAction:
    """Fixed enemy policy: basic attack into the lowest-HP living ally."""
    allies = state.living(Side.ALLY)
    if not allies:
        raise EngineError("enemy acting with no living allies")
    target = min(allies, key=lambda c: (c.hp, state.roster_index(c.id)))
    return ResolvedAction(actor_id, Move.BASIC, target.id)


def check_termination(state: BattleState, spec: TaskSpec) -> Termination:
    """Classify the episode status, loading the next wave when one clears."""
    if not state.living(Side.ALLY):
        return Termination.DEFEAT

    while not state.living(Side.ENEMY):
        if state.wave_index + 1 >= len(spec.waves):
            return Termination.VICTORY
        state.wave_index += 1
        fresh = _spawn_enemies(spec, state.wave_index)
        state.roster.extend(fresh)
        for c in fresh:
            state.turn_queue.append(
                QueueEntry(c.id, state.av_base / c.effective_speed())
            )
        state.sort_queue()

    if spec.family == FAMILY_EOW:
        if state.step_count > spec.step_budget:
            return Termination.BUDGET_EXHAUSTED
    elif spec.family == FAMILY_MOC:
        if spec.c_max is not None and moc_cycles(state.av_clock) > spec.c_max:
            return Termination.BUDGET_EXHAUSTED
    elif spec.av_budget is not None and state.av_clock > spec.av_budget:
        return Termination.BUDGET_EXHAUSTED
    return Termination.ONGOING


def state_digest(state: BattleState) -> str:
    """Stable content hash of the full battle state."""
    payload = json.dumps(state.to_dict(), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(payload.encode("utf-8")).hexdigest()
