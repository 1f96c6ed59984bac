"""Regime interfaces: pixel primitives and action triples to engine actions.

Two sessions translate agent outputs into engine actions.  The pointing
session resolves clicks against the rendered widget map through a
minimal stateful protocol (stage a move, stage a target, confirm),
because a single click cannot carry both; a cancel keypress declines an
off-turn ultimate offer or clears the staging.  The triple session
decodes (character, move, target) index triples.  Both enforce the
consecutive-failure abort: the 10th consecutive rejected input ends the
episode.  Rejected inputs never mutate the battle state; empty or
timed-out outputs are no-ops that spend a decision step.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

from squadbench.engine.battle import IllegalAction, legal_actions, note_noop
from squadbench.engine.types import (
    ALL_ALLIES,
    ALL_ENEMIES,
    ActionOutcome,
    BattleState,
    Move,
    ResolvedAction,
    Side,
    Targeting,
)
from squadbench.observation.layout import SCREEN_H, SCREEN_W, Widget
from squadbench.observation.render import FrameObservation, hit_test

CONFIRM_KEY = "confirm"
CANCEL_KEY = "cancel"
FAILURE_LIMIT = 10

MOVE_CODES = {0: Move.BASIC, 1: Move.SKILL, 2: Move.ULTIMATE, 3: Move.HOLD}
MOVE_TO_CODE = {m: c for c, m in MOVE_CODES.items()}
TARGET_ALL_CODE = 9


@dataclass
class DcPrimitive:
    kind: str  # "click" | "keypress" | "empty"
    x: int = 0
    y: int = 0
    key: str = ""

    def to_dict(self) -> dict:
        if self.kind == "click":
            return {"kind": "click", "x": self.x, "y": self.y}
        if self.kind == "keypress":
            return {"kind": "keypress", "key": self.key}
        return {"kind": "empty"}


@dataclass
class TaTriple:
    c: int
    m: int
    t: int

    def as_list(self) -> list[int]:
        return [self.c, self.m, self.t]


@dataclass
class PendingSelection:
    staged_move: tuple[str, Move] | None = None
    staged_target: str | None = None
    confirm_armed: bool = False

    def clear(self) -> None:
        self.staged_move = None
        self.staged_target = None
        self.confirm_armed = False


@dataclass
class DecisionPoint:
    """Who the next agent output is for: the turn-holder, or the head of
    the off-turn ultimate offer queue."""

    actor_id: str
    is_interrupt: bool


def clip(x: int, y: int) -> tuple[int, int]:
    """Clamp a click to the screen: x into [0, 1919], y into [0, 1079]."""
    return (
        max(0, min(SCREEN_W - 1, int(x))),
        max(0, min(SCREEN_H - 1, int(y))),
    )


# ---------------------------------------------------------------------------
# Triple codec
# ---------------------------------------------------------------------------

def _living_enemies(state: BattleState):
    return state.living(Side.ENEMY)


def decode_ta(state: BattleState, decision: DecisionPoint, triple: TaTriple) -> ResolvedAction:
    """Map a (c, m, t) triple to an engine action or raise IllegalAction.

    c is the team slot of the addressed character, m the move code, and
    t the target index: 0-3 team slots, 4-8 living enemies in current
    spawn order (re-compacted on death), 9 select-all.
    """
    if not (0 <= triple.c <= 3) or not (0 <= triple.m <= 3) or not (0 <= triple.t <= 9):
        raise IllegalAction("out_of_range_index")

    move = MOVE_CODES[triple.m]
    holder_slot = state.ally_slot(decision.actor_id)
    if triple.c != holder_slot:
        raise IllegalAction("wrong_actor")
    if decision.is_interrupt and move not in (Move.ULTIMATE, Move.HOLD):
        raise IllegalAction("wrong_actor")
    if not decision.is_interrupt and move is Move.HOLD:
        raise IllegalAction("wrong_actor")

    actor = state.find(decision.actor_id)
    if move is Move.HOLD:
        return ResolvedAction(actor.id, Move.HOLD, actor.id, off_turn=True)
    if move is Move.SKILL and state.skill_points < 1:
        raise IllegalAction("no_skill_points")
    if move is Move.ULTIMATE and actor.energy < actor.energy_max:
        raise IllegalAction("ult_not_ready")

    move_def = actor.kit.moves.get(move)
    if move_def is None:
        raise IllegalAction("bad_multiplicity")

    targeting = move_def.targeting
    if targeting in (Targeting.ALL_ENEMIES, Targeting.ALL_ALLIES):
        if triple.t != TARGET_ALL_CODE:
            raise IllegalAction("bad_multiplicity")
        target = ALL_ENEMIES if targeting is Targeting.ALL_ENEMIES else ALL_ALLIES
    elif targeting is Targeting.SINGLE_ENEMY:
        if triple.t == TARGET_ALL_CODE:
            raise IllegalAction("bad_multiplicity")
        if triple.t <= 3:
            raise IllegalAction("bad_target_side")
        enemies = _living_enemies(state)
        index = triple.t - 4
        if index >= len(enemies):
            raise IllegalAction("dead_target")
        target = enemies[index].id
    else:  # SINGLE_ALLY
        if triple.t == TARGET_ALL_CODE:
            raise IllegalAction("bad_multiplicity")
        if triple.t > 3:
            raise IllegalAction("bad_target_side")
        ally = state.allies()[triple.t]
        if not ally.alive:
            raise IllegalAction("dead_target")
        target = ally.id

    return ResolvedAction(
        actor.id, move, target, off_turn=decision.is_interrupt
    )


def encode_ta(state: BattleState, action: ResolvedAction) -> TaTriple:
    """Inverse of decode_ta for legal actions (used to serialize masks)."""
    c = state.ally_slot(action.actor)
    m = MOVE_TO_CODE[action.move]
    if action.move is Move.HOLD:
        return TaTriple(c, m, c)
    if action.target == ALL_ENEMIES or action.target == ALL_ALLIES:
        return TaTriple(c, m, TARGET_ALL_CODE)
    target = state.find(action.target)
    if target.side is Side.ALLY:
        return TaTriple(c, m, state.ally_slot(target.id))
    enemies = _living_enemies(state)
    for i, enemy in enumerate(enemies):
        if enemy.id == action.target:
            return TaTriple(c, m, 4 + i)
    raise ValueError(f"cannot encode target {action.target}")


def ta_mask(state: BattleState, decision: DecisionPoint) -> list[TaTriple]:
    """Encoded legal actions for the current decision, in stable order."""
    return [
        encode_ta(state, action)
        for action in legal_actions(state, decision.actor_id)
    ]


# ---------------------------------------------------------------------------
# Session results
# ---------------------------------------------------------------------------

@dataclass
class StepResolution:
    """How one agent output was resolved."""

    kind: str  # "action" | "noop" | "miss" | "staged" | "cleared" | "illegal"
    action: ResolvedAction | None = None
    outcome: ActionOutcome | None = None
    reason: str = ""
    consecutive_failures: int = 0
    aborted: bool = False
    abort_reason: str = ""

    def to_dict(self) -> dict:
        out: dict = {"kind": self.kind}
        if self.action is not None:
            out["action"] = self.action.to_dict()
        if self.outcome is not None:
            out["outcome"] = self.outcome.to_dict()
        if self.reason:
            out["reason"] = self.reason
        out["consecutive_failures"] = self.consecutive_failures
        if self.aborted:
            out["aborted"] = True
            out["abort_reason"] = self.abort_reason
        return out


ApplyFn = Callable[[ResolvedAction], ActionOutcome]


class TaSession:
    """Decodes triples for one episode and enforces the K-consecutive
    invalid-output abort."""

    def __init__(self, failure_limit: int = FAILURE_LIMIT) -> None:
        self.failure_limit = failure_limit
        self.illegal_run = 0

    def _reject(self, reason: str) -> StepResolution:
        self.illegal_run += 1
        return StepResolution(
            kind="illegal",
            reason=reason,
            consecutive_failures=self.illegal_run,
            aborted=self.illegal_run >= self.failure_limit,
            abort_reason="ta_invalid_tuples",
        )

    def submit(
        self,
        state: BattleState,
        decision: DecisionPoint,
        triple: TaTriple | None,
        apply: ApplyFn,
    ) -> StepResolution:
        """Resolve one agent output; ``triple=None`` marks a malformed response."""
        if triple is None:
            return self._reject("malformed")
        try:
            action = decode_ta(state, decision, triple)
        except IllegalAction as exc:
            return self._reject(exc.reason)
        try:
            outcome = apply(action)
        except IllegalAction as exc:  # decode is authoritative; belt and braces
            return self._reject(exc.reason)
        self.illegal_run = 0
        return StepResolution(kind="action", action=action, outcome=outcome)

    def note_timeout(self, state: BattleState) -> StepResolution:
        note_noop(state)
        return StepResolution(
            kind="noop", reason="timeout", consecutive_failures=self.illegal_run
        )


class DcSession:
    """Resolves click/keypress primitives through the staging protocol and
    enforces the consecutive-miss abort."""

    def __init__(self, failure_limit: int = FAILURE_LIMIT) -> None:
        self.failure_limit = failure_limit
        self.miss_run = 0
        self.selection = PendingSelection()

    def _miss(self, reason: str) -> StepResolution:
        self.miss_run += 1
        return StepResolution(
            kind="miss",
            reason=reason,
            consecutive_failures=self.miss_run,
            aborted=self.miss_run >= self.failure_limit,
            abort_reason="dc_localization",
        )

    def _accept(self, action: ResolvedAction, outcome: ActionOutcome) -> StepResolution:
        self.miss_run = 0
        self.selection.clear()
        return StepResolution(kind="action", action=action, outcome=outcome)

    def submit(
        self,
        state: BattleState,
        decision: DecisionPoint,
        frame: FrameObservation,
        prim: DcPrimitive,
        apply: ApplyFn,
    ) -> StepResolution:
        if prim.kind == "empty":
            note_noop(state)
            self.miss_run += 1
            return StepResolution(
                kind="noop",
                reason="empty_output",
                consecutive_failures=self.miss_run,
                aborted=self.miss_run >= self.failure_limit,
                abort_reason="dc_localization",
            )
        if prim.kind == "click":
            return self._resolve_click(state, decision, frame, prim)
        if prim.kind == "keypress":
            return self._resolve_key(state, decision, prim.key, apply)
        return self._miss("unknown_primitive")

    def _resolve_click(
        self,
        state: BattleState,
        decision: DecisionPoint,
        frame: FrameObservation,
        prim: DcPrimitive,
    ) -> StepResolution:
        x, y = clip(prim.x, prim.y)
        widget = hit_test(frame, x, y)
        if widget is None:
            return self._miss("off_target")
        if not widget.enabled:
            return self._miss("widget_disabled")

        if widget.kind == "basic_button":
            if decision.is_interrupt:
                return self._miss("ineffective_during_interrupt")
            self.selection.staged_move = (decision.actor_id, Move.BASIC)
            return self._staged()
        if widget.kind == "skill_button":
            if decision.is_interrupt:
                return self._miss("ineffective_during_interrupt")
            self.selection.staged_move = (decision.actor_id, Move.SKILL)
            return self._staged()
        if widget.kind == "ult_icon":
            if widget.bound_id != decision.actor_id:
                return self._miss("ult_not_yours")
            self.selection.staged_move = (decision.actor_id, Move.ULTIMATE)
            return self._staged()
        if widget.kind == "target_frame" or widget.kind == "ally_frame":
            self.selection.staged_target = widget.bound_id
            return self._staged()
        return self._miss("ineffective_widget")

    def _staged(self) -> StepResolution:
        # Staging neither rejects nor completes: the run continues unchanged.
        return StepResolution(kind="staged", consecutive_failures=self.miss_run)

    def _resolve_key(
        self,
        state: BattleState,
        decision: DecisionPoint,
        key: str,
        apply: ApplyFn,
    ) -> StepResolution:
        if key == CANCEL_KEY:
            if decision.is_interrupt:
                action = ResolvedAction(
                    decision.actor_id, Move.HOLD, decision.actor_id, off_turn=True
                )
                outcome = apply(action)
                return self._accept(action, outcome)
            self.selection.clear()
            return StepResolution(kind="cleared", consecutive_failures=self.miss_run)
        if key != CONFIRM_KEY:
            return self._miss("unknown_key")

        if self.selection.staged_move is None:
            return self._miss("no_move_staged")
        actor_id, move = self.selection.staged_move
        actor = state.find(actor_id)
        move_def = actor.kit.moves.get(move)
        if move_def is None:
            return self._miss("no_such_move")

        if move_def.targeting is Targeting.ALL_ENEMIES:
            target = ALL_ENEMIES
        elif move_def.targeting is Targeting.ALL_ALLIES:
            target = ALL_ALLIES
        else:
            if self.selection.staged_target is None:
                return self._miss("no_target_staged")
            target = self.selection.staged_target
            target_side = state.find(target).side
            want_ally = move_def.targeting is Targeting.SINGLE_ALLY
            if (target_side is Side.ALLY) != want_ally:
                return self._miss("target_wrong_side")

        self.selection.confirm_armed = True
        action = ResolvedAction(
            actor_id,
            move,
            target,
            off_turn=decision.is_interrupt and move is Move.ULTIMATE,
        )
        try:
            outcome = apply(action)
        except IllegalAction as exc:
            self.selection.confirm_armed = False
            return self._miss(f"illegal:{exc.reason}")
        return self._accept(action, outcome)


# ---------------------------------------------------------------------------
# Canonical click sequences
# ---------------------------------------------------------------------------

def _widget_center(widget: Widget) -> tuple[int, int]:
    x, y, w, h = widget.rect
    return (x + w // 2, y + h // 2)


def _find_widget(frame: FrameObservation, kind: str, bound_id: str | None = None) -> Widget:
    for widget in frame.layout:
        if widget.kind == kind and (bound_id is None or widget.bound_id == bound_id):
            return widget
    raise KeyError(f"no widget {kind} bound to {bound_id}")


def canonical_clicks(
    state: BattleState, frame: FrameObservation, action: ResolvedAction
) -> list[DcPrimitive]:
    """The documented click sequence equivalent to one engine action.

    hold                  -> cancel keypress
    basic/skill on target -> move button, target frame, confirm
    ultimate              -> own ultimate icon, target frame if single, confirm
    all-target moves      -> move button, confirm (target implied by the kit)
    """
    if action.move is Move.HOLD:
        return [DcPrimitive(kind="keypress", key=CANCEL_KEY)]

    prims: list[DcPrimitive] = []
    if action.move is Move.BASIC:
        button = _find_widget(frame, "basic_button")
    elif action.move is Move.SKILL:
        button = _find_widget(frame, "skill_button")
    else:
        button = _find_widget(frame, "ult_icon", action.actor)
    bx, by = _widget_center(button)
    prims.append(DcPrimitive(kind="click", x=bx, y=by))

    if action.target not in (ALL_ENEMIES, ALL_ALLIES):
        target = state.find(action.target)
        kind = "ally_frame" if target.side is Side.ALLY else "target_frame"
        widget = _find_widget(frame, kind, action.target)
        tx, ty = _widget_center(widget)
        prims.append(DcPrimitive(kind="click", x=tx, y=ty))

    prims.append(DcPrimitive(kind="keypress", key=CONFIRM_KEY))
    return prims
