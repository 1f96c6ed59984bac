"""Battle runner: advances a battle between agent decision points.

Enemy turns resolve automatically; the runner stops wherever an agent
output is required, which is either the head of the off-turn ultimate
offer queue or an ally's turn.  Exactly this class drives live episodes
and log replay, so both advance through identical engine calls.
"""

from __future__ import annotations

from squadbench.engine.battle import (
    Termination,
    apply_action,
    check_termination,
    enemy_action,
    finish_turn,
    load_task,
    next_turn,
    state_digest,
)
from squadbench.engine.tasks import TaskSpec
from squadbench.engine.types import ActionOutcome, ResolvedAction, Side
from squadbench.interface import DecisionPoint


class BattleRunner:
    def __init__(self, spec: TaskSpec, seed: int):
        self.spec = spec
        self.seed = seed
        self.state = load_task(spec, seed)
        self.termination = Termination.ONGOING

    @property
    def finished(self) -> bool:
        return self.termination is not Termination.ONGOING

    def advance_to_decision(self) -> DecisionPoint | None:
        """Run the battle forward to the next agent decision.

        Returns None once the episode has terminated.
        """
        state = self.state
        while True:
            self.termination = check_termination(state, self.spec)
            if self.finished:
                return None
            if state.current_actor is None:
                next_turn(state)
            if state.pending_interrupts:
                return DecisionPoint(state.pending_interrupts[0], is_interrupt=True)
            holder = state.find(state.current_actor)
            if not holder.alive:
                # Died to an off-turn ultimate before acting; the turn passes.
                state.current_actor = None
                continue
            if holder.side is Side.ENEMY:
                apply_action(
                    state, enemy_action(state, holder.id), agent_issued=False
                )
                finish_turn(state, holder.id)
                continue
            return DecisionPoint(holder.id, is_interrupt=False)

    def apply_decision(self, action: ResolvedAction) -> ActionOutcome:
        """Apply one agent action; on-turn actions also close the turn."""
        outcome = apply_action(self.state, action)
        if not action.off_turn:
            finish_turn(self.state, action.actor)
        return outcome

    def digest(self) -> str:
        return state_digest(self.state)
