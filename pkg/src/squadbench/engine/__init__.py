"""Combat engine: domain types, task specs, and the battle state machine."""

from squadbench.engine.battle import (
    EngineError,
    IllegalAction,
    Termination,
    apply_action,
    check_termination,
    enemy_action,
    finish_turn,
    legal_actions,
    load_task,
    next_turn,
    note_noop,
    state_digest,
)
from squadbench.engine.tasks import (
    ConfigError,
    TaskSpec,
    load_all_tasks,
    load_task_spec,
    parse_task_spec,
)
from squadbench.engine.types import (
    ALL_ALLIES,
    ALL_ENEMIES,
    ActionOutcome,
    BattleState,
    Combatant,
    Move,
    ResolvedAction,
    Side,
    Status,
)

__all__ = [
    "ALL_ALLIES",
    "ALL_ENEMIES",
    "ActionOutcome",
    "BattleState",
    "Combatant",
    "ConfigError",
    "EngineError",
    "IllegalAction",
    "Move",
    "ResolvedAction",
    "Side",
    "Status",
    "TaskSpec",
    "Termination",
    "apply_action",
    "check_termination",
    "enemy_action",
    "finish_turn",
    "legal_actions",
    "load_all_tasks",
    "load_task",
    "load_task_spec",
    "next_turn",
    "note_noop",
    "parse_task_spec",
    "state_digest",
]
