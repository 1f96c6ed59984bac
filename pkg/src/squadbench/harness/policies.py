"""Baseline policies: uniform random over the action mask, and the
rule-based auto-battler.

Both are tool-assisted agents speaking the standard envelope.  The
random baseline draws from its own seeded stream, independent of the
engine's, so engine replay is unaffected by policy sampling order.
"""

from __future__ import annotations

from squadbench.engine.tasks import TaskSpec
from squadbench.rng import Stream

HEAL_THRESHOLD_PCT = 50.0
SP_FLOOR = 2


class RandomPolicy:
    """Picks a permissible triple uniformly at random from the mask."""

    def __init__(self, seed: int = 0):
        self.agent_id = "random"
        self._seed = seed
        self._stream = Stream("policy.random", seed)

    def reset(self, task_id: int, episode_seed: int) -> None:
        self._stream = Stream("policy.random", self._seed, task_id, episode_seed)

    def respond(self, request: dict) -> dict | None:
        if request.get("type") == "ask_point":
            return {"ask": {"choice": "act"}}
        mask = request.get("mask") or []
        if not mask:
            return None
        choice = mask[self._stream.randint(0, len(mask) - 1)]
        return {"ta": list(choice)}


class AutoBattlePolicy:
    """Deterministic rule on top of the structured observation.

    Off-turn offers: release damage ultimates immediately; hold healing
    ultimates until a teammate drops below the heal threshold.  On turn:
    use the skill when the team has points to spare and the actor's
    element matches a living enemy weakness, otherwise basic attack.
    Attacks prefer the lowest-health enemy weak to the actor's element,
    then the lowest-health enemy.
    """

    def __init__(
        self,
        spec: TaskSpec | None = None,
        heal_threshold: float = HEAL_THRESHOLD_PCT,
        sp_floor: int = SP_FLOOR,
    ):
        self.agent_id = "autobattle"
        self.spec = spec
        self.heal_threshold = heal_threshold
        self.sp_floor = sp_floor
        self._elements: list[str] = []
        self._ult_kinds: list[str] = []
        if spec is not None:
            self._bind(spec)

    def _bind(self, spec: TaskSpec) -> None:
        self.spec = spec
        self._elements = [a.kit.element for a in spec.allies]
        self._ult_kinds = [a.ult_kind for a in spec.allies]

    def reset(self, task_id: int, episode_seed: int) -> None:
        if self.spec is None or self.spec.task_id != task_id:
            from squadbench.engine.tasks import load_task_spec

            self._bind(load_task_spec(task_id))

    def respond(self, request: dict) -> dict | None:
        if request.get("type") == "ask_point":
            return {"ask": {"choice": "act"}}
        mask = [tuple(m) for m in request.get("mask") or []]
        if not mask:
            return None
        obs = request.get("observation") or {}
        decision = request.get("decision") or {}
        slot = decision.get("slot", 0)
        enemies = obs.get("enemies") or []
        allies = obs.get("allies") or []

        if decision.get("is_interrupt"):
            return {"ta": list(self._interrupt_choice(slot, mask, enemies, allies))}
        return {"ta": list(self._turn_choice(slot, mask, obs, enemies))}

    # -- helpers ---------------------------------------------------------

    def _enemy_rank(self, slot: int, enemies: list[dict]):
        """Sort key picking the break-ready, lowest-health target first."""
        element = self._elements[slot]

        def rank(index_enemy):
            i, enemy = index_enemy
            weak = element in (enemy.get("weaknesses") or [])
            hp = enemy.get("hp_pct", 100.0)
            return (0 if weak else 1, hp, i)

        return rank

    def _pick_target(self, slot: int, triples: list[tuple], enemies: list[dict]) -> tuple:
        """Among same-move triples, choose by enemy preference order."""
        enemy_order = sorted(
            enumerate(enemies), key=self._enemy_rank(slot, enemies)
        )
        prefer = [4 + i for i, _ in enemy_order]
        for t in prefer:
            for triple in triples:
                if triple[2] == t:
                    return triple
        return triples[0]

    def _interrupt_choice(self, slot, mask, enemies, allies) -> tuple:
        hold = next((m for m in mask if m[1] == 3), None)
        releases = [m for m in mask if m[1] == 2]
        if not releases:
            return hold
        if self._ult_kinds[slot] == "healing":
            wounded = any(
                a.get("hp_pct", 100.0) < self.heal_threshold
                for a in allies
                if a.get("alive", True)
            )
            if not wounded:
                return hold
            return releases[0]
        enemy_releases = [m for m in releases if m[2] >= 4]
        if enemy_releases:
            return self._pick_target(slot, enemy_releases, enemies)
        return releases[0]

    def _turn_choice(self, slot, mask, obs, enemies) -> tuple:
        basics = [m for m in mask if m[1] == 0]
        skills = [m for m in mask if m[1] == 1]
        ults = [m for m in mask if m[1] == 2]

        # A ready ultimate on the actor's own turn follows the same rule
        # as an off-turn offer.
        if ults and self._ult_kinds[slot] == "damage":
            enemy_ults = [m for m in ults if m[2] >= 4]
            if enemy_ults:
                return self._pick_target(slot, enemy_ults, enemies)
            return ults[0]
        if ults and self._ult_kinds[slot] == "healing":
            allies = obs.get("allies") or []
            if any(
                a.get("hp_pct", 100.0) < self.heal_threshold
                for a in allies
                if a.get("alive", True)
            ):
                return ults[0]

        sp = obs.get("skill_points")
        element = self._elements[slot]
        if skills and sp is not None and sp >= self.sp_floor:
            enemy_skills = [m for m in skills if m[2] >= 4]
            weak_somewhere = any(
                element in (e.get("weaknesses") or []) for e in enemies
            )
            if enemy_skills and weak_somewhere:
                return self._pick_target(slot, enemy_skills, enemies)
        if basics:
            enemy_basics = [m for m in basics if m[2] >= 4]
            if enemy_basics:
                return self._pick_target(slot, enemy_basics, enemies)
            return basics[0]
        return mask[0]


class ScriptedPolicy:
    """Replays a fixed list of responses; used by tests and failure drills."""

    def __init__(self, responses: list[dict | None], agent_id: str = "scripted"):
        self.agent_id = agent_id
        self._responses = list(responses)
        self._i = 0

    def reset(self, task_id: int, episode_seed: int) -> None:
        self._i = 0

    def respond(self, request: dict) -> dict | None:
        if self._i >= len(self._responses):
            return None
        response = self._responses[self._i]
        self._i += 1
        return response
