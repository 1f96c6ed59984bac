"""Episode orchestration: one agent, one task, one seed, one step log.

``EpisodeDriver`` exposes the episode as a request/response state
machine so the same code drives autonomous runs (``run_episode``), the
HTTP service, and human play.  Every exchange is logged before the next
request is built, observations are built per regime (frame bytes for
pointing, structured record plus action mask for tool-assisted), and
rewards accrue whenever a decision consumes budget.
"""

from __future__ import annotations

import base64
import hashlib
import json
import math
from dataclasses import dataclass
from pathlib import Path

from squadbench.askoract import (
    AskDecision,
    AskGate,
    DecisionLogEntry,
    Hint,
    HintOracle,
    decide_from_response,
)
from squadbench.engine.battle import Termination
from squadbench.engine.tasks import FAMILY_AS, FAMILY_EOW, FAMILY_MOC, FAMILY_PF, TaskSpec
from squadbench.engine.types import Side
from squadbench.harness.agents import (
    INPUT_EVENT_DELAY_S,
    SCHEMA_VERSION,
    TransportError,
    parse_dc_response,
    parse_ta_response,
)
from squadbench.harness.runner import BattleRunner
from squadbench.harness.steplog import StepLogWriter
from squadbench.interface import DcSession, DecisionPoint, TaSession, ta_mask
from squadbench.metrics import (
    FamilyScore,
    HpSnapshot,
    RewardTrace,
    as_score,
    episode_reward,
    moc_cycles,
    moc_score,
    pf_score,
    step_reward,
)
from squadbench.observation.render import png_bytes, render_frame
from squadbench.observation.textify import textify

REGIME_DC = "dc"
REGIME_TA = "ta"
REGIME_TA_NO_OCR = "ta_no_ocr"
REGIME_TA_ASK = "ta_ask"
REGIMES = (REGIME_DC, REGIME_TA, REGIME_TA_NO_OCR, REGIME_TA_ASK)

EXCHANGE_LIMIT = 20000  # hard stop against non-terminating agents


@dataclass
class EpisodeResult:
    task_id: int
    regime: str
    seed: int
    agent_id: str
    outcome: str  # victory | defeat | budget_exhausted | aborted
    abort_reason: str | None
    t_steps: float  # +inf unless the episode ended in victory
    av_used: float
    score: FamilyScore
    reward_total: float
    r_scaled: float
    exchanges: int
    final_digest: str
    log_path: str | None = None
    ask: dict | None = None

    @property
    def victory(self) -> bool:
        return self.outcome == "victory"

    def to_dict(self) -> dict:
        return {
            "task_id": self.task_id,
            "regime": self.regime,
            "seed": self.seed,
            "agent_id": self.agent_id,
            "outcome": self.outcome,
            "abort_reason": self.abort_reason,
            "t_steps": "inf" if math.isinf(self.t_steps) else self.t_steps,
            "av_used": self.av_used,
            "score": self.score.to_dict(),
            "reward_total": self.reward_total,
            "r_scaled": self.r_scaled,
            "exchanges": self.exchanges,
            "final_digest": self.final_digest,
            "ask": self.ask,
        }


def _digest_bytes(data: bytes) -> str:
    return hashlib.sha256(data).hexdigest()


def _digest_json(payload: dict) -> str:
    return _digest_bytes(
        json.dumps(payload, sort_keys=True, separators=(",", ":")).encode("utf-8")
    )


class EpisodeDriver:
    """Drives one episode as an explicit request/response state machine."""

    def __init__(
        self,
        spec: TaskSpec,
        regime: str,
        seed: int,
        agent_id: str = "agent",
        log_path: str | Path | None = None,
        oracle: HintOracle | None = None,
        decision_log: list[DecisionLogEntry] | None = None,
        episode_index: int = 1,
        failure_limit: int = 10,
    ):
        if regime not in REGIMES:
            raise ValueError(f"unknown regime '{regime}'")
        self.spec = spec
        self.regime = regime
        self.seed = seed
        self.agent_id = agent_id
        self.episode_index = episode_index
        self.runner = BattleRunner(spec, seed)
        self.session = (
            DcSession(failure_limit) if regime == REGIME_DC else TaSession(failure_limit)
        )
        self.trace = RewardTrace(r_min=spec.reward.r_min, r_max=spec.reward.r_max)
        self.oracle = oracle if oracle is not None else (HintOracle() if regime == REGIME_TA_ASK else None)
        self.decision_log = decision_log if decision_log is not None else []
        self.gate = AskGate()
        self.hint: Hint | None = None
        self.ask_decision: AskDecision | None = None
        self.exchange = 0
        self.action_summary: list[str] = []
        self.result: EpisodeResult | None = None

        self._phase = "ask" if regime == REGIME_TA_ASK else "battle"
        self._decision: DecisionPoint | None = None
        self._request: dict | None = None
        self._frame = None
        self._prev_h = self._hp_vector()
        self._prev_dh = (0.0, 0.0, 0.0, 0.0)

        self.log = StepLogWriter(log_path)
        header = {
            "type": "header",
            "schema": SCHEMA_VERSION,
            "task_id": spec.task_id,
            "task_name": spec.name,
            "regime": regime,
            "seed": seed,
            "agent_id": agent_id,
            "episode_index": episode_index,
            "input_delay_s": INPUT_EVENT_DELAY_S,
            "no_assistance": spec.no_assistance,
        }
        if self.oracle is not None:
            header["corpus_digest"] = self.oracle.digest()
        self.log.write(header)

    # -- observation building -------------------------------------------

    def _hp_vector(self) -> tuple[float, float, float, float]:
        values = [c.hp / c.max_hp for c in self.runner.state.allies()]
        return tuple(values)  # type: ignore[return-value]

    def _episode_header(self) -> dict:
        return {
            "task_id": self.spec.task_id,
            "regime": self.regime,
            "seed": self.seed,
            "episode_index": self.episode_index,
            "exchange": self.exchange,
            "input_delay_s": INPUT_EVENT_DELAY_S,
            "schema": SCHEMA_VERSION,
        }

    def _build_request(self, decision: DecisionPoint) -> dict:
        state = self.runner.state
        request: dict = {
            "v": SCHEMA_VERSION,
            "type": "decision",
            "episode": self._episode_header(),
            "regime": self.regime,
        }
        if self.regime == REGIME_DC:
            self._frame = render_frame(state)
            png = png_bytes(self._frame.image)
            request["observation"] = {
                "frame_png_b64": base64.b64encode(png).decode("ascii"),
                "frame_id": self._frame.frame_id,
                "width": self._frame.image.shape[1],
                "height": self._frame.image.shape[0],
            }
            self._observation_digest = _digest_bytes(png)
        else:
            obs = textify(state, ocr_enabled=self.regime != REGIME_TA_NO_OCR)
            payload = obs.to_payload()
            mask = [t.as_list() for t in ta_mask(state, decision)]
            request["decision"] = {
                "actor": decision.actor_id,
                "slot": state.ally_slot(decision.actor_id),
                "is_interrupt": decision.is_interrupt,
            }
            request["observation"] = payload
            request["mask"] = mask
            if self.hint is not None:
                request["hint"] = self.hint.text
            self._observation_digest = _digest_json(
                {"observation": payload, "mask": mask, "hint": request.get("hint")}
            )
        return request

    # -- public state machine -------------------------------------------

    def current_request(self) -> dict | None:
        """The pending envelope for the agent, or None when finished."""
        if self.result is not None:
            return None
        if self._phase == "ask":
            return {
                "v": SCHEMA_VERSION,
                "type": "ask_point",
                "episode": self._episode_header(),
                "regime": self.regime,
                "decision_log": [e.to_dict() for e in self.decision_log],
            }
        if self._request is not None:
            return self._request
        decision = self.runner.advance_to_decision()
        if decision is None:
            self._finalize()
            return None
        self._decision = decision
        self._request = self._build_request(decision)
        return self._request

    def submit(self, response: dict | None) -> dict | None:
        """Resolve one agent response; returns the logged record."""
        if self.result is not None:
            return None
        if self._phase == "ask":
            return self._submit_ask(response)
        if self._request is None and self.current_request() is None:
            return None
        return self._submit_decision(response)

    def _submit_ask(self, response: dict | None) -> dict:
        decision = decide_from_response(response, self.spec.task_id, self.episode_index)
        self.ask_decision = decision
        if decision.choice == "ask":
            self.gate.accept()
            self.hint = self.oracle.retrieve(decision.question or "", self.spec.task_id)
        record = {
            "type": "ask",
            "decision": decision.to_dict(),
            "hint": self.hint.to_dict() if self.hint is not None else None,
        }
        self.log.write(record)
        self._phase = "battle"
        return record

    def _submit_decision(self, response: dict | None) -> dict:
        state = self.runner.state
        decision = self._decision
        assert decision is not None

        if self.regime == REGIME_DC:
            prim = parse_dc_response(response)
            resolution = self.session.submit(
                state, decision, self._frame, prim, self.runner.apply_decision
            )
        else:
            if response is None:
                resolution = self.session.note_timeout(state)
            else:
                triple = parse_ta_response(response)
                resolution = self.session.submit(
                    state, decision, triple, self.runner.apply_decision
                )

        self.exchange += 1
        reward_record = None
        if resolution.kind in ("action", "noop"):
            reward_record = self._accrue_reward(resolution)
            if resolution.kind == "action" and resolution.action is not None:
                self.action_summary.append(self._summarize(resolution))

        record = {
            "type": "step",
            "exchange": self.exchange,
            "decision": {
                "actor": decision.actor_id,
                "is_interrupt": decision.is_interrupt,
            },
            "observation_digest": self._observation_digest,
            "agent_output": response,
            "resolution": resolution.to_dict(),
            "reward": reward_record,
            "av_clock": state.av_clock,
            "step_count": state.step_count,
            "state_digest": self.runner.digest(),
        }
        self.log.write(record)

        if resolution.aborted:
            self._finalize(abort_reason=resolution.abort_reason)
        elif self.exchange >= EXCHANGE_LIMIT:
            self._finalize(abort_reason="exchange_limit")
        elif resolution.kind in ("action", "noop"):
            # The decision may have been consumed or the budget advanced.
            self._decision = None
            self._request = None
            self._frame = None
        return record

    def _summarize(self, resolution) -> str:
        action = resolution.action
        return f"{action.actor}:{action.move.value}>{action.target}"

    def _accrue_reward(self, resolution) -> dict:
        h_now = self._hp_vector()
        dh = tuple(h - p for h, p in zip(h_now, self._prev_h))
        d_hat = 0.0
        if resolution.kind == "action" and resolution.outcome is not None:
            d_hat = min(1.0, resolution.outcome.damage_dealt / self.spec.dmg_ref)
        snap = HpSnapshot(h_now, dh, self._prev_dh)  # type: ignore[arg-type]
        r_hp, _ = step_reward(snap, d_hat)
        rec = self.trace.append(self.runner.state.step_count, r_hp, d_hat)
        self._prev_h = h_now
        self._prev_dh = dh  # type: ignore[assignment]
        return rec.to_dict()

    # -- completion -------------------------------------------------------

    def _family_score(self, victory: bool) -> FamilyScore:
        spec, state = self.spec, self.runner.state
        if spec.family == FAMILY_EOW:
            return FamilyScore(
                family=spec.family,
                t_steps=float(state.step_count) if victory else math.inf,
                r_scaled=episode_reward(self.trace),
            )
        if spec.family == FAMILY_MOC:
            c_used = moc_cycles(state.av_clock)
            return FamilyScore(
                family=spec.family,
                c_used=c_used,
                c_max=spec.c_max,
                s_moc=moc_score(spec.c_max, c_used) if victory else 0,
            )
        if spec.family == FAMILY_PF:
            return FamilyScore(
                family=spec.family,
                s_pf=pf_score(state.score_events, spec.av_budget),
            )
        assert spec.family == FAMILY_AS
        enemies = [c for c in state.roster if c.side is Side.ENEMY]
        max_hp = sum(c.max_hp for c in enemies)
        depleted = 100.0 * (1.0 - sum(c.hp for c in enemies) / max_hp)
        av_rem = max(0.0, (spec.av_budget or 0.0) - state.av_clock)
        return FamilyScore(
            family=spec.family,
            hp_depleted_pct=depleted,
            av_rem=av_rem,
            s_as=as_score(depleted, av_rem, spec.as_weights or (30.0, 2.0)),
        )

    def _finalize(self, abort_reason: str | None = None) -> None:
        state = self.runner.state
        if abort_reason is not None:
            outcome = "aborted"
        else:
            outcome = self.runner.termination.value
        victory = outcome == Termination.VICTORY.value
        score = self._family_score(victory)
        ask_payload = None
        if self.ask_decision is not None:
            ask_payload = {
                "decision": self.ask_decision.to_dict(),
                "hint": self.hint.to_dict() if self.hint is not None else None,
            }
        self.result = EpisodeResult(
            task_id=self.spec.task_id,
            regime=self.regime,
            seed=self.seed,
            agent_id=self.agent_id,
            outcome=outcome,
            abort_reason=abort_reason,
            t_steps=float(state.step_count) if victory else math.inf,
            av_used=state.av_clock,
            score=score,
            reward_total=self.trace.total,
            r_scaled=episode_reward(self.trace),
            exchanges=self.exchange,
            final_digest=self.runner.digest(),
            log_path=str(self.log.path) if self.log.path else None,
            ask=ask_payload,
        )
        self.log.write({"type": "result", **self.result.to_dict()})
        self.log.close()

    def abort(self, reason: str) -> None:
        """Force-terminate the episode (transport failure, operator stop)."""
        if self.result is None:
            self._finalize(abort_reason=reason)

    def log_entry(self) -> DecisionLogEntry:
        """Summary entry for the decision log shown at later ask points."""
        assert self.result is not None
        return DecisionLogEntry(
            task_id=self.spec.task_id,
            k=self.episode_index,
            choice=self.ask_decision.choice if self.ask_decision else "act",
            question=self.ask_decision.question if self.ask_decision else None,
            hint=self.hint.text if self.hint else None,
            action_summary=",".join(self.action_summary[-40:]),
            result=self.result.score.to_dict(),
        )


def run_episode(
    spec: TaskSpec,
    agent,
    regime: str,
    seed: int,
    log_path: str | Path | None = None,
    oracle: HintOracle | None = None,
    decision_log: list[DecisionLogEntry] | None = None,
    episode_index: int = 1,
) -> EpisodeResult:
    """Run one episode to completion against an in-process or remote agent."""
    driver = EpisodeDriver(
        spec,
        regime,
        seed,
        agent_id=getattr(agent, "agent_id", "agent"),
        log_path=log_path,
        oracle=oracle,
        decision_log=decision_log,
        episode_index=episode_index,
    )
    if hasattr(agent, "reset"):
        agent.reset(spec.task_id, seed)
    while True:
        request = driver.current_request()
        if request is None:
            break
        try:
            response = agent.respond(request)
        except TransportError:
            driver.abort("transport")
            break
        driver.submit(response)
    assert driver.result is not None
    if decision_log is not None:
        decision_log.append(driver.log_entry())
    return driver.result
