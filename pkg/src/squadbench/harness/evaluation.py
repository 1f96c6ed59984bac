"""Multi-trial evaluation: run tasks x trials, aggregate per-task rows.

Each task runs a fixed number of trials with consecutive seeds.  In the
ask-enabled regime a per-task decision log accumulates across trials (in
trial order) and feeds both later ask points and the ask ledger the
diagnostics are computed from.
"""

from __future__ import annotations

import math
import statistics
from dataclasses import dataclass, field
from pathlib import Path

from squadbench.askoract import DecisionLogEntry, HintOracle
from squadbench.engine.tasks import TaskSpec
from squadbench.harness.episode import REGIME_TA_ASK, EpisodeResult, run_episode
from squadbench.metrics import AskLedger, AskMetrics, ask_metrics

TRIALS_DEFAULT = 8


def _mean_sd(values: list[float]) -> tuple[float | None, float | None]:
    if not values:
        return None, None
    mean = statistics.mean(values)
    sd = statistics.stdev(values) if len(values) > 1 else 0.0
    return mean, sd


@dataclass
class TaskRow:
    """Aggregates for one (task, regime, agent) cell."""

    task_id: int
    task_name: str
    family: str
    regime: str
    agent_id: str
    trials: int
    victories: int
    sr_pct: float
    steps_mean: float | None       # over victorious trials; None when no wins
    steps_sd: float | None
    r_scaled_mean: float
    r_scaled_sd: float
    family_score_mean: float | None
    family_score_sd: float | None
    results: list[EpisodeResult] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "task_id": self.task_id,
            "task_name": self.task_name,
            "family": self.family,
            "regime": self.regime,
            "agent_id": self.agent_id,
            "trials": self.trials,
            "victories": self.victories,
            "sr_pct": self.sr_pct,
            "steps_mean": self.steps_mean,
            "steps_sd": self.steps_sd,
            "r_scaled_mean": self.r_scaled_mean,
            "r_scaled_sd": self.r_scaled_sd,
            "family_score_mean": self.family_score_mean,
            "family_score_sd": self.family_score_sd,
        }


@dataclass
class EvaluationReport:
    agent_id: str
    regime: str
    trials: int
    seed_base: int
    rows: list[TaskRow]
    ask: AskMetrics | None = None

    def to_dict(self) -> dict:
        out = {
            "schema": 1,
            "agent_id": self.agent_id,
            "regime": self.regime,
            "trials": self.trials,
            "seed_base": self.seed_base,
            "rows": [r.to_dict() for r in self.rows],
        }
        if self.ask is not None:
            out["ask"] = {
                "ar_pct": self.ask.ar,
                "effect": self.ask.effect,
                "efficiency": self.ask.efficiency,
                "n": self.ask.n,
                "m": self.ask.m,
                "effect_defined": self.ask.effect_defined,
            }
        return out


def aggregate_task(results: list[EpisodeResult], spec: TaskSpec, regime: str, agent_id: str) -> TaskRow:
    victories = [r for r in results if r.victory]
    steps = [r.t_steps for r in victories]
    r_scaled = [r.r_scaled for r in results]
    family_vals: list[float] = []
    for r in results:
        score = r.score
        if spec.family == "eow":
            continue
        elif spec.family == "moc":
            family_vals.append(float(score.s_moc or 0))
        elif spec.family == "pf":
            family_vals.append(float(score.s_pf or 0.0))
        else:
            family_vals.append(float(score.s_as or 0.0))
    steps_mean, steps_sd = _mean_sd(steps)
    r_mean, r_sd = _mean_sd(r_scaled)
    f_mean, f_sd = _mean_sd(family_vals)
    return TaskRow(
        task_id=spec.task_id,
        task_name=spec.name,
        family=spec.family,
        regime=regime,
        agent_id=agent_id,
        trials=len(results),
        victories=len(victories),
        sr_pct=100.0 * len(victories) / len(results) if results else 0.0,
        steps_mean=steps_mean,
        steps_sd=steps_sd,
        r_scaled_mean=r_mean if r_mean is not None else 0.0,
        r_scaled_sd=r_sd if r_sd is not None else 0.0,
        family_score_mean=f_mean,
        family_score_sd=f_sd,
        results=results,
    )


def run_evaluation(
    specs: list[TaskSpec],
    agent,
    regime: str,
    trials: int = TRIALS_DEFAULT,
    seed_base: int = 0,
    log_dir: str | Path | None = None,
    oracle: HintOracle | None = None,
) -> EvaluationReport:
    """Run ``trials`` episodes per task and aggregate.

    Aborted episodes count as non-victories; they never raise.  With the
    ask regime, episodes within a task are ordered by trial index and an
    ask ledger is accumulated for the diagnostics.
    """
    agent_id = getattr(agent, "agent_id", "agent")
    if regime == REGIME_TA_ASK and oracle is None:
        oracle = HintOracle()
    ledger = AskLedger(opportunities=trials)
    rows: list[TaskRow] = []

    for spec in specs:
        decision_log: list[DecisionLogEntry] = []
        results: list[EpisodeResult] = []
        for k in range(1, trials + 1):
            seed = seed_base + k - 1
            log_path = None
            if log_dir is not None:
                log_path = (
                    Path(log_dir)
                    / f"task{spec.task_id:02d}_{regime}_{agent_id}_s{seed}.jsonl"
                )
            result = run_episode(
                spec,
                agent,
                regime,
                seed,
                log_path=log_path,
                oracle=oracle,
                decision_log=decision_log if regime == REGIME_TA_ASK else None,
                episode_index=k,
            )
            results.append(result)
            if regime == REGIME_TA_ASK:
                asked = bool(result.ask and result.ask["decision"]["choice"] == "ask")
                ledger.add(
                    spec.task_id,
                    k,
                    asked,
                    result.score.headline(step_budget=spec.step_budget),
                )
        rows.append(aggregate_task(results, spec, regime, agent_id))

    report = EvaluationReport(
        agent_id=agent_id,
        regime=regime,
        trials=trials,
        seed_base=seed_base,
        rows=rows,
        ask=ask_metrics(ledger) if regime == REGIME_TA_ASK else None,
    )
    return report
