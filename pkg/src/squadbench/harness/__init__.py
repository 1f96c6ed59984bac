"""Evaluation harness: episodes, baselines, trials, service, CLI."""

from squadbench.harness.agents import (
    CallableAgent,
    HttpAgent,
    SubprocessAgent,
    TransportError,
)
from squadbench.harness.episode import (
    REGIME_DC,
    REGIME_TA,
    REGIME_TA_ASK,
    REGIME_TA_NO_OCR,
    REGIMES,
    EpisodeDriver,
    EpisodeResult,
    run_episode,
)
from squadbench.harness.evaluation import EvaluationReport, TaskRow, run_evaluation
from squadbench.harness.policies import AutoBattlePolicy, RandomPolicy, ScriptedPolicy
from squadbench.harness.runner import BattleRunner
from squadbench.harness.service import EpisodeHost, serve
from squadbench.harness.steplog import ReplayMismatch, replay_log, replay_records

__all__ = [
    "AutoBattlePolicy",
    "BattleRunner",
    "CallableAgent",
    "EpisodeDriver",
    "EpisodeHost",
    "EpisodeResult",
    "EvaluationReport",
    "HttpAgent",
    "RandomPolicy",
    "REGIME_DC",
    "REGIME_TA",
    "REGIME_TA_ASK",
    "REGIME_TA_NO_OCR",
    "REGIMES",
    "ReplayMismatch",
    "ScriptedPolicy",
    "SubprocessAgent",
    "TaskRow",
    "TransportError",
    "replay_log",
    "replay_records",
    "run_episode",
    "run_evaluation",
    "serve",
]
