from __future__ import annotations

import json
import math
import statistics

import pytest

from helpers import enemy_dict, make_spec
from squadbench.engine import load_task_spec
from squadbench.harness import (
    CallableAgent,
    EpisodeDriver,
    RandomPolicy,
    ScriptedPolicy,
    TransportError,
    replay_log,
    replay_records,
    run_episode,
    run_evaluation,
)
from squadbench.harness.report import emit_report, text_table
from squadbench.harness.steplog import read_log


def first_basic_agent():
    """Always plays the first basic-attack triple in the mask; holds offers."""

    def fn(request):
        if request.get("type") == "ask_point":
            return {"ask": {"choice": "act"}}
        mask = request.get("mask") or []
        holds = [m for m in mask if m[1] == 3]
        if holds:
            return {"ta": holds[0]}
        basics = [m for m in mask if m[1] == 0]
        return {"ta": basics[0] if basics else mask[0]}

    return CallableAgent(fn, agent_id="first_basic")


def quick_spec():
    return make_spec(waves=[[enemy_dict(max_hp=600.0, damage=40.0, toughness_max=20.0)]],
                     step_budget=60)


# -- episode basics -------------------------------------------------------------

def test_scripted_legal_agent_never_aborts():
    result = run_episode(quick_spec(), first_basic_agent(), "ta", seed=1)
    assert result.outcome in ("victory", "budget_exhausted")
    assert result.abort_reason is None


def test_victory_sets_finite_steps():
    result = run_episode(quick_spec(), first_basic_agent(), "ta", seed=1)
    assert result.outcome == "victory"
    assert math.isfinite(result.t_steps)
    assert result.t_steps > 0


def test_episode_determinism_and_replay(tmp_path):
    spec = load_task_spec(1)
    paths = [tmp_path / "a.jsonl", tmp_path / "b.jsonl"]
    results = [
        run_episode(spec, RandomPolicy(seed=5), "ta", seed=9, log_path=p) for p in paths
    ]
    assert results[0].to_dict() == results[1].to_dict()
    assert paths[0].read_bytes() == paths[1].read_bytes()
    assert replay_log(paths[0]) == results[0].final_digest


def test_dc_malformed_outputs_abort_at_ten(tmp_path):
    agent = CallableAgent(lambda req: {"nonsense": True}, agent_id="garbage")
    result = run_episode(load_task_spec(1), agent, "dc", seed=1,
                         log_path=tmp_path / "dc.jsonl")
    assert result.outcome == "aborted"
    assert result.abort_reason == "dc_localization"
    assert result.exchanges == 10
    assert math.isinf(result.t_steps)


def test_ta_zero_sp_skill_triples_abort_at_ten():
    spec = make_spec(sp_initial=0)
    skill_spammer = CallableAgent(
        lambda req: {"ta": [req["decision"]["slot"], 1, 4]}, agent_id="sp_spam"
    )
    result = run_episode(spec, skill_spammer, "ta", seed=1)
    assert result.outcome == "aborted"
    assert result.abort_reason == "ta_invalid_tuples"
    assert result.exchanges == 10


def test_nine_rejections_then_legal_does_not_abort():
    spec = make_spec(sp_initial=0)
    state = {"n": 0}

    def fn(request):
        state["n"] += 1
        slot = request["decision"]["slot"]
        if state["n"] <= 9:
            return {"ta": [slot, 1, 4]}  # illegal: no points
        mask = request["mask"]
        basics = [m for m in mask if m[1] == 0]
        holds = [m for m in mask if m[1] == 3]
        return {"ta": (holds or basics or mask)[0]}

    result = run_episode(spec, CallableAgent(fn, agent_id="nine"), "ta", seed=1)
    assert result.abort_reason != "ta_invalid_tuples"


def test_transport_failure_aborts():
    def fn(request):
        raise TransportError("boom")

    result = run_episode(quick_spec(), CallableAgent(fn, agent_id="dead"), "ta", seed=1)
    assert result.outcome == "aborted"
    assert result.abort_reason == "transport"


def test_timeout_none_responses_consume_step_budget():
    spec = make_spec(waves=[[enemy_dict(max_hp=1e9, damage=0.0)]], step_budget=5)
    agent = CallableAgent(lambda req: None, agent_id="sleeper")
    result = run_episode(spec, agent, "ta", seed=1)
    assert result.outcome == "budget_exhausted"
    assert result.exchanges == 6  # budget 5 exceeded on the 6th no-op


# -- log structure ----------------------------------------------------------------

def test_step_log_structure(tmp_path):
    path = tmp_path / "ep.jsonl"
    run_episode(quick_spec(), first_basic_agent(), "ta", seed=2, log_path=path)
    records = read_log(path)
    assert records[0]["type"] == "header"
    assert records[0]["input_delay_s"] == 0.5
    assert records[-1]["type"] == "result"
    steps = [r for r in records if r["type"] == "step"]
    assert steps
    for rec in steps:
        assert {"exchange", "observation_digest", "agent_output",
                "resolution", "state_digest"} <= rec.keys()
        if rec["resolution"]["kind"] == "action":
            assert rec["reward"] is not None
            r = rec["reward"]
            assert r["r_t"] == pytest.approx(0.5 * r["r_hp"] + 0.5 * r["r_dmg"], abs=1e-12)


def test_crash_prefix_replays(tmp_path):
    path = tmp_path / "ep.jsonl"
    run_episode(load_task_spec(1), RandomPolicy(seed=3), "ta", seed=4, log_path=path)
    records = read_log(path)
    steps = [r for r in records if r["type"] == "step"]
    # simulate a crash: keep header + first half of the steps, no result
    cut = [records[0]] + steps[: len(steps) // 2]
    digest = replay_records(cut, load_task_spec(1))
    assert digest  # reconstructs without error up to the crash point


# -- ask wiring -------------------------------------------------------------------

class AskOnFirst:
    agent_id = "ask_on_first"

    def __init__(self):
        self.seen_logs = []
        self.hints_seen = []

    def reset(self, task_id, seed):
        pass

    def respond(self, request):
        if request["type"] == "ask_point":
            self.seen_logs.append(len(request["decision_log"]))
            if request["episode"]["episode_index"] == 1:
                return {"ask": {"choice": "ask", "question": "what is the boss weakness?"}}
            return {"ask": {"choice": "act"}}
        if "hint" in request:
            self.hints_seen.append(request["episode"]["episode_index"])
        mask = request["mask"]
        holds = [m for m in mask if m[1] == 3]
        basics = [m for m in mask if m[1] == 0]
        return {"ta": (holds or basics or mask)[0]}


def test_ask_regime_hint_scoping_and_decision_log():
    agent = AskOnFirst()
    report = run_evaluation([quick_spec()], agent, "ta_ask", trials=3, seed_base=0)
    # the decision log grows by one entry per completed episode
    assert agent.seen_logs == [0, 1, 2]
    # only episode 1 carried a hint, on every one of its decision steps
    assert set(agent.hints_seen) == {1}
    assert report.ask is not None
    assert report.ask.n == 3
    assert report.ask.ar == pytest.approx(100.0 / 3.0)


def test_ask_metrics_effect_from_ledger():
    class AskSecond:
        agent_id = "ask_second"

        def respond(self, request):
            if request["type"] == "ask_point":
                if request["episode"]["episode_index"] == 2:
                    return {"ask": {"choice": "ask", "question": "weakness?"}}
                return {"ask": {"choice": "act"}}
            mask = request["mask"]
            holds = [m for m in mask if m[1] == 3]
            basics = [m for m in mask if m[1] == 0]
            return {"ta": (holds or basics or mask)[0]}

    spec = quick_spec()
    report = run_evaluation([spec], AskSecond(), "ta_ask", trials=2, seed_base=0)
    results = report.rows[0].results
    s = [r.score.headline(step_budget=spec.step_budget) for r in results]
    assert report.ask.m == 1
    assert report.ask.effect == pytest.approx(s[1] - s[0])


# -- evaluation aggregation ---------------------------------------------------------

def test_evaluation_aggregates_recompute():
    spec = load_task_spec(1)
    report = run_evaluation([spec], RandomPolicy(seed=1), "ta", trials=5, seed_base=3)
    row = report.rows[0]
    raw = row.results
    assert row.trials == 5
    assert row.victories == sum(r.victory for r in raw)
    assert row.sr_pct == pytest.approx(100.0 * row.victories / 5)
    assert row.r_scaled_mean == pytest.approx(statistics.mean(r.r_scaled for r in raw))
    wins = [r.t_steps for r in raw if r.victory]
    if wins:
        assert row.steps_mean == pytest.approx(statistics.mean(wins))
        if len(wins) > 1:
            assert row.steps_sd == pytest.approx(statistics.stdev(wins))


def test_aborted_episode_counts_as_non_victory():
    spec = make_spec(sp_initial=0)
    skill_spammer = CallableAgent(
        lambda req: {"ta": [req["decision"]["slot"], 1, 4]}
        if req.get("type") == "decision" else {"ask": {"choice": "act"}},
        agent_id="sp_spam",
    )
    report = run_evaluation([spec], skill_spammer, "ta", trials=2, seed_base=0)
    assert report.rows[0].victories == 0
    assert report.rows[0].sr_pct == 0.0


# -- report emission ----------------------------------------------------------------

def test_report_files_and_figures(tmp_path):
    report = run_evaluation(
        [quick_spec()], first_basic_agent(), "ta", trials=2, seed_base=0
    )
    paths = emit_report([report], tmp_path)
    assert paths["csv"].exists()
    rows = paths["csv"].read_text().strip().splitlines()
    assert len(rows) == 2  # header + one task row
    assert paths["jsonl"].exists()
    parsed = json.loads(paths["jsonl"].read_text())
    assert parsed["rows"][0]["trials"] == 2
    table = text_table(report)
    assert "SR%" in table and "test_task" in table
    for fig in paths["figures"]:
        assert fig.exists()
        assert fig.read_bytes()[:8] == b"\x89PNG\r\n\x1a\n"


def test_steps_reported_infinite_marker_when_no_wins():
    spec = make_spec(waves=[[enemy_dict(max_hp=1e9, damage=500.0, speed=160.0)]])
    report = run_evaluation([spec], RandomPolicy(seed=0), "ta", trials=2, seed_base=0)
    assert report.rows[0].victories == 0
    assert "inf" in text_table(report)
