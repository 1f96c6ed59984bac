"""Acceptance suite: one test per release criterion, each printing a
PASS/FAIL line (run with ``pytest tests/test_acceptance.py -s`` to see
them all).  Tolerances are pinned here, not configurable.
"""

from __future__ import annotations

import copy
import itertools
import math

import pytest

from helpers import enemy_dict, make_spec
from oracles import cycles_by_stepping, literal_step_reward
from squadbench.askoract import HintOracle, screened
from squadbench.engine import load_task_spec, state_digest
from squadbench.engine.battle import legal_actions
from squadbench.harness import (
    CallableAgent,
    RandomPolicy,
    AutoBattlePolicy,
    run_episode,
    run_evaluation,
    replay_log,
)
from squadbench.harness.runner import BattleRunner
from squadbench.interface import DcSession, canonical_clicks, decode_ta, encode_ta
from squadbench.metrics import HpSnapshot, efficiency, moc_cycles, pf_score, round_half_up, step_reward
from squadbench.observation.render import render_frame
from squadbench.rng import Stream


def verdict(name: str, ok: bool, detail: str = "") -> None:
    marker = "PASS" if ok else "FAIL"
    suffix = f"  ({detail})" if detail else ""
    print(f"{marker}: {name}{suffix}")
    assert ok, f"{name}{suffix}"


# -- 1. ask-efficiency formula ---------------------------------------------------

REFERENCE_EFFICIENCY_ROWS = [
    # (ask rate %, effect, expected efficiency at T=8)
    (52.5, 82.8, 19.7),
    (22.5, 49.4, 27.4),
    (97.5, 47.4, 6.1),
    (62.5, 17.0, 3.4),
    (100.0, 16.0, 2.0),
    (100.0, 0.0, 0.0),
    (100.0, 10800.0, 1350.0),
    (100.0, 6400.0, 800.0),
    (100.0, 2000.0, 250.0),
    (100.0, 3002.0, 375.3),
    (100.0, 2817.0, 352.1),
    (100.0, 380.0, 47.5),
]


def test_efficiency_reference_rows():
    # tolerance is the stated 0.05 plus one ulp-scale epsilon so a diff of
    # exactly 0.05 is not rejected by binary representation error
    tol = 0.05 + 1e-9
    worst = 0.0
    for ar, effect, expected in REFERENCE_EFFICIENCY_ROWS:
        got = efficiency(ar, effect, opportunities=8)
        worst = max(worst, abs(got - expected))
        assert abs(got - expected) <= tol, (ar, effect, got)
        assert round_half_up(got, 1) == expected, (ar, effect, got)
    verdict("efficiency formula reproduces all 12 reference rows within 0.05",
            worst <= tol, f"max abs err {worst:.4f}")


# -- 2. cycle counting vs stepping oracle ------------------------------------------

def test_moc_cycles_matches_oracle_exactly():
    mismatches = [
        av for av in range(0, 2001) if moc_cycles(float(av)) != cycles_by_stepping(float(av))
    ]
    verdict("cycle counter matches the boundary-stepping oracle on [0, 2000]",
            not mismatches, f"{2001 - len(mismatches)}/2001 exact")


# -- 3. step reward vs literal evaluator -------------------------------------------

def test_step_reward_full_pattern_grid():
    h_values = (0.1, 0.5, 1.0)
    d_values = (-0.2, 0.0, 0.2)
    patterns4 = lambda vals: list(itertools.product(vals, repeat=4))
    h_grid = patterns4(h_values)
    d_grid = patterns4(d_values)
    worst = 0.0
    count = 0
    for h in h_grid:
        for dh in d_grid:
            for dhp in d_grid:
                got_hp, got_t = step_reward(HpSnapshot(h, dh, dhp), 0.3)
                want_hp, want_t = literal_step_reward(h, dh, dhp, 0.3)
                err = max(abs(got_hp - want_hp), abs(got_t - want_t))
                if err > worst:
                    worst = err
                count += 1
    verdict(
        "step reward matches the literal evaluator on the full pattern grid",
        worst <= 1e-12,
        f"{count} points, max abs err {worst:.2e}",
    )


# -- 4. determinism and replay ------------------------------------------------------

def test_determinism_and_replay_all_tasks(tmp_path):
    episodes_per_task = 50
    checked = 0
    for task_id in range(1, 9):
        spec = load_task_spec(task_id)
        for seed in range(episodes_per_task):
            pa = tmp_path / f"t{task_id}_s{seed}_a.jsonl"
            pb = tmp_path / f"t{task_id}_s{seed}_b.jsonl"
            ra = run_episode(spec, RandomPolicy(seed=17), "ta", seed=seed, log_path=pa)
            rb = run_episode(spec, RandomPolicy(seed=17), "ta", seed=seed, log_path=pb)
            assert pa.read_bytes() == pb.read_bytes(), (task_id, seed)
            assert ra.to_dict() == rb.to_dict(), (task_id, seed)
            assert replay_log(pa) == ra.final_digest, (task_id, seed)
            checked += 1
    verdict(
        "replayed episodes are byte-identical and logs reconstruct final digests",
        checked == 8 * episodes_per_task,
        f"{checked} episodes x2 runs, all replays matched",
    )


# -- 5. regime failure rules ---------------------------------------------------------

def test_failure_rules_fire_at_exactly_ten():
    spec = load_task_spec(1)

    empty_agent = CallableAgent(lambda req: {}, agent_id="empty")
    dc_result = run_episode(spec, empty_agent, "dc", seed=1)
    ok_a = (
        dc_result.outcome == "aborted"
        and dc_result.abort_reason == "dc_localization"
        and dc_result.exchanges == 10
    )

    zero_sp = make_spec(sp_initial=0)
    spammer = CallableAgent(
        lambda req: {"ta": [req["decision"]["slot"], 1, 4]}, agent_id="spam"
    )
    ta_result = run_episode(zero_sp, spammer, "ta", seed=1)
    ok_b = (
        ta_result.outcome == "aborted"
        and ta_result.abort_reason == "ta_invalid_tuples"
        and ta_result.exchanges == 10
    )

    # nine-rejection variants recover
    state = {"n": 0}

    def nine_then_legal_dc(req):
        state["n"] += 1
        if state["n"] <= 9:
            return {}
        return {"dc": {"kind": "keypress", "key": "cancel"}}  # clears, neutral

    recover = run_episode(spec, CallableAgent(nine_then_legal_dc, agent_id="nine"),
                          "dc", seed=1)
    # 9 no-ops then a neutral clear; budget eventually ends it, no abort at 10
    ok_c = not (recover.abort_reason == "dc_localization" and recover.exchanges == 10)

    state2 = {"n": 0}

    def nine_then_basic(req):
        state2["n"] += 1
        slot = req["decision"]["slot"]
        if state2["n"] <= 9:
            return {"ta": [slot, 1, 4]}
        mask = req["mask"]
        return {"ta": ([m for m in mask if m[1] == 0] or [m for m in mask if m[1] == 3] or mask)[0]}

    recover_ta = run_episode(zero_sp, CallableAgent(nine_then_basic, agent_id="nine_ta"),
                             "ta", seed=1)
    ok_d = recover_ta.abort_reason != "ta_invalid_tuples"

    verdict("10 empty pointing outputs abort at exactly the 10th", ok_a,
            f"exchanges={dc_result.exchanges}")
    verdict("10 zero-point skill triples abort at exactly the 10th", ok_b,
            f"exchanges={ta_result.exchanges}")
    verdict("nine-rejection variants do not abort", ok_c and ok_d)


# -- 6. regime equivalence -------------------------------------------------------------

def test_regime_equivalence_on_200_states():
    states_checked = 0
    actions_checked = 0
    walk = Stream("acceptance.walk", 99)
    task_cycle = itertools.cycle([1, 6, 7, 8])
    seed = 0
    while states_checked < 200:
        task_id = next(task_cycle)
        seed += 1
        runner = BattleRunner(load_task_spec(task_id), seed)
        decision = runner.advance_to_decision()
        hop = 0
        while decision is not None and states_checked < 200 and hop < 8:
            state = runner.state
            for action in legal_actions(state, decision.actor_id):
                ta_clone = copy.deepcopy(runner)
                dc_clone = copy.deepcopy(runner)
                triple = encode_ta(state, action)
                ta_clone.apply_decision(decode_ta(ta_clone.state, decision, triple))

                frame = render_frame(dc_clone.state)
                session = DcSession()
                last = None
                for prim in canonical_clicks(dc_clone.state, frame, action):
                    last = session.submit(dc_clone.state, decision, frame, prim,
                                          dc_clone.apply_decision)
                assert last is not None and last.kind == "action", (task_id, action)
                assert state_digest(ta_clone.state) == state_digest(dc_clone.state), (
                    task_id, seed, action,
                )
                actions_checked += 1
            states_checked += 1
            hop += 1
            mask = legal_actions(state, decision.actor_id)
            runner.apply_decision(mask[walk.randint(0, len(mask) - 1)])
            decision = runner.advance_to_decision()
    verdict(
        "triple and canonical click sequences give identical successor digests",
        True,
        f"{states_checked} states, {actions_checked} actions",
    )


# -- 7. baseline ordering ----------------------------------------------------------------

def test_baseline_ordering_on_canonical_task():
    spec = load_task_spec(1)
    seeds = 100
    random_report = run_evaluation([spec], RandomPolicy(seed=0), "ta",
                                   trials=seeds, seed_base=0)
    auto_report = run_evaluation([spec], AutoBattlePolicy(), "ta",
                                 trials=seeds, seed_base=0)
    r_row = random_report.rows[0]
    a_row = auto_report.rows[0]
    ok_sr = a_row.sr_pct > r_row.sr_pct
    ok_reward = a_row.r_scaled_mean > r_row.r_scaled_mean
    ok_band = 0.0 <= r_row.sr_pct <= 40.0
    verdict(
        "rule-based baseline beats random on SR and scaled reward; random lands in [0, 40]%",
        ok_sr and ok_reward and ok_band,
        f"auto SR={a_row.sr_pct:.1f}% R={a_row.r_scaled_mean:.1f} | "
        f"random SR={r_row.sr_pct:.1f}% R={r_row.r_scaled_mean:.1f}",
    )


# -- 8. ask protocol properties ---------------------------------------------------------

class RandomAsker:
    """Seeded agent that randomizes ask/act, questions, and battle play."""

    QUESTIONS = [
        "what is the boss weakness?",
        "how should I spend skill points?",
        "when should ultimates be released?",
        "which enemy should be focused first?",
        "how do I avoid losing allies?",
    ]

    def __init__(self, seed: int):
        self.agent_id = f"random_asker_{seed}"
        self._stream = Stream("acceptance.asker", seed)
        self.requests_seen: list[dict] = []

    def respond(self, request):
        self.requests_seen.append(request)
        if request["type"] == "ask_point":
            if self._stream.uniform() < 0.6:
                q = self.QUESTIONS[self._stream.randint(0, len(self.QUESTIONS) - 1)]
                return {"ask": {"choice": "ask", "question": q}}
            return {"ask": {"choice": "act"}}
        mask = request["mask"]
        return {"ta": mask[self._stream.randint(0, len(mask) - 1)]}


def test_ask_protocol_properties(tmp_path):
    spec = make_spec(waves=[[enemy_dict(max_hp=900.0, damage=80.0)]], step_budget=40)
    oracle = HintOracle()
    digest_before = oracle.digest()

    episodes = 100
    caps_ok = scoping_ok = screen_ok = True
    asked_count = 0
    for seed in range(episodes):
        agent = RandomAsker(seed)
        result = run_episode(spec, agent, "ta_ask", seed=seed, oracle=oracle,
                             episode_index=1)
        ask_requests = [r for r in agent.requests_seen if r["type"] == "ask_point"]
        decision_requests = [r for r in agent.requests_seen if r["type"] == "decision"]
        caps_ok &= len(ask_requests) == 1
        asked = bool(result.ask and result.ask["decision"]["choice"] == "ask")
        if asked:
            asked_count += 1
            hint_text = result.ask["hint"]["text"]
            scoping_ok &= all(r.get("hint") == hint_text for r in decision_requests)
            screen_ok &= not screened(hint_text)
        else:
            scoping_ok &= all("hint" not in r for r in decision_requests)
    digest_ok = oracle.digest() == digest_before

    verdict("one ask point per episode, at most one accepted ask", caps_ok)
    verdict("hints persist across exactly the asked episode's decisions", scoping_ok,
            f"{asked_count}/{episodes} episodes asked")
    verdict("corpus digest unchanged across the evaluation", digest_ok)
    verdict("every returned hint passes the lexical screens", screen_ok)


# -- 9. elimination-score budget ----------------------------------------------------------

def test_pf_budget_indicator_and_order_invariance():
    stream = Stream("acceptance.pf", 5)
    ok = True
    for _ in range(200):
        n = stream.randint(0, 25)
        events = [
            (stream.uniform() * 900.0, float(stream.randint(100, 900)))
            for _ in range(n)
        ]
        base = pf_score(events)
        shuffled = sorted(events, key=lambda e: e[1])
        ok &= abs(pf_score(shuffled) - base) < 1e-9
        manual = sum(pts for av, pts in events if av <= 450.0)
        ok &= abs(base - manual) < 1e-9
    boundary = pf_score([(450.0, 7.0), (450.0000001, 5.0)])
    ok &= boundary == 7.0
    verdict("elimination score is order-invariant with an exact budget cut at 450",
            ok)
