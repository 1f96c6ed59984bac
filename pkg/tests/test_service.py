from __future__ import annotations

import json
import threading
import urllib.error
import urllib.request

import pytest

from squadbench.engine import load_task_spec
from squadbench.harness import EpisodeDriver
from squadbench.harness.policies import AutoBattlePolicy
from squadbench.harness.service import serve


@pytest.fixture(scope="module")
def server():
    srv = serve(address="127.0.0.1", port=0)  # ephemeral port
    thread = threading.Thread(target=srv.serve_forever, daemon=True)
    thread.start()
    yield srv
    srv.shutdown()


def api(server, method, path, body=None, raw=False):
    port = server.server_address[1]
    req = urllib.request.Request(
        f"http://127.0.0.1:{port}{path}",
        method=method,
        data=json.dumps(body).encode() if body is not None else None,
        headers={"Content-Type": "application/json"},
    )
    with urllib.request.urlopen(req) as resp:
        data = resp.read()
        return data if raw else json.loads(data)


def api_status(server, method, path, body=None) -> int:
    try:
        api(server, method, path, body)
        return 200
    except urllib.error.HTTPError as exc:
        return exc.code


def test_task_listing(server):
    tasks = api(server, "GET", "/api/tasks")["tasks"]
    assert len(tasks) == 8
    assert {t["family"] for t in tasks} == {"eow", "moc", "pf", "as"}


def test_full_episode_round_trip(server):
    created = api(server, "POST", "/api/episodes",
                  {"task_id": 1, "regime": "ta", "seed": 5})
    eid, ctl = created["episode_id"], created["controller"]
    agent = AutoBattlePolicy(load_task_spec(1))
    for _ in range(500):
        obs = api(server, "GET", f"/api/episodes/{eid}/observation")
        if obs["status"] == "done":
            break
        api(server, "POST", f"/api/episodes/{eid}/action",
            {"controller": ctl, "response": agent.respond(obs["request"])})
    result = api(server, "GET", f"/api/episodes/{eid}/result")
    assert result["outcome"] == "victory"
    # the finished episode rejects further actions
    assert api_status(server, "POST", f"/api/episodes/{eid}/action",
                      {"controller": ctl, "response": {"ta": [0, 0, 4]}}) == 409


def test_controller_conflict(server):
    created = api(server, "POST", "/api/episodes",
                  {"task_id": 1, "regime": "ta", "seed": 1, "controller": "alice"})
    eid = created["episode_id"]
    status = api_status(server, "POST", f"/api/episodes/{eid}/action",
                        {"controller": "mallory", "response": {"ta": [0, 0, 4]}})
    assert status == 409


def test_frame_png_endpoint(server):
    created = api(server, "POST", "/api/episodes",
                  {"task_id": 1, "regime": "dc", "seed": 2})
    eid = created["episode_id"]
    data = api(server, "GET", f"/api/episodes/{eid}/frame.png", raw=True)
    assert data[:8] == b"\x89PNG\r\n\x1a\n"


def test_ask_point_flow(server):
    created = api(server, "POST", "/api/episodes",
                  {"task_id": 1, "regime": "ta_ask", "seed": 3})
    eid, ctl = created["episode_id"], created["controller"]
    obs = api(server, "GET", f"/api/episodes/{eid}/observation")
    assert obs["status"] == "ask_point"
    assert obs["request"]["type"] == "ask_point"
    # acting before resolving the ask point is a conflict
    assert api_status(server, "POST", f"/api/episodes/{eid}/action",
                      {"controller": ctl, "response": {"ta": [0, 0, 4]}}) == 409
    out = api(server, "POST", f"/api/episodes/{eid}/ask",
              {"controller": ctl,
               "response": {"ask": {"choice": "ask", "question": "boss weakness?"}}})
    assert out["record"]["decision"]["choice"] == "ask"
    assert out["record"]["hint"]["text"]
    obs = api(server, "GET", f"/api/episodes/{eid}/observation")
    assert obs["status"] == "running"
    assert obs["request"]["hint"] == out["record"]["hint"]["text"]


def test_bad_inputs(server):
    assert api_status(server, "POST", "/api/episodes",
                      {"task_id": 99, "regime": "ta", "seed": 0}) == 400
    assert api_status(server, "POST", "/api/episodes",
                      {"task_id": 1, "regime": "warp", "seed": 0}) == 400
    assert api_status(server, "GET", "/api/episodes/ep-999/observation") == 404


def test_log_endpoint_serves_jsonl(server):
    created = api(server, "POST", "/api/episodes",
                  {"task_id": 1, "regime": "ta", "seed": 7})
    eid, ctl = created["episode_id"], created["controller"]
    obs = api(server, "GET", f"/api/episodes/{eid}/observation")
    api(server, "POST", f"/api/episodes/{eid}/action",
        {"controller": ctl, "response": {"ta": obs["request"]["mask"][0]}})
    text = api(server, "GET", f"/api/episodes/{eid}/log", raw=True).decode()
    lines = [json.loads(l) for l in text.strip().splitlines()]
    assert lines[0]["type"] == "header"
    assert any(l["type"] == "step" for l in lines)


def test_service_episode_matches_direct_driver(server):
    """Driving the same responses through HTTP and directly through a
    driver yields identical step logs."""
    created = api(server, "POST", "/api/episodes",
                  {"task_id": 1, "regime": "ta", "seed": 11, "agent_id": "probe"})
    eid, ctl = created["episode_id"], created["controller"]
    agent = AutoBattlePolicy(load_task_spec(1))
    responses = []
    for _ in range(40):
        obs = api(server, "GET", f"/api/episodes/{eid}/observation")
        if obs["status"] == "done":
            break
        response = agent.respond(obs["request"])
        responses.append(response)
        api(server, "POST", f"/api/episodes/{eid}/action",
            {"controller": ctl, "response": response})
        if len(responses) >= 15:
            break
    service_log = api(server, "GET", f"/api/episodes/{eid}/log", raw=True).decode()

    driver = EpisodeDriver(load_task_spec(1), "ta", 11, agent_id="probe")
    for response in responses:
        assert driver.current_request() is not None
        driver.submit(response)
    direct_log = driver.log.text()
    assert direct_log.strip() == service_log.strip()
