"""HTTP service: episode hosting for remote controllers and the web UI.

The service owns episode drivers and exposes a pull-style protocol:
create an episode, fetch the pending request envelope, post a response,
repeat.  All battle logic stays server-side; a browser or script client
only relays observations and inputs, so UI-driven and direct-client
episodes produce identical step logs.

One controller token is bound to each episode at creation; posts carrying
any other token are rejected, and posts to a finished episode get a
terminal-state error.  Episodes are isolated: each has its own lock, so
many can run concurrently while each decision loop stays sequential.
"""

from __future__ import annotations

import json
import mimetypes
import threading
import uuid
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from pathlib import Path

from squadbench.engine.tasks import ConfigError, load_all_tasks, load_task_spec
from squadbench.harness.episode import REGIMES, EpisodeDriver
from squadbench.observation.render import png_bytes, render_frame


class ServiceError(Exception):
    def __init__(self, status: int, code: str, message: str = ""):
        super().__init__(message or code)
        self.status = status
        self.code = code


class HostedEpisode:
    def __init__(self, episode_id: str, driver: EpisodeDriver, controller: str):
        self.episode_id = episode_id
        self.driver = driver
        self.controller = controller
        self.lock = threading.Lock()

    def status(self) -> str:
        if self.driver.result is not None:
            return "done"
        if self.driver._phase == "ask":
            return "ask_point"
        return "running"


class EpisodeHost:
    """Registry and lifecycle for service-hosted episodes."""

    def __init__(self, log_dir: str | Path | None = None):
        self.log_dir = Path(log_dir) if log_dir else None
        self._episodes: dict[str, HostedEpisode] = {}
        self._registry_lock = threading.Lock()
        self._counter = 0

    def create(self, payload: dict) -> dict:
        task_id = payload.get("task_id")
        regime = payload.get("regime")
        seed = payload.get("seed", 0)
        if regime not in REGIMES:
            raise ServiceError(400, "bad_regime", f"regime must be one of {REGIMES}")
        if not isinstance(seed, int):
            raise ServiceError(400, "bad_seed", "seed must be an integer")
        try:
            spec = load_task_spec(int(task_id))
        except (ConfigError, TypeError, ValueError) as exc:
            raise ServiceError(400, "bad_task", str(exc)) from exc

        controller = payload.get("controller") or uuid.uuid4().hex
        agent_id = payload.get("agent_id", "remote")
        with self._registry_lock:
            self._counter += 1
            episode_id = f"ep-{self._counter}"
        log_path = None
        if self.log_dir is not None:
            log_path = self.log_dir / f"{episode_id}.jsonl"
        driver = EpisodeDriver(
            spec,
            regime,
            seed,
            agent_id=agent_id,
            log_path=log_path,
            episode_index=int(payload.get("episode_index", 1)),
        )
        hosted = HostedEpisode(episode_id, driver, controller)
        with self._registry_lock:
            self._episodes[episode_id] = hosted
        return {
            "episode_id": episode_id,
            "controller": controller,
            "status": hosted.status(),
            "task_id": spec.task_id,
            "regime": regime,
            "seed": seed,
        }

    def get(self, episode_id: str) -> HostedEpisode:
        with self._registry_lock:
            hosted = self._episodes.get(episode_id)
        if hosted is None:
            raise ServiceError(404, "no_such_episode")
        return hosted

    def observation(self, episode_id: str) -> dict:
        hosted = self.get(episode_id)
        with hosted.lock:
            request = hosted.driver.current_request()
            out = {"status": hosted.status(), "request": request}
            if hosted.driver.result is not None:
                out["result"] = hosted.driver.result.to_dict()
            return out

    def frame_png(self, episode_id: str) -> bytes:
        hosted = self.get(episode_id)
        with hosted.lock:
            frame = render_frame(hosted.driver.runner.state)
            return png_bytes(frame.image)

    def act(self, episode_id: str, payload: dict) -> dict:
        hosted = self.get(episode_id)
        controller = payload.get("controller")
        if controller != hosted.controller:
            raise ServiceError(409, "controller_conflict")
        with hosted.lock:
            if hosted.driver.result is not None:
                raise ServiceError(409, "episode_finished")
            if hosted.driver._phase == "ask":
                raise ServiceError(409, "ask_point_pending")
            record = hosted.driver.submit(payload.get("response"))
            out = {"status": hosted.status(), "record": record}
            if hosted.driver.result is not None:
                out["result"] = hosted.driver.result.to_dict()
            return out

    def ask(self, episode_id: str, payload: dict) -> dict:
        hosted = self.get(episode_id)
        if payload.get("controller") != hosted.controller:
            raise ServiceError(409, "controller_conflict")
        with hosted.lock:
            if hosted.driver.result is not None:
                raise ServiceError(409, "episode_finished")
            if hosted.driver._phase != "ask":
                raise ServiceError(409, "not_at_ask_point")
            record = hosted.driver.submit(payload.get("response"))
            return {"status": hosted.status(), "record": record}

    def result(self, episode_id: str) -> dict:
        hosted = self.get(episode_id)
        with hosted.lock:
            if hosted.driver.result is None:
                raise ServiceError(409, "episode_ongoing")
            return hosted.driver.result.to_dict()

    def log_text(self, episode_id: str) -> str:
        hosted = self.get(episode_id)
        with hosted.lock:
            return hosted.driver.log.text()


def make_handler(host: EpisodeHost, ui_dir: Path | None):
    class Handler(BaseHTTPRequestHandler):
        protocol_version = "HTTP/1.1"

        def log_message(self, fmt, *args):  # quiet by default
            pass

        # -- plumbing ----------------------------------------------------

        def _send(self, status: int, body: bytes, content_type: str) -> None:
            self.send_response(status)
            self.send_header("Content-Type", content_type)
            self.send_header("Content-Length", str(len(body)))
            self.send_header("Access-Control-Allow-Origin", "*")
            self.send_header("Access-Control-Allow-Headers", "Content-Type")
            self.send_header("Access-Control-Allow-Methods", "GET, POST, OPTIONS")
            self.end_headers()
            self.wfile.write(body)

        def _json(self, payload: dict, status: int = 200) -> None:
            self._send(status, json.dumps(payload).encode("utf-8"), "application/json")

        def _error(self, exc: ServiceError) -> None:
            self._json({"error": exc.code, "message": str(exc)}, status=exc.status)

        def _body(self) -> dict:
            length = int(self.headers.get("Content-Length") or 0)
            if length == 0:
                return {}
            try:
                return json.loads(self.rfile.read(length).decode("utf-8"))
            except json.JSONDecodeError:
                raise ServiceError(400, "bad_json") from None

        # -- routes -------------------------------------------------------

        def do_OPTIONS(self):
            self._send(204, b"", "text/plain")

        def do_GET(self):
            try:
                parts = [p for p in self.path.split("?")[0].split("/") if p]
                if parts[:2] == ["api", "tasks"] and len(parts) == 2:
                    tasks = [
                        {
                            "task_id": s.task_id,
                            "name": s.name,
                            "family": s.family,
                            "no_assistance": s.no_assistance,
                            "waves": len(s.waves),
                        }
                        for s in load_all_tasks()
                    ]
                    return self._json({"tasks": tasks})
                if parts[:2] == ["api", "episodes"] and len(parts) >= 3:
                    episode_id = parts[2]
                    tail = parts[3] if len(parts) > 3 else ""
                    if tail == "observation":
                        return self._json(host.observation(episode_id))
                    if tail == "frame.png":
                        return self._send(200, host.frame_png(episode_id), "image/png")
                    if tail == "result":
                        return self._json(host.result(episode_id))
                    if tail == "log":
                        return self._send(
                            200, host.log_text(episode_id).encode("utf-8"),
                            "application/x-ndjson",
                        )
                    if tail == "":
                        return self._json(host.observation(episode_id))
                if ui_dir is not None:
                    return self._static(parts)
                raise ServiceError(404, "no_such_route")
            except ServiceError as exc:
                self._error(exc)

        def _static(self, parts: list[str]) -> None:
            rel = "/".join(parts) or "index.html"
            path = (ui_dir / rel).resolve()
            if not str(path).startswith(str(ui_dir.resolve())) or not path.is_file():
                raise ServiceError(404, "no_such_file")
            ctype = mimetypes.guess_type(str(path))[0] or "application/octet-stream"
            self._send(200, path.read_bytes(), ctype)

        def do_POST(self):
            try:
                parts = [p for p in self.path.split("?")[0].split("/") if p]
                body = self._body()
                if parts[:2] == ["api", "episodes"] and len(parts) == 2:
                    return self._json(host.create(body), status=201)
                if parts[:2] == ["api", "episodes"] and len(parts) == 4:
                    episode_id, tail = parts[2], parts[3]
                    if tail == "action":
                        return self._json(host.act(episode_id, body))
                    if tail == "ask":
                        return self._json(host.ask(episode_id, body))
                raise ServiceError(404, "no_such_route")
            except ServiceError as exc:
                self._error(exc)

    return Handler


def serve(
    address: str = "127.0.0.1",
    port: int = 8123,
    log_dir: str | Path | None = None,
    ui_dir: str | Path | None = None,
) -> ThreadingHTTPServer:
    """Build the HTTP server; callers run serve_forever (or use it in a
    thread for tests)."""
    host = EpisodeHost(log_dir=log_dir)
    handler = make_handler(host, Path(ui_dir) if ui_dir else None)
    server = ThreadingHTTPServer((address, port), handler)
    server.episode_host = host  # type: ignore[attr-defined]
    return server
