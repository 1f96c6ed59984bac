"""Agent transports: one envelope schema, three ways to reach an agent.

Requests and responses are JSON objects.  In-process agents implement
``respond(request) -> response``; external agents speak the same schema
either as length-delimited frames over stdin/stdout or as HTTP POST
bodies.  A malformed or missing response is returned as None and the
episode layer applies the per-regime invalid-output rule.
"""

from __future__ import annotations

import json
import select
import subprocess
import urllib.error
import urllib.request
from typing import Protocol

from squadbench.interface import DcPrimitive, TaTriple

SCHEMA_VERSION = 1
INPUT_EVENT_DELAY_S = 0.5  # real-client pacing constant, logged as metadata only
DECISION_TIMEOUT_S = 60.0


class TransportError(RuntimeError):
    """The agent became unreachable; the episode aborts rather than no-ops."""


class Agent(Protocol):
    def respond(self, request: dict) -> dict | None: ...


class CallableAgent:
    """Wraps a plain function as an agent."""

    def __init__(self, fn, agent_id: str = "callable"):
        self._fn = fn
        self.agent_id = agent_id

    def respond(self, request: dict) -> dict | None:
        return self._fn(request)


def write_frame(stream, payload: dict) -> None:
    """Write one length-delimited JSON frame: ``<byte length>\\n<body>``."""
    body = json.dumps(payload, sort_keys=True).encode("utf-8")
    stream.write(f"{len(body)}\n".encode("ascii"))
    stream.write(body)
    stream.flush()


def read_frame(stream) -> dict | None:
    header = stream.readline()
    if not header:
        return None
    try:
        length = int(header.strip())
        body = stream.read(length)
        return json.loads(body.decode("utf-8"))
    except (ValueError, json.JSONDecodeError):
        return None


class SubprocessAgent:
    """Runs an agent command and exchanges frames over its stdio.

    A response that does not arrive within the per-decision timeout
    returns None (a no-op decision); a dead process raises
    :class:`TransportError` and aborts the episode.
    """

    def __init__(
        self,
        command: list[str],
        timeout_s: float = DECISION_TIMEOUT_S,
        agent_id: str | None = None,
    ):
        self.command = command
        self.timeout_s = timeout_s
        self.agent_id = agent_id or command[0]
        self._proc: subprocess.Popen | None = None

    def _ensure(self) -> subprocess.Popen:
        if self._proc is None:
            self._proc = subprocess.Popen(
                self.command,
                stdin=subprocess.PIPE,
                stdout=subprocess.PIPE,
            )
        if self._proc.poll() is not None:
            raise TransportError("agent process exited")
        return self._proc

    def respond(self, request: dict) -> dict | None:
        proc = self._ensure()
        try:
            write_frame(proc.stdin, request)
        except (BrokenPipeError, OSError) as exc:
            raise TransportError(str(exc)) from exc
        ready, _, _ = select.select([proc.stdout], [], [], self.timeout_s)
        if not ready:
            return None  # timeout: the episode injects a no-op
        response = read_frame(proc.stdout)
        if response is None and proc.poll() is not None:
            raise TransportError("agent process exited")
        return response

    def close(self) -> None:
        if self._proc is not None and self._proc.poll() is None:
            self._proc.terminate()
            try:
                self._proc.wait(timeout=5)
            except subprocess.TimeoutExpired:
                self._proc.kill()
        self._proc = None


class HttpAgent:
    """POSTs each request envelope to a remote agent endpoint."""

    def __init__(self, url: str, timeout_s: float = DECISION_TIMEOUT_S, agent_id: str | None = None):
        self.url = url
        self.timeout_s = timeout_s
        self.agent_id = agent_id or url

    def respond(self, request: dict) -> dict | None:
        body = json.dumps(request, sort_keys=True).encode("utf-8")
        req = urllib.request.Request(
            self.url, data=body, headers={"Content-Type": "application/json"}
        )
        try:
            with urllib.request.urlopen(req, timeout=self.timeout_s) as resp:
                return json.loads(resp.read().decode("utf-8"))
        except TimeoutError:
            return None
        except json.JSONDecodeError:
            return None
        except (urllib.error.URLError, OSError) as exc:
            raise TransportError(str(exc)) from exc


# ---------------------------------------------------------------------------
# Response parsing
# ---------------------------------------------------------------------------

def parse_dc_response(response: dict | None) -> DcPrimitive:
    """Decode a pointing-regime response; anything malformed is a no-op."""
    if not isinstance(response, dict):
        return DcPrimitive(kind="empty")
    dc = response.get("dc")
    if not isinstance(dc, dict):
        return DcPrimitive(kind="empty")
    kind = dc.get("kind")
    if kind == "click":
        x, y = dc.get("x"), dc.get("y")
        if isinstance(x, (int, float)) and isinstance(y, (int, float)) and not isinstance(x, bool):
            return DcPrimitive(kind="click", x=int(x), y=int(y))
        return DcPrimitive(kind="empty")
    if kind == "keypress":
        key = dc.get("key")
        if isinstance(key, str) and key:
            return DcPrimitive(kind="keypress", key=key)
        return DcPrimitive(kind="empty")
    return DcPrimitive(kind="empty")


def parse_ta_response(response: dict | None) -> TaTriple | None:
    """Decode a triple response; None marks a malformed (invalid) output."""
    if not isinstance(response, dict):
        return None
    ta = response.get("ta")
    if (
        isinstance(ta, (list, tuple))
        and len(ta) == 3
        and all(isinstance(v, int) and not isinstance(v, bool) for v in ta)
    ):
        return TaTriple(ta[0], ta[1], ta[2])
    return None
