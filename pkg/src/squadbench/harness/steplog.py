"""Append-only episode step logs and their replay verifier.

Each episode writes one JSONL file: a header line, one line per agent
exchange (flushed before the next exchange is requested, so a crash
loses at most the in-flight decision), optional ask lines, and a final
result line.  Replay re-applies the logged resolutions against a fresh
state from the same seed and checks every recorded state digest.
"""

from __future__ import annotations

import json
from pathlib import Path

from squadbench.engine.battle import note_noop
from squadbench.engine.tasks import TaskSpec, load_task_spec
from squadbench.engine.types import Move, ResolvedAction
from squadbench.harness.runner import BattleRunner


def encode_line(record: dict) -> str:
    return json.dumps(record, sort_keys=True, separators=(",", ":"))


class StepLogWriter:
    def __init__(self, path: str | Path | None):
        self.path = Path(path) if path is not None else None
        self._fh = None
        self.lines: list[str] = []
        if self.path is not None:
            self.path.parent.mkdir(parents=True, exist_ok=True)
            self._fh = open(self.path, "w", encoding="utf-8")

    def write(self, record: dict) -> None:
        line = encode_line(record)
        self.lines.append(line)
        if self._fh is not None:
            self._fh.write(line + "\n")
            self._fh.flush()

    def close(self) -> None:
        if self._fh is not None:
            self._fh.close()
            self._fh = None

    def text(self) -> str:
        return "\n".join(self.lines) + ("\n" if self.lines else "")


def read_log(path: str | Path) -> list[dict]:
    records = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if line:
                records.append(json.loads(line))
    return records


class ReplayMismatch(RuntimeError):
    pass


def replay_records(records: list[dict], spec: TaskSpec) -> str:
    """Re-apply a step log against a fresh runner and return the final digest.

    Raises ReplayMismatch if any recorded state digest diverges from the
    reconstruction.
    """
    if not records or records[0].get("type") != "header":
        raise ReplayMismatch("log does not start with a header record")
    header = records[0]
    runner = BattleRunner(spec, int(header["seed"]))
    result = next((r for r in records if r.get("type") == "result"), None)

    for record in records:
        if record.get("type") != "step":
            continue
        runner.advance_to_decision()
        resolution = record["resolution"]
        kind = resolution["kind"]
        if kind == "action":
            a = resolution["action"]
            runner.apply_decision(
                ResolvedAction(a["actor"], Move(a["move"]), a["target"], a["off_turn"])
            )
        elif kind == "noop":
            note_noop(runner.state)
        # miss/illegal/staged/cleared exchanges leave the state untouched.

        want = record.get("state_digest")
        if want is not None and want != runner.digest():
            raise ReplayMismatch(
                f"digest mismatch at exchange {record.get('exchange')}"
            )

    # A completed episode settles trailing enemy turns before its result
    # digest is taken; an aborted one stops exactly at the failing exchange.
    aborted = result is not None and str(result.get("outcome", "")).startswith("aborted")
    if not aborted:
        runner.advance_to_decision()
    digest = runner.digest()
    if result is not None and result.get("final_digest") not in (None, digest):
        raise ReplayMismatch("final digest mismatch")
    return digest


def replay_log(path: str | Path, spec: TaskSpec | None = None) -> str:
    """Replay a log file; the task spec is looked up from the header when
    not supplied."""
    records = read_log(path)
    if spec is None:
        spec = load_task_spec(int(records[0]["task_id"]))
    return replay_records(records, spec)
