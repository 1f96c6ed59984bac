"""Pre-episode ask-or-act: the bounded hint oracle and its protocol.

Before a tool-assisted episode starts, the agent may either proceed or
ask one targeted question.  Answers come from a frozen local corpus via
deterministic lexical retrieval (same question, same corpus: same hint,
byte for byte), are capped in length, screened so they never contain
coordinates or action triples, and persist in the agent's context for
the rest of that episode only.
"""

from __future__ import annotations

import hashlib
import json
import math
import re
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Callable

HINT_CHAR_CAP = 1200
NO_GUIDANCE_TEXT = "no guidance available"

# Lexical screens: pixel coordinates and action triples must never leak
# through a hint.
COORD_PATTERN = re.compile(r"\(\s*\d+\s*,\s*\d+\s*\)")
TRIPLE_PATTERN = re.compile(r"\(\s*\d\s*,\s*\d\s*,\s*\d\s*\)")
CLICK_PATTERN = re.compile(r"\bclick(?:ing)?\s+(?:at|on)\s+\d", re.IGNORECASE)

_TOKEN = re.compile(r"[a-z0-9']+")

_STOPWORDS = frozenset(
    "a an and are as at be by for from has have how i in is it its of on or "
    "that the this to was what when where which who why will with you your".split()
)


class ProtocolError(RuntimeError):
    """The agent violated the ask protocol (e.g. a second ask in one episode)."""


@dataclass
class Hint:
    text: str
    source_keys: list[str] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {"text": self.text, "source_keys": list(self.source_keys)}


@dataclass
class AskDecision:
    task_id: int
    episode_index: int
    choice: str  # "ask" | "act"
    question: str | None = None
    timestamp: int = 0  # logical sequence number, deterministic across runs

    def to_dict(self) -> dict:
        return {
            "task_id": self.task_id,
            "episode_index": self.episode_index,
            "choice": self.choice,
            "question": self.question,
            "timestamp": self.timestamp,
        }


@dataclass
class DecisionLogEntry:
    """One evaluated episode's summary, shown to the agent at later ask points."""

    task_id: int
    k: int
    choice: str
    question: str | None
    hint: str | None
    action_summary: str
    result: dict

    def to_dict(self) -> dict:
        return {
            "task_id": self.task_id,
            "k": self.k,
            "choice": self.choice,
            "question": self.question,
            "hint": self.hint,
            "action_summary": self.action_summary,
            "result": self.result,
        }


def _tokens(text: str) -> list[str]:
    return [t for t in _TOKEN.findall(text.lower()) if t not in _STOPWORDS]


def screened(text: str) -> bool:
    """True when the text trips a lexical screen and must not be returned."""
    return bool(
        COORD_PATTERN.search(text)
        or TRIPLE_PATTERN.search(text)
        or CLICK_PATTERN.search(text)
    )


@dataclass
class _Passage:
    doc_id: str
    index: int
    text: str
    task_ids: tuple[int, ...]
    tokens: frozenset[str] = field(default_factory=frozenset)


class HintOracle:
    """Deterministic retrieval over a frozen plain-text document set.

    Documents are split into blank-line passages.  A question scores a
    passage by summed inverse-document-frequency of shared terms, with a
    boost for documents tagged to the asked task; the best passage wins,
    ties broken by (doc id, passage index).
    """

    TASK_MATCH_BOOST = 3.0
    SCORE_FLOOR = 1e-9

    def __init__(self, corpus_dir: str | Path | None = None) -> None:
        if corpus_dir is None:
            root = resources.files("squadbench.askoract_data")
            manifest_text = root.joinpath("manifest.json").read_text()
            read = lambda name: root.joinpath(name).read_text()
        else:
            root = Path(corpus_dir)
            manifest_text = (root / "manifest.json").read_text()
            read = lambda name: (root / name).read_text()

        manifest = json.loads(manifest_text)
        self._docs: dict[str, str] = {}
        self._passages: list[_Passage] = []
        for doc in manifest["docs"]:
            text = read(doc["file"])
            self._docs[doc["id"]] = text
            task_ids = tuple(doc.get("task_ids", []))
            chunks = [p.strip() for p in text.split("\n\n") if p.strip()]
            for i, chunk in enumerate(chunks):
                self._passages.append(
                    _Passage(doc["id"], i, chunk, task_ids, frozenset(_tokens(chunk)))
                )
        if not self._passages:
            self._df: dict[str, int] = {}
            return
        self._df = {}
        for passage in self._passages:
            for token in passage.tokens:
                self._df[token] = self._df.get(token, 0) + 1

    def digest(self) -> str:
        """Content hash over every document, for immutability checks."""
        h = hashlib.sha256()
        for doc_id in sorted(self._docs):
            h.update(doc_id.encode("utf-8"))
            h.update(b"\x00")
            h.update(self._docs[doc_id].encode("utf-8"))
            h.update(b"\x00")
        return h.hexdigest()

    def _idf(self, token: str) -> float:
        df = self._df.get(token, 0)
        if df == 0:
            return 0.0
        return 1.0 + math.log(len(self._passages) / df)

    def retrieve(self, question: str, task_id: int | None = None) -> Hint:
        query = set(_tokens(question))
        if not query or not self._passages:
            return Hint(text=NO_GUIDANCE_TEXT)

        scored: list[tuple[float, str, int, _Passage]] = []
        for passage in self._passages:
            overlap = query & passage.tokens
            if not overlap:
                continue
            score = sum(self._idf(t) for t in overlap)
            if task_id is not None and task_id in passage.task_ids:
                score *= self.TASK_MATCH_BOOST
            scored.append((score, passage.doc_id, passage.index, passage))

        scored.sort(key=lambda item: (-item[0], item[1], item[2]))
        for score, doc_id, _, passage in scored:
            if score <= self.SCORE_FLOOR:
                break
            if screened(passage.text):
                continue
            return Hint(text=passage.text[:HINT_CHAR_CAP], source_keys=[doc_id])
        return Hint(text=NO_GUIDANCE_TEXT)


class AskGate:
    """Per-episode one-ask cap; a second accepted ask is a protocol error."""

    def __init__(self) -> None:
        self.asks_accepted = 0
        self.protocol_errors: list[str] = []

    def accept(self) -> None:
        if self.asks_accepted >= 1:
            self.protocol_errors.append("second_ask_rejected")
            raise ProtocolError("only one ask is permitted per episode")
        self.asks_accepted += 1


RespondFn = Callable[[dict], dict | None]


def decide_from_response(
    response: dict | None, task_id: int, episode_index: int
) -> AskDecision:
    """Interpret an ask-point response; anything malformed or absent
    (including a timeout) conservatively records an act."""
    choice = "act"
    question: str | None = None
    if isinstance(response, dict):
        ask = response.get("ask")
        if isinstance(ask, dict) and ask.get("choice") == "ask":
            q = ask.get("question")
            if isinstance(q, str) and q.strip():
                choice = "ask"
                question = q.strip()
    return AskDecision(
        task_id=task_id,
        episode_index=episode_index,
        choice=choice,
        question=question,
        timestamp=episode_index,
    )


def run_ask_point(
    respond: RespondFn,
    task_id: int,
    episode_index: int,
    decision_log: list[DecisionLogEntry],
    oracle: HintOracle,
    gate: AskGate,
) -> tuple[AskDecision, Hint | None]:
    """Offer the pre-episode choice and resolve an ask through the oracle."""
    request = {
        "type": "ask_point",
        "task_id": task_id,
        "episode_index": episode_index,
        "decision_log": [e.to_dict() for e in decision_log],
    }
    decision = decide_from_response(respond(request), task_id, episode_index)
    if decision.choice != "ask":
        return decision, None
    gate.accept()
    hint = oracle.retrieve(decision.question or "", task_id)
    return decision, hint
