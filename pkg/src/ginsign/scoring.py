"""Span scorers: the window-selection contract and its implementations.

A scorer maps (NL span, candidate window) to the index of the best
candidate. Three implementations ship here:

- LexicalScorer: deterministic token-overlap + character-trigram baseline.
- OracleScorer: answers from a provided span -> gold-label table; used to
  measure the ceiling of the surrounding machinery.
- Stdio/Http scorers: clients for out-of-process learned models speaking
  newline-delimited JSON, one document per line, with an optional batch
  envelope of up to 64 requests.

Wire documents::

    request   {"id": "1", "task": "predicate", "span_text": "...",
               "context_text": null, "candidates": ["a", "b", "<pad>"],
               "predicate_hint": null}
    response  {"id": "1", "chosen_index": 0, "scores": [0.9, 0.1, null]}
    batch     {"requests": [...]} -> {"responses": [...]}  (order preserved)

Every response is validated on receipt: the chosen index must be in bounds,
must not name a pad entry, and must be an argmax of the pad-masked scores
when scores are present.
"""

from __future__ import annotations

import itertools
import json
import math
import re
import shlex
import subprocess
import threading
from collections import deque
from dataclasses import dataclass, replace
from queue import Empty, Queue
from typing import Iterable, Mapping, Sequence

import httpx

from .errors import (
    ProtocolViolationError,
    ScorerTimeoutError,
    TransportError,
)

PAD_TOKEN = "<pad>"
BATCH_LIMIT = 64
DEFAULT_TIMEOUT = 30.0
_SCORE_EPSILON = 1e-9


@dataclass(frozen=True)
class ScoreRequest:
    task: str  # "predicate" | "argument"
    span_text: str
    candidates: tuple[str, ...]
    context_text: str | None = None
    predicate_hint: str | None = None
    id: str | None = None

    def __post_init__(self) -> None:
        if self.task not in ("predicate", "argument"):
            raise ValueError(f"unknown scoring task {self.task!r}")
        if not self.candidates:
            raise ValueError("a score request needs at least one candidate")
        real = [c for c in self.candidates if c != PAD_TOKEN]
        if not real:
            raise ValueError("a score request needs at least one non-pad candidate")
        if len(set(real)) != len(real):
            raise ValueError("candidate labels must be distinct apart from pads")

    def to_document(self) -> dict:
        return {
            "id": self.id,
            "task": self.task,
            "span_text": self.span_text,
            "context_text": self.context_text,
            "candidates": list(self.candidates),
            "predicate_hint": self.predicate_hint,
        }


@dataclass(frozen=True)
class ScoreResponse:
    chosen_index: int
    scores: tuple[float, ...] | None = None

    def to_document(self, id: str | None = None) -> dict:
        doc: dict = {"chosen_index": self.chosen_index}
        if id is not None:
            doc["id"] = id
        if self.scores is not None:
            doc["scores"] = [None if math.isinf(s) and s < 0 else s for s in self.scores]
        return doc


def response_from_document(doc: Mapping) -> ScoreResponse:
    if not isinstance(doc, Mapping) or "chosen_index" not in doc:
        raise ProtocolViolationError(f"response lacks chosen_index: {doc!r}")
    chosen = doc["chosen_index"]
    if not isinstance(chosen, int) or isinstance(chosen, bool):
        raise ProtocolViolationError(f"chosen_index must be an integer, got {chosen!r}")
    raw_scores = doc.get("scores")
    scores: tuple[float, ...] | None = None
    if raw_scores is not None:
        if not isinstance(raw_scores, Sequence) or isinstance(raw_scores, (str, bytes)):
            raise ProtocolViolationError("scores must be an array when present")
        cleaned = []
        for s in raw_scores:
            if s is None:
                cleaned.append(float("-inf"))
            elif isinstance(s, (int, float)) and not isinstance(s, bool):
                cleaned.append(float(s))
            else:
                raise ProtocolViolationError(f"score entries must be numbers, got {s!r}")
        scores = tuple(cleaned)
    return ScoreResponse(chosen_index=chosen, scores=scores)


def validate_response(req: ScoreRequest, resp: ScoreResponse) -> ScoreResponse:
    """Enforce the response contract against its request; returns resp."""
    n = len(req.candidates)
    if not 0 <= resp.chosen_index < n:
        raise ProtocolViolationError(
            f"chosen_index {resp.chosen_index} out of range for {n} candidates"
        )
    if req.candidates[resp.chosen_index] == PAD_TOKEN:
        raise ProtocolViolationError("scorer selected a pad entry")
    if resp.scores is not None:
        if len(resp.scores) != n:
            raise ProtocolViolationError(
                f"scores length {len(resp.scores)} does not match {n} candidates"
            )
        masked = [
            float("-inf") if req.candidates[i] == PAD_TOKEN else s
            for i, s in enumerate(resp.scores)
        ]
        best = max(masked)
        if masked[resp.chosen_index] < best - _SCORE_EPSILON:
            raise ProtocolViolationError(
                "chosen_index is not an argmax of the pad-masked scores"
            )
    return resp


class SpanScorer:
    """Base contract: total over any valid window, one index per request."""

    #: whether concurrent score() calls are safe without external locking
    concurrent_safe = True

    def score(self, req: ScoreRequest) -> ScoreResponse:
        raise NotImplementedError

    def score_batch(self, reqs: Sequence[ScoreRequest]) -> list[ScoreResponse]:
        return [self.score(r) for r in reqs]

    def close(self) -> None:
        pass

    def __enter__(self) -> "SpanScorer":
        return self

    def __exit__(self, *exc) -> None:
        self.close()


# ---------------------------------------------------------------------------
# Lexical baseline
# ---------------------------------------------------------------------------

_NON_ALNUM = re.compile(r"[^a-z0-9]+")


def _tokens(text: str) -> frozenset[str]:
    return frozenset(t for t in _NON_ALNUM.split(text.lower()) if t)


def _trigram_set(text: str) -> frozenset[str]:
    squeezed = _NON_ALNUM.sub("", text.lower())
    if len(squeezed) < 3:
        return frozenset([squeezed]) if squeezed else frozenset()
    return frozenset(squeezed[i : i + 3] for i in range(len(squeezed) - 2))


class LexicalScorer(SpanScorer):
    """Pure surface-overlap scorer; the deterministic stand-in for a model.

    Per candidate: w_token * (fraction of the candidate's tokens found in
    the span) + w_trigram * (character-trigram Jaccard between candidate
    and span). Pads score -inf; ties go to the lowest index.
    """

    def __init__(self, w_token: float = 1.0, w_trigram: float = 1.0):
        self.w_token = w_token
        self.w_trigram = w_trigram

    def score_one(self, span_text: str, candidate: str) -> float:
        if candidate == PAD_TOKEN:
            return float("-inf")
        span_tokens = _tokens(span_text)
        cand_tokens = _tokens(candidate)
        overlap = len(cand_tokens & span_tokens) / len(cand_tokens) if cand_tokens else 0.0
        span_tri = _trigram_set(span_text)
        cand_tri = _trigram_set(candidate)
        union = span_tri | cand_tri
        jaccard = len(span_tri & cand_tri) / len(union) if union else 0.0
        return self.w_token * overlap + self.w_trigram * jaccard

    def score(self, req: ScoreRequest) -> ScoreResponse:
        scores = tuple(self.score_one(req.span_text, c) for c in req.candidates)
        chosen = max(range(len(scores)), key=lambda i: scores[i])
        return ScoreResponse(chosen_index=chosen, scores=scores)


class OracleScorer(SpanScorer):
    """Replays known answers: picks the first candidate in the span's gold set.

    `answers` maps span text to the labels that are correct for that span
    (one per decision the span participates in; type filtering disambiguates
    which label belongs to which window). Falls back to the first real
    candidate when no gold label is present.
    """

    def __init__(self, answers: Mapping[str, Iterable[str]]):
        self.answers = {span: frozenset(labels) for span, labels in answers.items()}

    def score(self, req: ScoreRequest) -> ScoreResponse:
        gold = self.answers.get(req.span_text, frozenset())
        scores = tuple(
            float("-inf") if c == PAD_TOKEN else (1.0 if c in gold else 0.0)
            for c in req.candidates
        )
        chosen = max(range(len(scores)), key=lambda i: scores[i])
        return ScoreResponse(chosen_index=chosen, scores=scores)


# ---------------------------------------------------------------------------
# External scorers
# ---------------------------------------------------------------------------


def _chunked(items: Sequence, size: int):
    for start in range(0, len(items), size):
        yield items[start : start + size]


class _RequestIds:
    def __init__(self) -> None:
        self._counter = itertools.count(1)
        self._lock = threading.Lock()

    def take(self) -> str:
        with self._lock:
            return str(next(self._counter))


class StdioScorer(SpanScorer):
    """Client for a scorer subprocess speaking line-delimited JSON on stdio.

    Writes are serialized; requests on one channel are answered strictly in
    order. The child's stderr is retained (last 50 lines) for diagnostics.
    """

    concurrent_safe = True  # guarded by an internal lock

    def __init__(self, command: str, timeout: float = DEFAULT_TIMEOUT):
        self.command = command
        self.timeout = timeout
        self._ids = _RequestIds()
        self._lock = threading.Lock()
        self._proc: subprocess.Popen | None = None
        self._lines: Queue = Queue()
        self._stderr_tail: deque[str] = deque(maxlen=50)

    def _ensure_started(self) -> None:
        if self._proc is not None and self._proc.poll() is None:
            return
        if self._proc is not None:
            raise TransportError(self._death_notice())
        try:
            self._proc = subprocess.Popen(
                shlex.split(self.command),
                stdin=subprocess.PIPE,
                stdout=subprocess.PIPE,
                stderr=subprocess.PIPE,
                text=True,
                bufsize=1,
            )
        except OSError as exc:
            raise TransportError(f"could not start scorer {self.command!r}: {exc}") from exc
        threading.Thread(
            target=self._pump, args=(self._proc.stdout, self._lines), daemon=True
        ).start()
        threading.Thread(
            target=self._drain_stderr, args=(self._proc.stderr,), daemon=True
        ).start()

    @staticmethod
    def _pump(stream, sink: Queue) -> None:
        for line in stream:
            sink.put(line)
        sink.put(None)  # EOF marker

    def _drain_stderr(self, stream) -> None:
        for line in stream:
            self._stderr_tail.append(line.rstrip("\n"))

    def _death_notice(self) -> str:
        tail = "\n".join(self._stderr_tail)
        suffix = f"; stderr tail:\n{tail}" if tail else ""
        return f"scorer process {self.command!r} exited{suffix}"

    def _roundtrip(self, payload: dict) -> dict:
        self._ensure_started()
        assert self._proc is not None and self._proc.stdin is not None
        try:
            self._proc.stdin.write(json.dumps(payload) + "\n")
            self._proc.stdin.flush()
        except (BrokenPipeError, OSError) as exc:
            raise TransportError(self._death_notice()) from exc
        try:
            line = self._lines.get(timeout=self.timeout)
        except Empty:
            raise ScorerTimeoutError(
                f"scorer {self.command!r} gave no answer within {self.timeout}s"
            ) from None
        if line is None:
            raise TransportError(self._death_notice())
        try:
            doc = json.loads(line)
        except json.JSONDecodeError as exc:
            raise ProtocolViolationError(f"response is not JSON: {line!r}") from exc
        if not isinstance(doc, dict):
            raise ProtocolViolationError(f"response must be a JSON object: {doc!r}")
        return doc

    def _check_id(self, sent_id: str, doc: Mapping) -> None:
        got = doc.get("id")
        if got is not None and str(got) != sent_id:
            raise ProtocolViolationError(
                f"response id {got!r} does not match request id {sent_id!r}"
            )

    def score(self, req: ScoreRequest) -> ScoreResponse:
        rid = req.id or self._ids.take()
        payload = replace(req, id=rid).to_document()
        with self._lock:
            doc = self._roundtrip(payload)
        self._check_id(rid, doc)
        return validate_response(req, response_from_document(doc))

    def score_batch(self, reqs: Sequence[ScoreRequest]) -> list[ScoreResponse]:
        out: list[ScoreResponse] = []
        for chunk in _chunked(reqs, BATCH_LIMIT):
            ids = [r.id or self._ids.take() for r in chunk]
            payload = {
                "requests": [
                    replace(r, id=i).to_document()
                    for r, i in zip(chunk, ids)
                ]
            }
            with self._lock:
                doc = self._roundtrip(payload)
            body = doc.get("responses")
            if not isinstance(body, list) or len(body) != len(chunk):
                raise ProtocolViolationError(
                    f"batch of {len(chunk)} answered with {body!r}"
                )
            for req, rid, item in zip(chunk, ids, body):
                if not isinstance(item, dict):
                    raise ProtocolViolationError(f"batch entry is not an object: {item!r}")
                self._check_id(rid, item)
                out.append(validate_response(req, response_from_document(item)))
        return out

    def close(self) -> None:
        if self._proc is not None and self._proc.poll() is None:
            try:
                self._proc.stdin.close()  # type: ignore[union-attr]
            except OSError:
                pass
            try:
                self._proc.wait(timeout=5)
            except subprocess.TimeoutExpired:
                self._proc.kill()
                self._proc.wait()


class HttpScorer(SpanScorer):
    """Client for the HTTP binding: the same documents at POST <base>/score."""

    def __init__(self, url: str, timeout: float = DEFAULT_TIMEOUT):
        base = url.rstrip("/")
        self.endpoint = base if base.endswith("/score") else base + "/score"
        self._ids = _RequestIds()
        self._client = httpx.Client(timeout=timeout)

    def _post(self, payload: dict) -> dict | list:
        try:
            response = self._client.post(self.endpoint, json=payload)
        except httpx.TimeoutException as exc:
            raise ScorerTimeoutError(f"no answer from {self.endpoint} in time") from exc
        except httpx.HTTPError as exc:
            raise TransportError(f"POST {self.endpoint} failed: {exc}") from exc
        if response.status_code != 200:
            raise TransportError(
                f"POST {self.endpoint} returned {response.status_code}: "
                f"{response.text[:200]}"
            )
        try:
            return response.json()
        except ValueError as exc:
            raise ProtocolViolationError("response body is not JSON") from exc

    def score(self, req: ScoreRequest) -> ScoreResponse:
        rid = req.id or self._ids.take()
        doc = self._post(replace(req, id=rid).to_document())
        if not isinstance(doc, dict):
            raise ProtocolViolationError(f"response must be a JSON object: {doc!r}")
        got = doc.get("id")
        if got is not None and str(got) != rid:
            raise ProtocolViolationError(f"response id {got!r} != request id {rid!r}")
        return validate_response(req, response_from_document(doc))

    def score_batch(self, reqs: Sequence[ScoreRequest]) -> list[ScoreResponse]:
        out: list[ScoreResponse] = []
        for chunk in _chunked(reqs, BATCH_LIMIT):
            ids = [r.id or self._ids.take() for r in chunk]
            payload = {
                "requests": [
                    replace(r, id=i).to_document()
                    for r, i in zip(chunk, ids)
                ]
            }
            doc = self._post(payload)
            if not isinstance(doc, dict) or not isinstance(doc.get("responses"), list):
                raise ProtocolViolationError(f"batch answered with {doc!r}")
            body = doc["responses"]
            if len(body) != len(chunk):
                raise ProtocolViolationError(
                    f"batch of {len(chunk)} answered with {len(body)} responses"
                )
            for req, rid, item in zip(chunk, ids, body):
                if not isinstance(item, dict):
                    raise ProtocolViolationError(f"batch entry is not an object: {item!r}")
                got = item.get("id")
                if got is not None and str(got) != rid:
                    raise ProtocolViolationError(f"response id {got!r} != request id {rid!r}")
                out.append(validate_response(req, response_from_document(item)))
        return out

    def close(self) -> None:
        self._client.close()


def make_scorer(spec: str, timeout: float = DEFAULT_TIMEOUT) -> SpanScorer:
    """Build a scorer from its textual spec.

    `lexical` | `external:<command>` | `http:<url>` | `oracle:<answers.json>`
    (answers: span text -> list of gold labels).
    """
    if spec == "lexical":
        return LexicalScorer()
    if spec.startswith("external:"):
        return StdioScorer(spec[len("external:") :], timeout=timeout)
    if spec.startswith(("http://", "https://")):
        return HttpScorer(spec, timeout=timeout)
    if spec.startswith("http:"):
        return HttpScorer(spec[len("http:") :], timeout=timeout)
    if spec.startswith("oracle:"):
        with open(spec[len("oracle:") :], encoding="utf-8") as fh:
            return OracleScorer(json.load(fh))
    raise ValueError(
        f"unknown scorer spec {spec!r}; expected lexical, external:<cmd>, "
        "http:<url>, or oracle:<answers.json>"
    )
