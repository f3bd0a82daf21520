import math
import sys
from pathlib import Path

import pytest

from ginsign.errors import (
    ProtocolViolationError,
    ScorerTimeoutError,
    TransportError,
)
from ginsign.scoring import (
    BATCH_LIMIT,
    PAD_TOKEN,
    LexicalScorer,
    OracleScorer,
    ScoreRequest,
    ScoreResponse,
    StdioScorer,
    make_scorer,
    response_from_document,
    validate_response,
)

FAKE = f"{sys.executable} {Path(__file__).with_name('fake_scorers.py')}"


def req(span, cands, task="predicate", **kw):
    return ScoreRequest(task=task, span_text=span, candidates=tuple(cands), **kw)


# ------------------------------------------------------------------- lexical


def test_lexical_picks_token_overlap():
    r = req("pick up the package", ["pickup", "go_to", "search"])
    resp = LexicalScorer().score(r)
    assert r.candidates[resp.chosen_index] == "pickup"


def test_lexical_picks_multiword_constant():
    r = req("go to the loading dock", ["shelf", "loading_dock"], task="argument")
    resp = LexicalScorer().score(r)
    assert r.candidates[resp.chosen_index] == "loading_dock"


def test_lexical_is_pure():
    r = req("deliver the backpack", ["deliver", "pickup"])
    s = LexicalScorer()
    first = s.score(r)
    for _ in range(5):
        again = s.score(r)
        assert again.chosen_index == first.chosen_index
        assert again.scores == first.scores


def test_lexical_is_scale_invariant():
    heavy = LexicalScorer(w_token=10.0, w_trigram=5.0)
    light = LexicalScorer(w_token=2.0, w_trigram=1.0)
    r = req("search for the teddy bear", ["teddy-bear", "bear", "zebra"], task="argument")
    assert heavy.score(r).chosen_index == light.score(r).chosen_index


def test_lexical_masks_pads():
    r = req("anything", ["alpha", PAD_TOKEN, "beta", PAD_TOKEN], task="argument")
    resp = LexicalScorer().score(r)
    assert r.candidates[resp.chosen_index] != PAD_TOKEN
    assert resp.scores[1] == -math.inf and resp.scores[3] == -math.inf


def test_lexical_tie_breaks_to_lowest_index():
    r = req("zzz", ["alpha", "beta", "gamma"])  # all score 0.0
    resp = LexicalScorer().score(r)
    assert resp.chosen_index == 0


# -------------------------------------------------------------------- oracle


def test_oracle_scorer_answers_from_gold():
    s = OracleScorer({"pick up the backpack": frozenset({"pickup", "backpack"})})
    r = req("pick up the backpack", ["deliver", "pickup", "search"])
    assert r.candidates[s.score(r).chosen_index] == "pickup"
    r2 = req("pick up the backpack", ["apple", "backpack"], task="argument")
    assert r2.candidates[s.score(r2).chosen_index] == "backpack"


# --------------------------------------------------------------- validation


def test_request_rejects_empty_and_all_pad_windows():
    with pytest.raises(ValueError):
        req("x", [])
    with pytest.raises(ValueError):
        req("x", [PAD_TOKEN, PAD_TOKEN])


def test_request_rejects_duplicate_candidates():
    with pytest.raises(ValueError):
        req("x", ["a", "a"])


def test_response_document_round_trip():
    resp = ScoreResponse(chosen_index=1, scores=(0.0, 2.0, -math.inf))
    doc = resp.to_document(id="w9")
    assert doc["id"] == "w9"
    assert doc["scores"][2] is None  # -inf marshals as null
    back = response_from_document(doc)
    assert back.chosen_index == 1
    assert back.scores[2] == -math.inf


def test_validate_response_bounds():
    r = req("x", ["a", "b"])
    with pytest.raises(ProtocolViolationError):
        validate_response(r, ScoreResponse(chosen_index=5))
    with pytest.raises(ProtocolViolationError):
        validate_response(r, ScoreResponse(chosen_index=-1))


def test_validate_response_pad_mask():
    r = req("x", ["a", PAD_TOKEN])
    with pytest.raises(ProtocolViolationError):
        validate_response(r, ScoreResponse(chosen_index=1))


def test_validate_response_argmax_agreement():
    r = req("x", ["a", "b"])
    with pytest.raises(ProtocolViolationError):
        validate_response(r, ScoreResponse(chosen_index=0, scores=(0.0, 1.0)))
    ok = validate_response(r, ScoreResponse(chosen_index=1, scores=(0.0, 1.0)))
    assert ok.chosen_index == 1


def test_response_parse_violations():
    with pytest.raises(ProtocolViolationError):
        response_from_document({})
    with pytest.raises(ProtocolViolationError):
        response_from_document({"chosen_index": "zero"})
    with pytest.raises(ProtocolViolationError):
        response_from_document({"chosen_index": True})
    with pytest.raises(ProtocolViolationError):
        response_from_document({"chosen_index": 0, "scores": ["high"]})


# ------------------------------------------------------------- stdio scorer


def test_stdio_round_trip_single():
    s = StdioScorer(f"{FAKE} ok", timeout=10)
    try:
        r = req("pick up the package", ["pickup", "pick_up", "go_to"])
        resp = s.score(r)
        assert r.candidates[resp.chosen_index] in ("pickup", "pick_up")
    finally:
        s.close()


def test_stdio_round_trip_batch_preserves_order():
    s = StdioScorer(f"{FAKE} ok", timeout=10)
    try:
        reqs = [
            req("go to room A", ["pick_up", "go_to"]),
            req("pick up the package", ["pick_up", "go_to"]),
        ]
        out = s.score_batch(reqs)
        assert [r.chosen_index for r in out] == [1, 0]
    finally:
        s.close()


def test_stdio_large_batch_is_chunked():
    s = StdioScorer(f"{FAKE} first", timeout=10)
    try:
        reqs = [req(f"span {i}", ["a", "b"]) for i in range(BATCH_LIMIT + 7)]
        out = s.score_batch(reqs)
        assert len(out) == BATCH_LIMIT + 7
        assert all(r.chosen_index == 0 for r in out)
    finally:
        s.close()


@pytest.mark.parametrize("behavior", ["bad-index", "pad-argmax", "score-mismatch", "wrong-id", "garbage"])
def test_stdio_protocol_violations(behavior):
    s = StdioScorer(f"{FAKE} {behavior}", timeout=10)
    try:
        r = req("anything goes", ["alpha", "beta", PAD_TOKEN])
        with pytest.raises(ProtocolViolationError):
            s.score(r)
    finally:
        s.close()


def test_stdio_timeout():
    s = StdioScorer(f"{FAKE} hang", timeout=0.3)
    try:
        with pytest.raises(ScorerTimeoutError):
            s.score(req("x", ["a", "b"]))
    finally:
        s.close()


def test_stdio_child_death_is_transport_error():
    s = StdioScorer(f"{FAKE} die", timeout=10)
    try:
        with pytest.raises(TransportError):
            s.score(req("x", ["a", "b"]))
    finally:
        s.close()


def test_stdio_missing_binary_is_transport_error():
    s = StdioScorer("definitely-not-a-real-binary-anywhere")
    with pytest.raises(TransportError):
        s.score(req("x", ["a"]))


# ------------------------------------------------------------- make_scorer


def test_make_scorer_dispatch():
    assert isinstance(make_scorer("lexical"), LexicalScorer)
    assert isinstance(make_scorer(f"external:{FAKE} ok"), StdioScorer)
    from ginsign.scoring import HttpScorer

    assert isinstance(make_scorer("http://127.0.0.1:1/score"), HttpScorer)
    with pytest.raises(ValueError):
        make_scorer("quantum")
