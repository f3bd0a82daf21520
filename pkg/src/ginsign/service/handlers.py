"""One handler per endpoint; handlers are plain functions over schema models.

The FastAPI app and the in-process client both route through these, so a
local CLI run and a remote call exercise identical logic and produce
identical documents.
"""

from __future__ import annotations

import warnings
from contextlib import closing
from typing import Mapping

from .. import __version__
from ..equivalence import check_equivalence, check_gle, model_check
from ..errors import ProtocolViolationError
from ..grounding import LiftedAP, ground_ap
from ..ltl import (
    GroundingMap,
    KripkeStructure,
    Trace,
    atom_kinds,
    eval_on_trace,
    extract_atoms,
    formula_size,
    parse_ltl,
    print_ltl,
)
from ..pipeline import (
    SplitConfig,
    emit_report,
    export_training,
    lift_template,
    load_dataset_scorer,
    record_from_document,
    run_eval,
    translate_template,
)
from ..scoring import (
    BATCH_LIMIT,
    ScoreRequest,
    SpanScorer,
    make_scorer,
    validate_response,
)
from ..signature import build_prefix, signature_to_document, validate_signature
from .schemas import (
    CheckEquivBody,
    CheckGleBody,
    EvalDatasetBody,
    EvalTraceBody,
    ExportTrainingBody,
    GroundBody,
    ModelCheckBody,
    ParseBody,
    PrefixBody,
    SignatureBody,
    TranslateBody,
)


def handle_health() -> dict:
    return {"status": "ok", "version": __version__}


def handle_validate(body: SignatureBody) -> dict:
    sig = validate_signature(body.signature)
    return {
        "name": sig.name,
        "types": len(sig.types),
        "predicates": len(sig.predicates),
        "constants": len(sig.constants),
        "warnings": list(sig.warnings),
        "signature": signature_to_document(sig),
    }


def handle_prefix(body: PrefixBody) -> dict:
    sig = validate_signature(body.signature)
    return {"type_filter": body.type_filter, "candidates": build_prefix(sig, body.type_filter)}


def handle_parse(body: ParseBody) -> dict:
    f = parse_ltl(body.formula)
    (kind,) = atom_kinds(f)
    return {
        "canonical": print_ltl(f),
        "atoms": sorted(extract_atoms(f)),
        "kind": kind,
        "size": formula_size(f),
    }


def handle_eval_trace(body: EvalTraceBody) -> dict:
    f = parse_ltl(body.formula)
    tr = Trace.from_document(body.trace)
    return {
        "value": eval_on_trace(f, tr, body.position),
        "position": body.position,
        "canonical_position": tr.canonical_position(body.position),
    }


def handle_ground(body: GroundBody) -> dict:
    sig = validate_signature(body.signature)
    with closing(make_scorer(body.scorer)) as scorer:
        decisions = []
        for ap in body.aps:
            lifted = LiftedAP(
                placeholder_id=ap.placeholder_id,
                span_text=ap.span_text,
                context_text=ap.context_text,
            )
            decisions.append(ground_ap(lifted, sig, scorer, body.m).to_document())
    return {"decisions": decisions}


def _score_request_from(doc: Mapping) -> ScoreRequest:
    if not isinstance(doc, Mapping):
        raise ProtocolViolationError(f"request must be a JSON object: {doc!r}")
    for key in ("task", "span_text", "candidates"):
        if key not in doc:
            raise ProtocolViolationError(f"request lacks {key!r}")
    try:
        return ScoreRequest(
            task=doc["task"],
            span_text=doc["span_text"],
            candidates=tuple(doc["candidates"]),
            context_text=doc.get("context_text"),
            predicate_hint=doc.get("predicate_hint"),
            id=None if doc.get("id") is None else str(doc["id"]),
        )
    except (ValueError, TypeError) as exc:
        raise ProtocolViolationError(str(exc)) from exc


def handle_score(payload: Mapping, scorer: SpanScorer) -> dict:
    """The wire protocol's HTTP binding: bare request or batch envelope."""
    if isinstance(payload, Mapping) and "requests" in payload:
        docs = payload["requests"]
        if not isinstance(docs, list):
            raise ProtocolViolationError("envelope 'requests' must be an array")
        if len(docs) > BATCH_LIMIT:
            raise ProtocolViolationError(
                f"envelope holds {len(docs)} requests; the limit is {BATCH_LIMIT}"
            )
        requests = [_score_request_from(d) for d in docs]
        responses = scorer.score_batch(requests)
        return {
            "responses": [
                validate_response(req, resp).to_document(req.id)
                for req, resp in zip(requests, responses)
            ]
        }
    request = _score_request_from(payload)
    response = validate_response(request, scorer.score(request))
    return response.to_document(request.id)


def handle_check_equiv(body: CheckEquivBody) -> dict:
    f1 = parse_ltl(body.f1)
    f2 = parse_ltl(body.f2)
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        verdict = check_equivalence(f1, f2, body.k)
    return {
        "equivalent": verdict.equivalent,
        "witness": verdict.witness.to_document() if verdict.witness else None,
        "bound_used": verdict.bound_used,
        "warnings": [str(w.message) for w in caught],
    }


def handle_check_gle(body: CheckGleBody) -> dict:
    sig = validate_signature(body.signature) if body.signature else None
    pred_map = GroundingMap.from_document(body.pred_map, sig)
    gold_map = GroundingMap.from_document(body.gold_map, sig)
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        verdict = check_gle(
            parse_ltl(body.pred_ltl), pred_map, parse_ltl(body.gold_ltl), gold_map, body.k
        )
    return {
        "lifted_equivalent": verdict.lifted_equivalent,
        "grounding_match": verdict.grounding_match,
        "gle": verdict.gle,
        "ap_diff": sorted(verdict.ap_diff),
        "warnings": [str(w.message) for w in caught],
    }


def handle_model_check(body: ModelCheckBody) -> dict:
    m = KripkeStructure.from_document(body.model)
    f = parse_ltl(body.formula)
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        result = model_check(m, f, body.k)
    return {
        "holds": result.holds,
        "counterexample": result.counterexample.to_document()
        if result.counterexample
        else None,
        "counterexample_states": list(result.counterexample_states)
        if result.counterexample_states
        else None,
        "bound_used": result.bound_used,
        "warnings": [str(w.message) for w in caught],
    }


def handle_eval_dataset(body: EvalDatasetBody) -> dict:
    sig = validate_signature(body.signature)
    records = [
        record_from_document(doc, sig, index=i) for i, doc in enumerate(body.records)
    ]
    split = SplitConfig(
        mode=body.split.mode,
        heldout_predicates=frozenset(body.split.heldout_predicates),
        heldout_constants=frozenset(body.split.heldout_constants),
        heldout_domains=frozenset(body.split.heldout_domains),
    )
    scorer = load_dataset_scorer(body.scorer)
    try:
        report = run_eval(
            records,
            sig,
            scorer,
            split=split,
            k=body.k,
            m=body.m,
            workers=body.workers,
            bootstrap_seed=body.bootstrap_seed,
            resamples=body.resamples,
            scorer_id=body.scorer,
        )
    finally:
        if isinstance(scorer, SpanScorer):
            scorer.close()
    return report.to_document()


def handle_translate(body: TranslateBody) -> dict:
    sig = validate_signature(body.signature)
    lifted = lift_template(body.nl, sig, body.synonyms)
    out = {
        "lifted_nl": lifted.lifted_nl,
        "spans": dict(lifted.spans),
    }
    if lifted.spans:
        out["lifted_ltl"] = print_ltl(translate_template(lifted.lifted_nl))
    else:
        out["lifted_ltl"] = None
    return out


def handle_export_training(body: ExportTrainingBody) -> dict:
    sig = validate_signature(body.signature)
    records = [
        record_from_document(doc, sig, index=i) for i, doc in enumerate(body.records)
    ]
    split = SplitConfig(
        mode=body.split.mode,
        heldout_predicates=frozenset(body.split.heldout_predicates),
        heldout_constants=frozenset(body.split.heldout_constants),
        heldout_domains=frozenset(body.split.heldout_domains),
    )
    shards = export_training(records, sig, split=split, m=body.m, seed=body.seed)
    return {"shards": shards, "count": len(shards)}


__all__ = [
    "emit_report",
    "handle_check_equiv",
    "handle_check_gle",
    "handle_eval_dataset",
    "handle_eval_trace",
    "handle_export_training",
    "handle_ground",
    "handle_health",
    "handle_model_check",
    "handle_parse",
    "handle_prefix",
    "handle_score",
    "handle_translate",
    "handle_validate",
]
