"""Hierarchical grounding of lifted atomic propositions.

Each placeholder is resolved in two stages: first a predicate is chosen
from the signature's predicate prefix, then every argument slot is filled
independently from the constants of that slot's type. Both stages run the
same tournament: the candidate list is cut into contiguous windows of at
most `m` entries, a scorer picks one winner per window, and the winners
form the next round's list until a single candidate remains.

The payoff is the candidate budget: an AP is decided by looking at
|P| + sum over slots of |C_type| candidates instead of every element of
the full grounded-atom set.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

from .errors import (
    EmptyCandidateListError,
    GinsignError,
    ScorerFailureError,
    SizeLimitError,
    SlotOutOfRangeError,
)
from .scoring import PAD_TOKEN, ScoreRequest, SpanScorer, validate_response
from .signature import (
    ConstantSymbol,
    GroundedAtom,
    PredicateSymbol,
    Signature,
    build_prefix,
    count_grounded_atoms,
)

DEFAULT_SHARD_SIZE = 20


@dataclass(frozen=True)
class LiftedAP:
    """One placeholder with the NL span that denotes it."""

    placeholder_id: str
    span_text: str
    context_text: str | None = None

    def __post_init__(self) -> None:
        if not self.span_text.strip():
            raise ValueError(f"{self.placeholder_id}: span_text must be non-empty")


@dataclass(frozen=True)
class CandidateWindow:
    candidates: tuple[str, ...]  # exactly m entries, padded at the tail
    window_index: int
    origin: str  # "predicate" or "argument:<slot>"

    @property
    def real_candidates(self) -> tuple[str, ...]:
        return tuple(c for c in self.candidates if c != PAD_TOKEN)


@dataclass(frozen=True)
class GroundingDecision:
    placeholder_id: str
    predicate: PredicateSymbol
    args: tuple[ConstantSymbol, ...]
    evaluation_count: int  # real candidates scored across all rounds
    rounds: int  # tournament rounds summed over stages

    @property
    def atom(self) -> GroundedAtom:
        return GroundedAtom(self.predicate, self.args)

    def to_document(self) -> dict:
        return {
            "placeholder_id": self.placeholder_id,
            "atom": self.atom.canonical(),
            "predicate": self.predicate.name,
            "args": [a.name for a in self.args],
            "evaluation_count": self.evaluation_count,
            "rounds": self.rounds,
        }


def partition_windows(
    candidates: Sequence[str], m: int, origin: str = "predicate"
) -> list[CandidateWindow]:
    """Cut the list into ceil(N/m) contiguous windows; the last one is padded."""
    if m < 2:
        raise ValueError(f"shard size m must be at least 2, got {m}")
    if not candidates:
        raise EmptyCandidateListError(f"no candidates to partition for {origin}")
    windows = []
    for j, start in enumerate(range(0, len(candidates), m)):
        chunk = tuple(candidates[start : start + m])
        chunk += (PAD_TOKEN,) * (m - len(chunk))
        windows.append(CandidateWindow(chunk, j, origin))
    return windows


def tournament_select(
    ap: LiftedAP,
    candidates: Sequence[str],
    scorer: SpanScorer,
    m: int = DEFAULT_SHARD_SIZE,
    task: str = "predicate",
    predicate_hint: str | None = None,
) -> tuple[str, int, int]:
    """Run windowed rounds until one candidate remains.

    Returns (winner label, number of real candidates scored, rounds). The
    winner is never a pad entry; scorer errors surface as ScorerFailure
    carrying the window they occurred in.
    """
    if not candidates:
        raise EmptyCandidateListError(f"nothing to select for {ap.placeholder_id}")
    origin = task if task == "predicate" else f"argument:{predicate_hint or ''}"
    current = list(candidates)
    evaluation_count = 0
    rounds = 0
    while True:
        rounds += 1
        windows = partition_windows(current, m, origin)
        requests = [
            ScoreRequest(
                task=task,
                span_text=ap.span_text,
                context_text=ap.context_text,
                candidates=w.candidates,
                predicate_hint=predicate_hint,
            )
            for w in windows
        ]
        try:
            responses = scorer.score_batch(requests)
        except GinsignError as exc:
            raise ScorerFailureError(str(exc)) from exc
        except Exception as exc:
            raise ScorerFailureError(f"scorer raised {type(exc).__name__}: {exc}") from exc
        if len(responses) != len(windows):
            raise ScorerFailureError(
                f"{len(windows)} windows scored with {len(responses)} responses"
            )
        winners = []
        for w, req, resp in zip(windows, requests, responses):
            try:
                validate_response(req, resp)
            except GinsignError as exc:
                raise ScorerFailureError(str(exc), window_index=w.window_index) from exc
            winners.append(w.candidates[resp.chosen_index])
        evaluation_count += sum(len(w.real_candidates) for w in windows)
        current = winners
        if len(current) == 1:
            return current[0], evaluation_count, rounds


def ground_predicate(
    ap: LiftedAP, sig: Signature, scorer: SpanScorer, m: int = DEFAULT_SHARD_SIZE
) -> PredicateSymbol:
    """Stage one: pick a predicate from the signature's predicate prefix."""
    prefix = build_prefix(sig, None)
    if not prefix:
        raise EmptyCandidateListError("signature declares no predicates")
    winner, _, _ = tournament_select(ap, prefix, scorer, m, task="predicate")
    return sig.predicate(winner)


def filter_arguments(p: PredicateSymbol, slot: int, sig: Signature) -> list[str]:
    """Candidates for 1-based argument slot `slot`: constants of its type."""
    if not 1 <= slot <= p.arity:
        raise SlotOutOfRangeError(
            f"predicate {p.name!r} has arity {p.arity}; slot {slot} does not exist"
        )
    return build_prefix(sig, p.arg_types[slot - 1])


def ground_arguments(
    ap: LiftedAP,
    p: PredicateSymbol,
    sig: Signature,
    scorer: SpanScorer,
    m: int = DEFAULT_SHARD_SIZE,
) -> list[ConstantSymbol]:
    """Stage two: fill every slot independently from its type-filtered list."""
    out = []
    for slot in range(1, p.arity + 1):
        candidates = filter_arguments(p, slot, sig)
        if not candidates:
            raise EmptyCandidateListError(
                f"no constants of type {p.arg_types[slot - 1]!r} for slot {slot} "
                f"of {p.name!r}"
            )
        winner, _, _ = tournament_select(
            ap, candidates, scorer, m, task="argument", predicate_hint=p.name
        )
        out.append(sig.constant(winner))
    return out


def ground_ap(
    ap: LiftedAP, sig: Signature, scorer: SpanScorer, m: int = DEFAULT_SHARD_SIZE
) -> GroundingDecision:
    """Full hierarchy for one placeholder; the result is well-typed by construction."""
    prefix = build_prefix(sig, None)
    if not prefix:
        raise EmptyCandidateListError("signature declares no predicates")
    pred_name, evaluations, rounds = tournament_select(
        ap, prefix, scorer, m, task="predicate"
    )
    predicate = sig.predicate(pred_name)
    args = []
    for slot in range(1, predicate.arity + 1):
        candidates = filter_arguments(predicate, slot, sig)
        if not candidates:
            raise EmptyCandidateListError(
                f"no constants of type {predicate.arg_types[slot - 1]!r} for "
                f"slot {slot} of {predicate.name!r}"
            )
        winner, n, r = tournament_select(
            ap, candidates, scorer, m, task="argument", predicate_hint=predicate.name
        )
        evaluations += n
        rounds += r
        args.append(sig.constant(winner))
    return GroundingDecision(
        placeholder_id=ap.placeholder_id,
        predicate=predicate,
        args=tuple(args),
        evaluation_count=evaluations,
        rounds=rounds,
    )


def candidate_budget(sig: Signature, mode: str = "hierarchical") -> int:
    """Candidates examined to ground one AP.

    flat: size of the full grounded-atom set (every predicate crossed with
    every well-typed argument tuple). hierarchical: the predicate prefix
    plus, for the worst-case predicate, one type-filtered list per slot.
    """
    if mode == "flat":
        count = count_grounded_atoms(sig)
        if count > 10**9:
            raise SizeLimitError(f"flat budget {count} exceeds accounting cap")
        return count
    if mode == "hierarchical":
        constants_of = {t.name: 0 for t in sig.types}
        for c in sig.constants:
            constants_of[c.ctype] += 1
        per_predicate = [
            sum(constants_of[t] for t in p.arg_types) for p in sig.predicates
        ]
        worst = max(per_predicate, default=0)
        return len(sig.predicates) + worst
    raise ValueError(f"unknown budget mode {mode!r}; use 'flat' or 'hierarchical'")
