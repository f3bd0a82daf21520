"""Bounded logical equivalence, grounded equivalence, and model checking.

Two formulas are compared by exhaustively enumerating every ultimately-
periodic trace with |prefix| + |loop| <= k over the powerset of their joint
atom set. Refutations are exact (the witness replays through eval_on_trace);
agreement is complete only up to the bound, so verdicts carry bound_used.

Kripke structures are checked the same way: every lasso-shaped path up to
the bound is converted to a trace and evaluated directly, rather than built
into a product automaton.
"""

from __future__ import annotations

import itertools
import warnings
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterator, NamedTuple, Sequence

from .errors import (
    AlignmentMismatchError,
    AlphabetTooLargeError,
    BoundTooSmallWarning,
    UngroundedAtomError,
)
from .ltl import (
    Formula,
    GroundingMap,
    KripkeStructure,
    Trace,
    apply_grounding,
    eval_on_trace,
    extract_atoms,
    formula_size,
)
from .signature import GroundedAtom

DEFAULT_BOUND = 8
ALPHABET_CAP = 6
# Trace spaces up to this size are materialized once and shared across calls;
# larger spaces fall back to streaming enumeration with early exit.
_BITMAP_LIMIT = 250_000


@dataclass(frozen=True)
class EquivalenceVerdict:
    equivalent: bool
    witness: Trace | None
    bound_used: int


@dataclass(frozen=True)
class GleVerdict:
    lifted_equivalent: bool
    grounding_match: bool
    gle: bool
    ap_diff: frozenset[str]


@dataclass(frozen=True)
class ModelCheckResult:
    holds: bool
    counterexample: Trace | None
    bound_used: int
    counterexample_states: tuple[str, ...] | None = None


def _letters(alphabet: tuple[str, ...]) -> list[frozenset[str]]:
    """The 2^|A| observation sets, in binary-counting order ({} first)."""
    out = []
    for mask in range(1 << len(alphabet)):
        out.append(frozenset(a for i, a in enumerate(alphabet) if mask >> i & 1))
    return out


def trace_space_size(num_atoms: int, k: int) -> int:
    """|{(prefix, loop) : |prefix|+|loop| <= k}| over 2^num_atoms letters."""
    letters = 1 << num_atoms
    return sum(n * letters**n for n in range(1, k + 1))


def enumerate_traces(alphabet: Sequence[str], k: int) -> Iterator[Trace]:
    """All ultimately-periodic traces with |prefix|+|loop| <= k, shortest first."""
    letters = _letters(tuple(sorted(alphabet)))
    for total in range(1, k + 1):
        for word in itertools.product(letters, repeat=total):
            for loop_len in range(1, total + 1):
                yield Trace(word[: total - loop_len], word[total - loop_len :])


@lru_cache(maxsize=64)
def _trace_list(alphabet: tuple[str, ...], k: int) -> tuple[Trace, ...]:
    return tuple(enumerate_traces(alphabet, k))


@lru_cache(maxsize=4096)
def _truth_bitmap(f: Formula, alphabet: tuple[str, ...], k: int) -> int:
    """Bit i set iff f holds at position 0 of the i-th enumerated trace."""
    bitmap = 0
    for i, tr in enumerate(_trace_list(alphabet, k)):
        if eval_on_trace(f, tr, 0):
            bitmap |= 1 << i
    return bitmap


def _warn_if_bound_small(k: int, size: int) -> None:
    if k < size:
        warnings.warn(
            f"bound k={k} is below the small-model guidance {size}; "
            "an 'equivalent' verdict may be an artifact of the bound",
            BoundTooSmallWarning,
            stacklevel=3,
        )


def check_equivalence(f1: Formula, f2: Formula, k: int = DEFAULT_BOUND) -> EquivalenceVerdict:
    """Compare f1 and f2 on every bounded ultimately-periodic trace.

    Returns a refuting witness when one exists within the bound; otherwise
    the formulas are equivalent up to k (not unconditionally).
    """
    atoms = tuple(sorted(extract_atoms(f1) | extract_atoms(f2)))
    if len(atoms) > ALPHABET_CAP:
        raise AlphabetTooLargeError(
            f"joint atom set has {len(atoms)} atoms; exhaustive mode caps at {ALPHABET_CAP}"
        )
    if f1 == f2:
        return EquivalenceVerdict(True, None, k)
    _warn_if_bound_small(k, 2 * (formula_size(f1) + formula_size(f2)))

    if trace_space_size(len(atoms), k) <= _BITMAP_LIMIT:
        b1 = _truth_bitmap(f1, atoms, k)
        b2 = _truth_bitmap(f2, atoms, k)
        if b1 == b2:
            return EquivalenceVerdict(True, None, k)
        first_diff = b1 ^ b2
        index = (first_diff & -first_diff).bit_length() - 1
        return EquivalenceVerdict(False, _trace_list(atoms, k)[index], k)

    for tr in enumerate_traces(atoms, k):
        if eval_on_trace(f1, tr, 0) != eval_on_trace(f2, tr, 0):
            return EquivalenceVerdict(False, tr, k)
    return EquivalenceVerdict(True, None, k)


def check_gle(
    pred_lifted: Formula,
    pred_map: GroundingMap,
    gold_lifted: Formula,
    gold_map: GroundingMap,
    k: int = DEFAULT_BOUND,
) -> GleVerdict:
    """Grounded logical equivalence: trace equivalence plus atom-set identity.

    Both formulas are grounded first, which aligns their placeholders by the
    identity of the grounded atoms; equivalence is then checked on the
    grounded formulas.
    """
    grounded_pred = apply_grounding(pred_lifted, pred_map)
    grounded_gold = apply_grounding(gold_lifted, gold_map)
    verdict = check_equivalence(grounded_pred, grounded_gold, k)
    ap_pred = extract_atoms(grounded_pred)
    ap_gold = extract_atoms(grounded_gold)
    grounding_match = ap_pred == ap_gold
    return GleVerdict(
        lifted_equivalent=verdict.equivalent,
        grounding_match=grounding_match,
        gle=verdict.equivalent and grounding_match,
        ap_diff=frozenset(ap_pred ^ ap_gold),
    )


def enumerate_lassos(
    m: KripkeStructure, k: int
) -> Iterator[tuple[tuple[str, ...], int]]:
    """All lasso paths (state sequence, loop start) with length <= k.

    Paths start at initial states in declaration order; the final state must
    have an edge back to the loop start. Short paths come first.
    """

    def walk(path: tuple[str, ...]) -> Iterator[tuple[tuple[str, ...], int]]:
        last_succs = m.successors(path[-1])
        for start in range(len(path)):
            if path[start] in last_succs:
                yield path, start
        if len(path) < k:
            for nxt in last_succs:
                yield from walk(path + (nxt,))

    for init in m.initial:
        yield from walk((init,))


def model_check(
    m: KripkeStructure, f: Formula, k: int = DEFAULT_BOUND
) -> ModelCheckResult:
    """Check f on every lasso of m up to the bound.

    A False verdict carries the violating trace; a True verdict means no
    lasso within the bound violates f, which is complete only up to k.
    """
    alphabet = m.alphabet
    for atom in sorted(extract_atoms(f)):
        if atom not in alphabet:
            raise UngroundedAtomError(atom)
    if k < len(m.states) + 1:
        warnings.warn(
            f"bound k={k} cannot cover all {len(m.states)} states in one lasso",
            BoundTooSmallWarning,
            stacklevel=2,
        )
    for path, start in enumerate_lassos(m, k):
        observations = tuple(m.observation(s) for s in path)
        tr = Trace(observations[:start], observations[start:])
        if not eval_on_trace(f, tr, 0):
            return ModelCheckResult(False, tr, k, path)
    return ModelCheckResult(True, None, k, None)


# ---------------------------------------------------------------------------
# AP matching metrics
# ---------------------------------------------------------------------------


class F1Score(NamedTuple):
    precision: float
    recall: float
    f1: float


def _f1(tp: int, n_pred: int, n_gold: int) -> F1Score:
    if n_pred == 0 and n_gold == 0:
        return F1Score(1.0, 1.0, 1.0)
    precision = tp / n_pred if n_pred else 0.0
    recall = tp / n_gold if n_gold else 0.0
    denominator = precision + recall
    f1 = 2 * precision * recall / denominator if denominator else 0.0
    return F1Score(precision, recall, f1)


def _aligned_pairs(predictions, gold: Sequence[GroundedAtom]):
    """Pair up predictions and gold atoms by placeholder id.

    Gold atoms are positional: gold[i] grounds prop_<i+1>. The prediction
    list must cover exactly those placeholders, once each.
    """
    by_id: dict[str, GroundedAtom] = {}
    for decision in predictions:
        pid = decision.placeholder_id
        if pid in by_id:
            raise AlignmentMismatchError(f"duplicate prediction for {pid}")
        by_id[pid] = decision.atom
    expected = {f"prop_{i + 1}" for i in range(len(gold))}
    if set(by_id) != expected:
        raise AlignmentMismatchError(
            f"predictions cover {sorted(by_id)} but gold defines {sorted(expected)}"
        )
    return [(by_id[f"prop_{i + 1}"], gold_atom) for i, gold_atom in enumerate(gold)]


def ap_f1(predictions, gold: Sequence[GroundedAtom]) -> F1Score:
    """Micro-averaged F1 over AP slots; exact grounded-atom identity counts."""
    pairs = _aligned_pairs(predictions, gold)
    tp = sum(1 for p, g in pairs if p.canonical() == g.canonical())
    return _f1(tp, len(pairs), len(pairs))


def stage_f1(predictions, gold: Sequence[GroundedAtom]) -> dict[str, F1Score]:
    """Separate scores for the predicate stage and the argument stage.

    Argument slots only count as correct when the predicate also matches;
    slot totals follow each side's own arity, so a wrong-arity predicate
    costs both precision and recall.
    """
    pairs = _aligned_pairs(predictions, gold)
    predicate_tp = sum(1 for p, g in pairs if p.predicate.name == g.predicate.name)
    arg_tp = 0
    pred_slots = 0
    gold_slots = 0
    for p, g in pairs:
        pred_slots += len(p.args)
        gold_slots += len(g.args)
        if p.predicate.name == g.predicate.name:
            arg_tp += sum(1 for a, b in zip(p.args, g.args) if a == b)
    return {
        "atom": ap_f1(predictions, gold),
        "predicate": _f1(predicate_tp, len(pairs), len(pairs)),
        "argument": _f1(arg_tp, pred_slots, gold_slots),
    }
