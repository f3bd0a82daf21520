"""Independent reference implementations used to cross-check the library.

Everything here is deliberately written in a different style from the
package: recursive position-walking evaluation instead of vector passes,
bitmask trace enumeration instead of itertools products, and a single-pass
argmax instead of a tournament. Tests compare the two implementations;
sharing only the AST node types and the Trace container keeps the
comparison meaningful.
"""

from __future__ import annotations

import math
from fractions import Fraction

from ginsign.ltl import (
    Always,
    And,
    Atom,
    Eventually,
    Implies,
    Next,
    Not,
    Or,
    Trace,
    Until,
)


# --------------------------------------------------------------------- traces
def all_up_traces(atoms: tuple[str, ...], k: int) -> list[Trace]:
    """Every ultimately-periodic trace with |prefix| + |loop| <= k.

    Letters are generated from bitmasks over the sorted atom list, then
    each word of length n is split into every (prefix, loop) pair with a
    non-empty loop.
    """
    names = sorted(atoms)
    letters = []
    for mask in range(2 ** len(names)):
        letters.append(tuple(names[i] for i in range(len(names)) if mask >> i & 1))
    traces = []
    for total in range(1, k + 1):
        word_count = len(letters) ** total
        for code in range(word_count):
            word, rest = [], code
            for _ in range(total):
                word.append(letters[rest % len(letters)])
                rest //= len(letters)
            for prefix_len in range(total):
                traces.append(Trace.make(word[:prefix_len], word[prefix_len:]))
    return traces


def trace_space_size(atom_count: int, k: int) -> int:
    base = 2**atom_count
    return sum(n * base**n for n in range(1, k + 1))


# ------------------------------------------------------------------ evaluator
def _canon(trace: Trace, pos: int) -> int:
    p, l = len(trace.prefix), len(trace.loop)
    return pos if pos < p else p + (pos - p) % l


def _holds_at(trace: Trace, pos: int, atom_label: str) -> bool:
    steps = list(trace.prefix) + list(trace.loop)
    return atom_label in steps[_canon(trace, pos)]


def naive_eval(formula, trace: Trace, pos: int = 0) -> bool:
    """Position-walking evaluation; every quantifier scans reachable steps."""
    p, l = len(trace.prefix), len(trace.loop)
    horizon = p + 2 * l  # beyond this every canonical position has recurred

    def reachable(start: int) -> list[int]:
        return sorted({_canon(trace, j) for j in range(start, horizon + 1)})

    def walk(f, at: int) -> bool:
        at = _canon(trace, at)
        if isinstance(f, Atom):
            return _holds_at(trace, at, f.label)
        if isinstance(f, Not):
            return not walk(f.child, at)
        if isinstance(f, And):
            return walk(f.left, at) and walk(f.right, at)
        if isinstance(f, Or):
            return walk(f.left, at) or walk(f.right, at)
        if isinstance(f, Implies):
            return (not walk(f.left, at)) or walk(f.right, at)
        if isinstance(f, Next):
            return walk(f.child, at + 1)
        if isinstance(f, Eventually):
            return any(walk(f.child, j) for j in reachable(at))
        if isinstance(f, Always):
            return all(walk(f.child, j) for j in reachable(at))
        if isinstance(f, Until):
            for j in range(at, horizon + 1):
                if walk(f.right, j):
                    return True
                if not walk(f.left, j):
                    return False
            return False
        raise TypeError(f"unknown node {type(f).__name__}")

    return walk(formula, pos)


def satisfaction_set(formula, traces: list[Trace]) -> frozenset[int]:
    return frozenset(i for i, t in enumerate(traces) if naive_eval(formula, t, 0))


# ------------------------------------------------------------------ selection
def brute_force_winner(candidates: list[str], score_of) -> int:
    """Argmax over the whole pool at once; ties go to the lowest index."""
    best, best_score = 0, -math.inf
    for i, cand in enumerate(candidates):
        s = score_of(cand)
        if s > best_score:
            best, best_score = i, s
    return best


def round_bound(n: int, m: int) -> int:
    if n <= 1:
        return 1
    return math.ceil(math.log(n, m)) + 1


# ------------------------------------------------------------------------ F1
def f1_by_hand(tp: int, pred_total: int, gold_total: int) -> float:
    """Micro F1 from counts using exact rational arithmetic."""
    if pred_total == 0 and gold_total == 0:
        return 1.0
    precision = Fraction(tp, pred_total) if pred_total else Fraction(0)
    recall = Fraction(tp, gold_total) if gold_total else Fraction(0)
    if precision + recall == 0:
        return 0.0
    return float(2 * precision * recall / (precision + recall))


# ------------------------------------------------------------------- formulas

_UNARY = (Not, Next, Eventually, Always)
_BINARY = (And, Or, Implies, Until)


def enumerate_formulas(atom_labels: tuple[str, ...], max_size: int) -> list:
    """Every formula of node count <= max_size over the given atoms."""
    by_size: dict[int, list] = {1: [Atom(label) for label in atom_labels]}
    for size in range(2, max_size + 1):
        layer = []
        for op in _UNARY:
            layer.extend(op(child) for child in by_size[size - 1])
        for op in _BINARY:
            for left_size in range(1, size - 1):
                right_size = size - 1 - left_size
                for left in by_size[left_size]:
                    layer.extend(op(left, right) for right in by_size[right_size])
        by_size[size] = layer
    return [f for size in sorted(by_size) for f in by_size[size]]
