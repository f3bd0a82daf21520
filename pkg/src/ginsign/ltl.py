"""LTL abstract syntax, concrete syntax, and semantics over lasso traces.

Concrete syntax (ASCII): `!` `&` `|` `->` for the boolean connectives and
`X` `F` `G` `U` for the temporal operators. Precedence, tightest first:
unary (`!`, `X`, `F`, `G`), then `U`, `&`, `|`, `->`; `U` and `->` associate
to the right. Unicode glyph spellings of the same operators are accepted on
input. Atoms are either placeholders `prop_<k>` or grounded labels such as
`deliver(backpack,loading_dock)`; one formula never mixes the two kinds.

An infinite word is represented as a Trace: a finite prefix followed by a
finite loop repeated forever. Evaluation is exact on this representation
because only `len(prefix) + len(loop)` positions are semantically distinct.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass
from pathlib import Path
from typing import Iterator, Mapping

from .errors import (
    LtlSyntaxError,
    MissingMappingError,
    MixedAtomKindsError,
)
from .signature import GroundedAtom

PLACEHOLDER = re.compile(r"^prop_\d+$")


# ---------------------------------------------------------------------------
# Abstract syntax
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Formula:
    pass


@dataclass(frozen=True)
class Atom(Formula):
    label: str


@dataclass(frozen=True)
class Not(Formula):
    child: Formula


@dataclass(frozen=True)
class And(Formula):
    left: Formula
    right: Formula


@dataclass(frozen=True)
class Or(Formula):
    left: Formula
    right: Formula


@dataclass(frozen=True)
class Implies(Formula):
    left: Formula
    right: Formula


@dataclass(frozen=True)
class Next(Formula):
    child: Formula


@dataclass(frozen=True)
class Eventually(Formula):
    child: Formula


@dataclass(frozen=True)
class Always(Formula):
    child: Formula


@dataclass(frozen=True)
class Until(Formula):
    left: Formula
    right: Formula


_UNARY = (Not, Next, Eventually, Always)
_BINARY = (And, Or, Implies, Until)


def subformulas(f: Formula) -> Iterator[Formula]:
    """Post-order traversal; children before parents."""
    if isinstance(f, _UNARY):
        yield from subformulas(f.child)
    elif isinstance(f, _BINARY):
        yield from subformulas(f.left)
        yield from subformulas(f.right)
    yield f


def extract_atoms(f: Formula) -> set[str]:
    """The distinct atom labels appearing in the formula."""
    return {sub.label for sub in subformulas(f) if isinstance(sub, Atom)}


def formula_size(f: Formula) -> int:
    return sum(1 for _ in subformulas(f))


def is_placeholder(label: str) -> bool:
    return PLACEHOLDER.match(label) is not None


def atom_kinds(f: Formula) -> set[str]:
    """Which atom kinds occur: subset of {"lifted", "grounded"}."""
    kinds = set()
    for label in extract_atoms(f):
        kinds.add("lifted" if is_placeholder(label) else "grounded")
    return kinds


def operator_skeleton(f: Formula) -> str:
    """Shape of the tree with atom labels erased; used to check substitutions."""
    if isinstance(f, Atom):
        return "."
    if isinstance(f, _UNARY):
        return f"{type(f).__name__}({operator_skeleton(f.child)})"
    return f"{type(f).__name__}({operator_skeleton(f.left)},{operator_skeleton(f.right)})"


# ---------------------------------------------------------------------------
# Concrete syntax
# ---------------------------------------------------------------------------

# Canonical operator spelling -> accepted input spellings. Callers may pass
# their own table to absorb whatever surface syntax an upstream tool emits.
DEFAULT_ALIASES: dict[str, tuple[str, ...]] = {
    "not": ("!", "~", "¬"),
    "and": ("&", "&&", "∧"),
    "or": ("|", "||", "∨"),
    "implies": ("->", "=>", "→", "⇒"),
    "next": ("X", "○", "◯"),
    "eventually": ("F", "<>", "◇", "♢", "⋄"),
    "always": ("G", "[]", "□", "◻"),
    "until": ("U",),
}

_IDENT = re.compile(r"[A-Za-z_][A-Za-z0-9_-]*")


@dataclass(frozen=True)
class _Token:
    kind: str  # operator name, "atom", "lparen", "rparen", or "end"
    text: str
    position: int


def _tokenize(text: str, aliases: Mapping[str, tuple[str, ...]]) -> list[_Token]:
    # Word-shaped operator spellings (F, G, X, U) only count when they form a
    # whole identifier, so atom names like `Fire` keep their leading letters.
    word_ops = {}
    symbol_ops = []
    for op, spellings in aliases.items():
        for spelling in spellings:
            if _IDENT.fullmatch(spelling):
                word_ops[spelling] = op
            else:
                symbol_ops.append((spelling, op))
    symbol_ops.sort(key=lambda pair: len(pair[0]), reverse=True)

    tokens: list[_Token] = []
    i = 0
    while i < len(text):
        ch = text[i]
        if ch.isspace():
            i += 1
            continue
        if ch == "(":
            tokens.append(_Token("lparen", ch, i))
            i += 1
            continue
        if ch == ")":
            tokens.append(_Token("rparen", ch, i))
            i += 1
            continue
        ident = _IDENT.match(text, i)
        if ident:
            name = ident.group(0)
            if name in word_ops:
                tokens.append(_Token(word_ops[name], name, i))
                i = ident.end()
                continue
            # An identifier immediately followed by `(` is a grounded atom
            # application; whitespace before `(` starts a new expression.
            i = ident.end()
            if i < len(text) and text[i] == "(":
                close = text.find(")", i)
                if close == -1:
                    raise LtlSyntaxError("unterminated atom argument list", i)
                inner = text[i + 1 : close]
                args = [a.strip() for a in inner.split(",")] if inner.strip() else []
                for a in args:
                    if not _IDENT.fullmatch(a):
                        raise LtlSyntaxError(f"bad atom argument {a!r}", i + 1)
                label = f"{name}({','.join(args)})" if args else name
                tokens.append(_Token("atom", label, ident.start()))
                i = close + 1
            else:
                tokens.append(_Token("atom", name, ident.start()))
            continue
        for spelling, op in symbol_ops:
            if text.startswith(spelling, i):
                tokens.append(_Token(op, spelling, i))
                i += len(spelling)
                break
        else:
            raise LtlSyntaxError(f"unexpected character {ch!r}", i)
    tokens.append(_Token("end", "", len(text)))
    return tokens


class _Parser:
    def __init__(self, tokens: list[_Token]):
        self.tokens = tokens
        self.index = 0

    @property
    def current(self) -> _Token:
        return self.tokens[self.index]

    def advance(self) -> _Token:
        token = self.current
        self.index += 1
        return token

    def expect(self, kind: str) -> _Token:
        if self.current.kind != kind:
            raise LtlSyntaxError(
                f"expected {kind}, found {self.current.text or 'end of input'!r}",
                self.current.position,
            )
        return self.advance()

    # Grammar, loosest binding first.
    def implies(self) -> Formula:
        left = self.disjunction()
        if self.current.kind == "implies":
            self.advance()
            return Implies(left, self.implies())
        return left

    def disjunction(self) -> Formula:
        node = self.conjunction()
        while self.current.kind == "or":
            self.advance()
            node = Or(node, self.conjunction())
        return node

    def conjunction(self) -> Formula:
        node = self.until()
        while self.current.kind == "and":
            self.advance()
            node = And(node, self.until())
        return node

    def until(self) -> Formula:
        left = self.unary()
        if self.current.kind == "until":
            self.advance()
            return Until(left, self.until())
        return left

    def unary(self) -> Formula:
        kind = self.current.kind
        if kind == "not":
            self.advance()
            return Not(self.unary())
        if kind == "next":
            self.advance()
            return Next(self.unary())
        if kind == "eventually":
            self.advance()
            return Eventually(self.unary())
        if kind == "always":
            self.advance()
            return Always(self.unary())
        return self.primary()

    def primary(self) -> Formula:
        if self.current.kind == "atom":
            return Atom(self.advance().text)
        if self.current.kind == "lparen":
            self.advance()
            node = self.implies()
            self.expect("rparen")
            return node
        raise LtlSyntaxError(
            f"expected an atom or '(', found {self.current.text or 'end of input'!r}",
            self.current.position,
        )


def parse_ltl(text: str, aliases: Mapping[str, tuple[str, ...]] | None = None) -> Formula:
    """Parse formula text; raises LtlSyntaxError with the failing position.

    Raises MixedAtomKindsError when placeholder and grounded atoms co-occur.
    """
    tokens = _tokenize(text, aliases or DEFAULT_ALIASES)
    parser = _Parser(tokens)
    formula = parser.implies()
    parser.expect("end")
    if len(atom_kinds(formula)) > 1:
        raise MixedAtomKindsError(
            "formula mixes prop_<k> placeholders with grounded atoms"
        )
    return formula


def print_ltl(f: Formula) -> str:
    """Canonical fully-parenthesized rendering; parse(print(f)) == f."""
    if isinstance(f, Atom):
        return f.label
    if isinstance(f, Not):
        return f"! ({print_ltl(f.child)})"
    if isinstance(f, Next):
        return f"X ({print_ltl(f.child)})"
    if isinstance(f, Eventually):
        return f"F ({print_ltl(f.child)})"
    if isinstance(f, Always):
        return f"G ({print_ltl(f.child)})"
    ops = {And: "&", Or: "|", Implies: "->", Until: "U"}
    return f"({print_ltl(f.left)}) {ops[type(f)]} ({print_ltl(f.right)})"


# ---------------------------------------------------------------------------
# Grounding maps
# ---------------------------------------------------------------------------


def canonical_atom_label(value: GroundedAtom | str) -> str:
    """Canonical AP label: no interior spaces, nullary atoms bare."""
    if isinstance(value, GroundedAtom):
        return value.canonical()
    return re.sub(r"\s+", "", value.strip())


@dataclass(frozen=True)
class GroundingMap:
    """Total assignment of placeholders to grounded atoms (or raw labels)."""

    mapping: Mapping[str, GroundedAtom | str]

    def label(self, placeholder: str) -> str:
        if placeholder not in self.mapping:
            raise MissingMappingError(placeholder)
        return canonical_atom_label(self.mapping[placeholder])

    def to_document(self) -> dict[str, str]:
        return {k: canonical_atom_label(v) for k, v in self.mapping.items()}

    @classmethod
    def from_document(cls, doc: Mapping[str, str], sig=None) -> "GroundingMap":
        """Read `{placeholder: atom label}`; validates atoms when a signature is given."""
        mapping: dict[str, GroundedAtom | str] = {}
        for placeholder, label in doc.items():
            if sig is not None:
                mapping[placeholder] = sig.parse_atom(label)
            else:
                mapping[placeholder] = label
        return cls(mapping)


def apply_grounding(f: Formula, g: GroundingMap) -> Formula:
    """Replace every placeholder atom with its grounded label.

    The operator skeleton is preserved exactly; atoms that are already
    grounded pass through untouched.
    """
    if isinstance(f, Atom):
        if is_placeholder(f.label):
            return Atom(g.label(f.label))
        return f
    if isinstance(f, Not):
        return Not(apply_grounding(f.child, g))
    if isinstance(f, Next):
        return Next(apply_grounding(f.child, g))
    if isinstance(f, Eventually):
        return Eventually(apply_grounding(f.child, g))
    if isinstance(f, Always):
        return Always(apply_grounding(f.child, g))
    ctor = type(f)
    return ctor(apply_grounding(f.left, g), apply_grounding(f.right, g))


# ---------------------------------------------------------------------------
# Traces and evaluation
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Trace:
    """The infinite word prefix . loop^omega; the loop is never empty."""

    prefix: tuple[frozenset[str], ...]
    loop: tuple[frozenset[str], ...]

    def __post_init__(self) -> None:
        if len(self.loop) == 0:
            raise ValueError("trace loop must be non-empty")

    @classmethod
    def make(cls, prefix, loop) -> "Trace":
        return cls(
            tuple(frozenset(step) for step in prefix),
            tuple(frozenset(step) for step in loop),
        )

    @classmethod
    def from_document(cls, doc: Mapping) -> "Trace":
        return cls.make(doc.get("prefix", []), doc["loop"])

    @classmethod
    def load(cls, path: str | Path) -> "Trace":
        with open(path, encoding="utf-8") as fh:
            return cls.from_document(json.load(fh))

    def to_document(self) -> dict:
        return {
            "prefix": [sorted(step) for step in self.prefix],
            "loop": [sorted(step) for step in self.loop],
        }

    @property
    def positions(self) -> int:
        """Number of semantically distinct positions."""
        return len(self.prefix) + len(self.loop)

    def canonical_position(self, position: int) -> int:
        if position < 0:
            raise ValueError("trace positions start at 0")
        p = len(self.prefix)
        if position < self.positions:
            return position
        return p + (position - p) % len(self.loop)

    def successor(self, position: int) -> int:
        return self.canonical_position(position + 1)

    def observation(self, position: int) -> frozenset[str]:
        position = self.canonical_position(position)
        if position < len(self.prefix):
            return self.prefix[position]
        return self.loop[position - len(self.prefix)]


def _label_trace(f: Formula, tr: Trace) -> dict[Formula, list[bool]]:
    """Truth vector of every subformula at each distinct trace position."""
    p, n = len(tr.prefix), tr.positions
    loop_len = n - p
    table: dict[Formula, list[bool]] = {}
    for sub in subformulas(f):
        if sub in table:
            continue
        if isinstance(sub, Atom):
            vec = [sub.label in tr.observation(i) for i in range(n)]
        elif isinstance(sub, Not):
            child = table[sub.child]
            vec = [not v for v in child]
        elif isinstance(sub, And):
            left, right = table[sub.left], table[sub.right]
            vec = [a and b for a, b in zip(left, right)]
        elif isinstance(sub, Or):
            left, right = table[sub.left], table[sub.right]
            vec = [a or b for a, b in zip(left, right)]
        elif isinstance(sub, Implies):
            left, right = table[sub.left], table[sub.right]
            vec = [(not a) or b for a, b in zip(left, right)]
        elif isinstance(sub, Next):
            child = table[sub.child]
            vec = [child[tr.successor(i)] for i in range(n)]
        elif isinstance(sub, Eventually):
            child = table[sub.child]
            vec = [False] * n
            # Every loop position reaches the whole loop.
            loop_any = any(child[p:])
            for i in range(p, n):
                vec[i] = loop_any
            for i in range(p - 1, -1, -1):
                vec[i] = child[i] or vec[i + 1]
        elif isinstance(sub, Always):
            child = table[sub.child]
            vec = [False] * n
            loop_all = all(child[p:])
            for i in range(p, n):
                vec[i] = loop_all
            for i in range(p - 1, -1, -1):
                vec[i] = child[i] and vec[i + 1]
        elif isinstance(sub, Until):
            left, right = table[sub.left], table[sub.right]
            vec = [False] * n
            # Inside the loop: walk at most one full cycle looking for the
            # right operand while the left one stays true.
            for offset in range(loop_len):
                value = False
                for step in range(loop_len):
                    pos = p + (offset + step) % loop_len
                    if right[pos]:
                        value = True
                        break
                    if not left[pos]:
                        break
                vec[p + offset] = value
            for i in range(p - 1, -1, -1):
                vec[i] = right[i] or (left[i] and vec[i + 1])
        else:  # pragma: no cover - exhaustive over the AST
            raise TypeError(f"unknown formula node {type(sub).__name__}")
        table[sub] = vec
    return table


def eval_on_trace(f: Formula, tr: Trace, position: int = 0) -> bool:
    """Standard LTL semantics of `f` at `position` on the infinite word."""
    table = _label_trace(f, tr)
    return table[f][tr.canonical_position(position)]


# ---------------------------------------------------------------------------
# Kripke structures
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class KripkeStructure:
    """Labeled state-transition system with a total transition relation."""

    states: tuple[str, ...]
    initial: tuple[str, ...]
    transitions: Mapping[str, tuple[str, ...]]
    labels: Mapping[str, frozenset[str]]
    declared_atoms: frozenset[str] | None = None

    def __post_init__(self) -> None:
        from .errors import SchemaError

        known = set(self.states)
        if not self.initial:
            raise SchemaError("a model needs at least one initial state")
        for s in self.initial:
            if s not in known:
                raise SchemaError(f"initial state {s!r} is not declared")
        for s in self.states:
            succs = self.transitions.get(s, ())
            if not succs:
                raise SchemaError(f"state {s!r} has no successor; transitions must be total")
            for t in succs:
                if t not in known:
                    raise SchemaError(f"transition {s!r} -> {t!r} targets an undeclared state")
        for s in self.transitions:
            if s not in known:
                raise SchemaError(f"transitions declared for unknown state {s!r}")
        for s in self.labels:
            if s not in known:
                raise SchemaError(f"labels declared for unknown state {s!r}")

    @property
    def alphabet(self) -> frozenset[str]:
        """Atoms the model can speak about: declared atoms plus every label used."""
        used: set[str] = set()
        for s in self.states:
            used |= self.observation(s)
        if self.declared_atoms is not None:
            used |= self.declared_atoms
        return frozenset(used)

    def observation(self, state: str) -> frozenset[str]:
        return self.labels.get(state, frozenset())

    def successors(self, state: str) -> tuple[str, ...]:
        return self.transitions[state]

    @classmethod
    def from_document(cls, doc: Mapping) -> "KripkeStructure":
        from .errors import SchemaError

        try:
            states = tuple(str(s) for s in doc["states"])
            initial = tuple(str(s) for s in doc["initial"])
            transitions = {
                str(s): tuple(str(t) for t in succs)
                for s, succs in doc["transitions"].items()
            }
            labels = {
                str(s): frozenset(str(a) for a in aps)
                for s, aps in doc.get("labels", {}).items()
            }
        except (KeyError, TypeError, AttributeError) as exc:
            raise SchemaError(f"bad model document: {exc}") from exc
        declared = doc.get("atoms")
        return cls(
            states=states,
            initial=initial,
            transitions=transitions,
            labels=labels,
            declared_atoms=None if declared is None else frozenset(declared),
        )

    @classmethod
    def load(cls, path: str | Path) -> "KripkeStructure":
        with open(path, encoding="utf-8") as fh:
            return cls.from_document(json.load(fh))

    def to_document(self) -> dict:
        doc = {
            "states": list(self.states),
            "initial": list(self.initial),
            "transitions": {s: list(t) for s, t in self.transitions.items()},
            "labels": {s: sorted(self.labels.get(s, frozenset())) for s in self.states},
        }
        if self.declared_atoms is not None:
            doc["atoms"] = sorted(self.declared_atoms)
        return doc
