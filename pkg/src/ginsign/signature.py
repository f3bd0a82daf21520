"""Many-sorted system signatures: typed vocabularies of predicates and constants.

A signature document is JSON with two ordered sections::

    {
      "name": "warehouse",                      # optional identifier
      "types": {"item": ["apple", ...], ...},   # type -> its constants
      "predicates": {"deliver": ["item", "location"], "idle": [], ...}
    }

Declaration order is meaningful: it is the canonical enumeration order used
by prefix generation, so two loads of the same document always produce the
same candidate lists.
"""

from __future__ import annotations

import json
import re
import warnings
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable

from .errors import (
    DuplicateNameError,
    EmptySignatureSectionWarning,
    SignatureValidationError,
    SizeLimitError,
    UnknownTypeError,
)

# Types are strict snake-case; constants and predicates keep their original
# case (compared case-insensitively) and may carry hyphens, since inventories
# in the wild mix `teddy-bear`, `roomA`, and snake_case.
_TYPE_NAME = re.compile(r"^[a-z][a-z0-9_]*$")
_MEMBER_NAME = re.compile(r"^[A-Za-z][A-Za-z0-9_-]*$")

DEFAULT_ENUMERATION_CAP = 10**6


def normalize_identifier(name: str) -> str:
    """Replace spaces with underscores; case is preserved."""
    return name.strip().replace(" ", "_")


@dataclass(frozen=True)
class TypeSymbol:
    name: str


@dataclass(frozen=True)
class ConstantSymbol:
    name: str
    ctype: str  # name of the TypeSymbol this constant instantiates


@dataclass(frozen=True)
class PredicateSymbol:
    name: str
    arg_types: tuple[str, ...] = ()

    @property
    def arity(self) -> int:
        return len(self.arg_types)


@dataclass(frozen=True)
class GroundedAtom:
    """A predicate applied to well-typed constants; nullary atoms are bare predicates."""

    predicate: PredicateSymbol
    args: tuple[ConstantSymbol, ...] = ()

    def __post_init__(self) -> None:
        if len(self.args) != self.predicate.arity:
            raise SignatureValidationError(
                f"atom {self.predicate.name!r} expects {self.predicate.arity} "
                f"arguments, got {len(self.args)}"
            )
        for slot, (arg, expected) in enumerate(
            zip(self.args, self.predicate.arg_types), start=1
        ):
            if arg.ctype != expected:
                raise SignatureValidationError(
                    f"argument {slot} of {self.predicate.name!r} must have type "
                    f"{expected!r}, got {arg.name!r}: {arg.ctype!r}"
                )

    def canonical(self) -> str:
        """Render the atom label: `pred` when nullary, else `pred(c1,c2)`."""
        if not self.args:
            return self.predicate.name
        return f"{self.predicate.name}({','.join(a.name for a in self.args)})"

    def __str__(self) -> str:
        return self.canonical()


@dataclass(frozen=True)
class Signature:
    """Validated, immutable vocabulary; safe to share across worker threads."""

    types: tuple[TypeSymbol, ...]
    predicates: tuple[PredicateSymbol, ...]
    constants: tuple[ConstantSymbol, ...]
    name: str | None = None
    warnings: tuple[str, ...] = field(default=(), compare=False)

    def type_names(self) -> list[str]:
        return [t.name for t in self.types]

    def has_type(self, name: str) -> bool:
        return any(t.name == name for t in self.types)

    def predicate(self, name: str) -> PredicateSymbol:
        for p in self.predicates:
            if p.name == name:
                return p
        raise KeyError(f"no predicate named {name!r}")

    def constant(self, name: str) -> ConstantSymbol:
        for c in self.constants:
            if c.name == name:
                return c
        raise KeyError(f"no constant named {name!r}")

    def constants_of_type(self, type_name: str) -> list[ConstantSymbol]:
        """Constants of one type, in declaration order."""
        return [c for c in self.constants if c.ctype == type_name]

    def atom(self, predicate_name: str, arg_names: Iterable[str] = ()) -> GroundedAtom:
        """Build a well-typed atom; raises if any reference or type is wrong."""
        try:
            pred = self.predicate(predicate_name)
            args = tuple(self.constant(a) for a in arg_names)
        except KeyError as exc:
            raise SignatureValidationError(str(exc.args[0])) from exc
        return GroundedAtom(pred, args)

    def parse_atom(self, text: str) -> GroundedAtom:
        """Parse `pred` or `pred(c1,c2)` into a validated GroundedAtom."""
        text = text.strip()
        match = re.fullmatch(r"([A-Za-z][A-Za-z0-9_-]*)\s*(?:\(([^()]*)\))?", text)
        if match is None:
            raise SignatureValidationError(f"cannot parse atom label {text!r}")
        name, arg_part = match.group(1), match.group(2)
        if arg_part is None:
            arg_names: list[str] = []
        else:
            arg_names = [a.strip() for a in arg_part.split(",")] if arg_part.strip() else []
        return self.atom(name, arg_names)


def validate_signature(raw: dict) -> Signature:
    """Validate a parsed signature document and build the Signature.

    All violations are collected before raising, so one failed load reports
    every problem in the document. Predicates whose argument types have no
    constants are legal but trigger a warning: such predicates can never be
    fully instantiated.
    """
    violations: list[str] = []
    unknown_type = False
    duplicate = False

    if not isinstance(raw, dict):
        raise SignatureValidationError("signature document must be a JSON object")
    types_doc = raw.get("types", {})
    preds_doc = raw.get("predicates", {})
    if not isinstance(types_doc, dict) or not isinstance(preds_doc, dict):
        raise SignatureValidationError(
            "'types' must map type -> [constants] and 'predicates' must map "
            "name -> [argument types]"
        )

    types: list[TypeSymbol] = []
    constants: list[ConstantSymbol] = []
    predicates: list[PredicateSymbol] = []
    seen: dict[str, str] = {}  # normalized identifier -> namespace it came from

    def claim(name: str, namespace: str) -> bool:
        # Uniqueness is case-insensitive across all three namespaces so that
        # grounded atom labels can never become ambiguous.
        nonlocal duplicate
        key = name.lower()
        if key in seen:
            violations.append(
                f"duplicate identifier {name!r} ({namespace} collides with {seen[key]})"
            )
            duplicate = True
            return False
        seen[key] = namespace
        return True

    for type_name, members in types_doc.items():
        tname = normalize_identifier(str(type_name)).lower()
        if not _TYPE_NAME.match(tname):
            violations.append(f"invalid type name {type_name!r}")
            continue
        if claim(tname, "type"):
            types.append(TypeSymbol(tname))
        if not isinstance(members, list):
            violations.append(f"constants of type {tname!r} must be a list")
            continue
        for member in members:
            cname = normalize_identifier(str(member))
            if not _MEMBER_NAME.match(cname):
                violations.append(f"invalid constant name {member!r}")
                continue
            if claim(cname, f"constant of {tname!r}"):
                constants.append(ConstantSymbol(cname, tname))

    declared_types = {t.name for t in types}
    for pred_name, arg_types in preds_doc.items():
        pname = normalize_identifier(str(pred_name))
        if not _MEMBER_NAME.match(pname):
            violations.append(f"invalid predicate name {pred_name!r}")
            continue
        if not isinstance(arg_types, list):
            violations.append(f"argument types of predicate {pname!r} must be a list")
            continue
        resolved: list[str] = []
        ok = True
        for ref in arg_types:
            tref = normalize_identifier(str(ref)).lower()
            if tref not in declared_types:
                violations.append(
                    f"predicate {pname!r} references unknown type {ref!r}"
                )
                unknown_type = True
                ok = False
            else:
                resolved.append(tref)
        if ok and claim(pname, "predicate"):
            predicates.append(PredicateSymbol(pname, tuple(resolved)))

    if violations:
        if unknown_type and not duplicate:
            raise UnknownTypeError(violations)
        if duplicate and not unknown_type:
            raise DuplicateNameError(violations)
        raise SignatureValidationError(violations)

    by_type: dict[str, int] = {t.name: 0 for t in types}
    for c in constants:
        by_type[c.ctype] += 1
    warn_messages = []
    for p in predicates:
        for t in p.arg_types:
            if by_type[t] == 0:
                warn_messages.append(
                    f"predicate {p.name!r} needs a {t!r} argument but the "
                    "signature declares no constant of that type"
                )
    sig = Signature(
        types=tuple(types),
        predicates=tuple(predicates),
        constants=tuple(constants),
        name=raw.get("name"),
        warnings=tuple(warn_messages),
    )
    for message in warn_messages:
        warnings.warn(message, EmptySignatureSectionWarning, stacklevel=2)
    return sig


def signature_to_document(sig: Signature) -> dict:
    """Inverse of validate_signature: parse(print(sig)) round-trips exactly."""
    doc: dict = {}
    if sig.name is not None:
        doc["name"] = sig.name
    doc["types"] = {
        t.name: [c.name for c in sig.constants if c.ctype == t.name] for t in sig.types
    }
    doc["predicates"] = {p.name: list(p.arg_types) for p in sig.predicates}
    return doc


def load_signature(path: str | Path) -> Signature:
    with open(path, encoding="utf-8") as fh:
        return validate_signature(json.load(fh))


def build_prefix(sig: Signature, type_filter: str | None = None) -> list[str]:
    """Enumerate candidates for one grounding decision.

    Without a filter this is every predicate name; with a filter it is every
    constant of that type. Order is declaration order, so the result is
    deterministic for a fixed document.
    """
    if type_filter is None:
        return [p.name for p in sig.predicates]
    if not sig.has_type(type_filter):
        raise UnknownTypeError(f"type {type_filter!r} is not declared in the signature")
    return [c.name for c in sig.constants_of_type(type_filter)]


def count_grounded_atoms(sig: Signature) -> int:
    """Size of the grounded vocabulary without materializing it."""
    total = 0
    sizes = {t.name: len(sig.constants_of_type(t.name)) for t in sig.types}
    for p in sig.predicates:
        combos = 1
        for t in p.arg_types:
            combos *= sizes[t]
        total += combos
    return total


def enumerate_grounded_atoms(
    sig: Signature, cap: int = DEFAULT_ENUMERATION_CAP
) -> list[GroundedAtom]:
    """Materialize the full grounded vocabulary (brute-force oracle).

    Intended for small signatures only; refuses to build more than `cap`
    atoms. Deterministic: predicates in declaration order, argument tuples
    in lexicographic declaration order.
    """
    total = count_grounded_atoms(sig)
    if total > cap:
        raise SizeLimitError(
            f"grounded vocabulary has {total} atoms, above the cap of {cap}"
        )
    atoms: list[GroundedAtom] = []
    for p in sig.predicates:
        pools = [sig.constants_of_type(t) for t in p.arg_types]
        if not pools:
            atoms.append(GroundedAtom(p))
            continue
        if any(len(pool) == 0 for pool in pools):
            continue  # predicate can never be instantiated
        indices = [0] * len(pools)
        while True:
            atoms.append(
                GroundedAtom(p, tuple(pool[i] for pool, i in zip(pools, indices)))
            )
            for slot in range(len(pools) - 1, -1, -1):
                indices[slot] += 1
                if indices[slot] < len(pools[slot]):
                    break
                indices[slot] = 0
            else:
                break
    return atoms


def grounded_vocabulary(sig: Signature, cap: int = DEFAULT_ENUMERATION_CAP) -> set[str]:
    """Canonical labels of every atom the signature permits."""
    return {atom.canonical() for atom in enumerate_grounded_atoms(sig, cap=cap)}
