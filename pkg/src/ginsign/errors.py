"""Exception and warning types shared across the toolkit."""

from __future__ import annotations


class GinsignError(Exception):
    """Base class for all toolkit errors."""


class SignatureValidationError(GinsignError):
    """Raised when a signature document violates its invariants.

    Carries the full list of violations so callers can report them all
    at once instead of fixing one at a time.
    """

    def __init__(self, violations: list[str] | str):
        if isinstance(violations, str):
            violations = [violations]
        self.violations = list(violations)
        super().__init__("; ".join(self.violations))


class UnknownTypeError(SignatureValidationError):
    """A constant or predicate references a type symbol that is not declared."""


class DuplicateNameError(SignatureValidationError):
    """An identifier is declared twice within one signature namespace."""


class SizeLimitError(GinsignError):
    """A brute-force enumeration would exceed the configured cap."""


class LtlSyntaxError(GinsignError):
    """Formula text failed to parse; `position` is the 0-based offset."""

    def __init__(self, message: str, position: int):
        self.position = position
        super().__init__(f"{message} (at position {position})")


class MixedAtomKindsError(GinsignError):
    """Placeholder atoms and grounded atoms appear in the same formula."""


class MissingMappingError(GinsignError):
    """A placeholder has no entry in the grounding map."""

    def __init__(self, placeholder: str):
        self.placeholder = placeholder
        super().__init__(f"no grounding for placeholder {placeholder!r}")


class EmptyCandidateListError(GinsignError):
    """A selection step received zero candidates."""


class SlotOutOfRangeError(GinsignError):
    """An argument slot index is outside 1..arity(predicate)."""


class ScorerFailureError(GinsignError):
    """A scorer raised while scoring a window; carries the window context."""

    def __init__(self, message: str, window_index: int | None = None):
        self.window_index = window_index
        super().__init__(message)


class TransportError(GinsignError):
    """The external scorer channel failed (process died, connection refused)."""


class ProtocolViolationError(GinsignError):
    """The external scorer returned a malformed or out-of-contract response."""


class ScorerTimeoutError(GinsignError):
    """The external scorer did not answer within the configured timeout."""


class AlphabetTooLargeError(GinsignError):
    """The joint atom set exceeds the exhaustive-enumeration cap."""


class UngroundedAtomError(GinsignError):
    """A formula atom does not exist in the model's labeling alphabet."""

    def __init__(self, atom: str):
        self.atom = atom
        super().__init__(
            f"atom {atom!r} is not in the model's alphabet; the formula cannot "
            "be checked against this structure"
        )


class AlignmentMismatchError(GinsignError):
    """Predictions and gold atoms cannot be aligned by placeholder id."""


class SchemaError(GinsignError):
    """A dataset record is structurally invalid; `index` is the record number."""

    def __init__(self, message: str, index: int | None = None):
        self.index = index
        prefix = f"record {index}: " if index is not None else ""
        super().__init__(prefix + message)


class IllTypedAtomError(GinsignError):
    """A gold grounding names an atom that is not well-typed for the signature."""


class BoundTooSmallWarning(UserWarning):
    """The enumeration bound is small relative to the formulas being compared."""


class EmptySignatureSectionWarning(UserWarning):
    """A predicate needs arguments of a type for which no constant exists."""
