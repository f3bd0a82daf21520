"""Grounded NL-to-LTL toolkit: typed signatures, hierarchical grounding,
trace semantics, and bounded equivalence checking."""

from .equivalence import (
    ALPHABET_CAP,
    DEFAULT_BOUND,
    EquivalenceVerdict,
    F1Score,
    GleVerdict,
    ModelCheckResult,
    ap_f1,
    check_equivalence,
    check_gle,
    enumerate_traces,
    model_check,
    stage_f1,
)
from .ltl import (
    Always,
    And,
    Atom,
    Eventually,
    Formula,
    GroundingMap,
    Implies,
    KripkeStructure,
    Next,
    Not,
    Or,
    Trace,
    Until,
    apply_grounding,
    eval_on_trace,
    extract_atoms,
    formula_size,
    parse_ltl,
    print_ltl,
)
from .signature import (
    ConstantSymbol,
    GroundedAtom,
    PredicateSymbol,
    Signature,
    TypeSymbol,
    build_prefix,
    count_grounded_atoms,
    enumerate_grounded_atoms,
    grounded_vocabulary,
    load_signature,
    signature_to_document,
    validate_signature,
)

__version__ = "0.1.0"
