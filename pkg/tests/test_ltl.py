import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ginsign.errors import (
    LtlSyntaxError,
    MissingMappingError,
    MixedAtomKindsError,
)
from ginsign.ltl import (
    Always,
    And,
    Atom,
    Eventually,
    GroundingMap,
    Implies,
    Next,
    Not,
    Or,
    Trace,
    Until,
    apply_grounding,
    atom_kinds,
    eval_on_trace,
    extract_atoms,
    formula_size,
    operator_skeleton,
    parse_ltl,
    print_ltl,
)

# ------------------------------------------------------------------- parsing


def test_parse_ascii_operators():
    f = parse_ltl("F prop_1 & G ! prop_2")
    assert f == And(Eventually(Atom("prop_1")), Always(Not(Atom("prop_2"))))


def test_parse_unicode_aliases():
    ascii_form = parse_ltl("F (p -> X q) & G ! r | p U q")
    unicode_form = parse_ltl("◇ (p → ○ q) ∧ □ ¬ r ∨ p U q")
    assert ascii_form == unicode_form


def test_implication_is_right_associative():
    assert parse_ltl("p -> q -> r") == parse_ltl("p -> (q -> r)")


def test_until_is_right_associative_and_binds_tighter_than_and():
    assert parse_ltl("p U q U r") == parse_ltl("p U (q U r)")
    assert parse_ltl("p U q & r") == And(Until(Atom("p"), Atom("q")), Atom("r"))


def test_precedence_chain():
    f = parse_ltl("p & q | r -> s")
    assert f == Implies(Or(And(Atom("p"), Atom("q")), Atom("r")), Atom("s"))


def test_unary_operators_stack():
    assert parse_ltl("G F ! p") == Always(Eventually(Not(Atom("p"))))


def test_grounded_atom_labels_parse():
    f = parse_ltl("F deliver(backpack, loading_dock)")
    assert extract_atoms(f) == {"deliver(backpack,loading_dock)"}
    assert atom_kinds(f) == {"grounded"}


def test_placeholder_atoms_are_lifted():
    assert atom_kinds(parse_ltl("F prop_1")) == {"lifted"}


def test_mixed_atom_kinds_rejected():
    with pytest.raises(MixedAtomKindsError):
        parse_ltl("prop_1 & deliver(backpack,loading_dock)")


def test_syntax_error_carries_position():
    with pytest.raises(LtlSyntaxError) as err:
        parse_ltl("F (p")
    assert err.value.position is not None


def test_unterminated_atom_args():
    with pytest.raises(LtlSyntaxError):
        parse_ltl("deliver(backpack")


def test_stray_token_rejected():
    with pytest.raises(LtlSyntaxError):
        parse_ltl("p q")


def test_empty_input_rejected():
    with pytest.raises(LtlSyntaxError):
        parse_ltl("   ")


def test_word_operator_prefixed_atom_names_survive():
    # Atom names that merely start with an operator letter stay atoms.
    f = parse_ltl("Fire U Gate")
    assert extract_atoms(f) == {"Fire", "Gate"}


# ------------------------------------------------------------ printing


def test_print_canonical_form():
    assert print_ltl(parse_ltl("F prop_1 & G ! prop_2")) == "(F (prop_1)) & (G (! (prop_2)))"


def test_round_trip_spec_examples():
    for text in (
        "F prop_1",
        "G (p -> F q)",
        "p U (q U r)",
        "! (p & q) | X r",
        "F deliver(backpack,loading_dock)",
    ):
        f = parse_ltl(text)
        assert parse_ltl(print_ltl(f)) == f


_atoms = st.sampled_from(["p", "q", "r", "prop_1", "prop_2"])


def _formulas(kind):
    leaves = st.builds(Atom, st.sampled_from(["p", "q", "r"] if kind == "grounded" else ["prop_1", "prop_2"]))

    def extend(children):
        unary = st.builds(
            lambda op, c: op(c), st.sampled_from([Not, Next, Eventually, Always]), children
        )
        binary = st.builds(
            lambda op, l, r: op(l, r),
            st.sampled_from([And, Or, Implies, Until]),
            children,
            children,
        )
        return unary | binary

    return st.recursive(leaves, extend, max_leaves=12)


@settings(max_examples=200, deadline=None)
@given(_formulas("grounded"))
def test_print_parse_round_trip_property(f):
    assert parse_ltl(print_ltl(f)) == f


@settings(max_examples=100, deadline=None)
@given(_formulas("lifted"))
def test_round_trip_preserves_size_and_skeleton(f):
    g = parse_ltl(print_ltl(f))
    assert formula_size(g) == formula_size(f)
    assert operator_skeleton(g) == operator_skeleton(f)


# ------------------------------------------------------------ grounding maps


def test_apply_grounding_substitutes_atoms(pickup_toy):
    f = parse_ltl("F prop_1")
    gmap = GroundingMap.from_document({"prop_1": "pick_up(package1,roomA)"}, pickup_toy)
    grounded = apply_grounding(f, gmap)
    assert print_ltl(grounded) == "F (pick_up(package1,roomA))"
    assert atom_kinds(grounded) == {"grounded"}


def test_apply_grounding_preserves_skeleton(pickup_toy):
    f = parse_ltl("G (prop_1 -> X prop_1)")
    gmap = GroundingMap.from_document({"prop_1": "pick_up(package1,roomA)"}, pickup_toy)
    assert operator_skeleton(apply_grounding(f, gmap)) == operator_skeleton(f)


def test_apply_grounding_missing_placeholder(pickup_toy):
    f = parse_ltl("F prop_1 & G prop_2")
    gmap = GroundingMap.from_document({"prop_1": "pick_up(package1,roomA)"}, pickup_toy)
    with pytest.raises(MissingMappingError):
        apply_grounding(f, gmap)


def test_grounding_map_document_round_trip(pickup_toy):
    doc = {"prop_1": "pick_up(package1,roomA)", "prop_2": "pick_up(package1,roomA)"}
    gmap = GroundingMap.from_document(doc, pickup_toy)
    assert gmap.to_document() == doc


# ------------------------------------------------------------------ traces


def test_trace_canonical_positions():
    t = Trace.make([["p"]], [["q"], []])
    assert t.canonical_position(0) == 0
    assert t.canonical_position(1) == 1
    assert t.canonical_position(2) == 2
    assert t.canonical_position(3) == 1
    assert t.canonical_position(42) == 1 + (42 - 1) % 2


def test_trace_document_round_trip():
    doc = {"prefix": [["p"]], "loop": [["p", "q"], []]}
    t = Trace.from_document(doc)
    assert t.to_document() == doc


def test_trace_requires_nonempty_loop():
    with pytest.raises(Exception):
        Trace.make([["p"]], [])


# --------------------------------------------------------------- evaluation


def test_eval_spec_examples():
    t = Trace.make([[]], [["p"]])
    assert eval_on_trace(parse_ltl("F p"), t, 0) is True
    assert eval_on_trace(parse_ltl("G p"), t, 0) is False
    assert eval_on_trace(parse_ltl("X p"), t, 0) is True
    assert eval_on_trace(parse_ltl("G p"), t, 1) is True


def test_eval_until_semantics():
    t = Trace.make([["p"], ["p"]], [["q"]])
    assert eval_on_trace(parse_ltl("p U q"), t, 0) is True
    t2 = Trace.make([["p"]], [[]])
    assert eval_on_trace(parse_ltl("p U q"), t2, 0) is False


def test_eval_position_beyond_prefix_wraps():
    t = Trace.make([], [["p"], []])
    f = parse_ltl("p")
    assert eval_on_trace(f, t, 0) is True
    assert eval_on_trace(f, t, 1) is False
    assert eval_on_trace(f, t, 2) is True


def test_eval_alternating_fixture():
    t = Trace.load("src/ginsign/fixtures/traces/alternating.json")
    assert eval_on_trace(parse_ltl("G F q"), t, 0) is True
    assert eval_on_trace(parse_ltl("G F p"), t, 0) is True
    assert eval_on_trace(parse_ltl("G p"), t, 0) is False
