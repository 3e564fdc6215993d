"""Syntax layer: parsing, printing, subformulas, duality."""

import pytest
from hypothesis import given, strategies as st

from cutrestrict.errors import FormulaSyntaxError, SignatureError
from cutrestrict.formulas import (
    And, Atom, Bot, Box, Coimp, Imp, Neg, Or, Sequent, Top,
    dualize, dualize_sequent, format_formula, format_sequent, is_subformula,
    multiset_eq, parse_formula, parse_sequent, proper_subformulas, size,
    subformulas,
)

p, q, r = Atom("p"), Atom("q"), Atom("r")


def biint_formulas(max_leaves=6):
    leaves = st.sampled_from([p, q, r, Top(), Bot()])
    return st.recursive(
        leaves,
        lambda inner: st.builds(And, inner, inner) | st.builds(Or, inner, inner)
        | st.builds(Imp, inner, inner) | st.builds(Coimp, inner, inner),
        max_leaves=max_leaves)


def any_formulas(max_leaves=6):
    leaves = st.sampled_from([p, q, r, Top(), Bot()])
    return st.recursive(
        leaves,
        lambda inner: st.builds(And, inner, inner) | st.builds(Or, inner, inner)
        | st.builds(Imp, inner, inner) | st.builds(Coimp, inner, inner)
        | st.builds(Neg, inner) | st.builds(Box, inner),
        max_leaves=max_leaves)


class TestParse:
    def test_imp(self):
        assert parse_formula("p -> q") == Imp(p, q)

    def test_coimp_of_conjunction(self):
        assert parse_formula("(p & q) -< r") == Coimp(And(p, q), r)

    def test_right_associative(self):
        assert parse_formula("p -> q -> r") == Imp(p, Imp(q, r))
        assert parse_formula("p -< q -< r") == Coimp(p, Coimp(q, r))

    def test_precedence(self):
        assert parse_formula("~p & q | r -> p") == \
            Imp(Or(And(Neg(p), q), r), p)
        assert parse_formula("[]~p") == Box(Neg(p))

    def test_constants(self):
        assert parse_formula("T & F") == And(Top(), Bot())

    def test_mixing_arrows_rejected(self):
        with pytest.raises(FormulaSyntaxError):
            parse_formula("p -> q -< r")

    def test_errors(self):
        for bad in ["", "(p", "p &", "p @ q", "P"]:
            with pytest.raises(FormulaSyntaxError):
                parse_formula(bad)

    def test_sequent(self):
        s = parse_sequent("p, p -> q |- q")
        assert s == Sequent((p, Imp(p, q)), (q,))
        assert parse_sequent("|- p") == Sequent((), (p,))
        assert parse_sequent("p |-") == Sequent((p,), ())
        assert parse_sequent("|-") == Sequent((), ())


class TestPrint:
    def test_examples(self):
        assert format_formula(Imp(p, q)) == "p -> q"
        assert format_sequent(Sequent((p, Imp(p, q)), (q,))) == "p, p -> q |- q"
        assert format_formula(Box(Neg(p))) == "[]~p"

    @given(any_formulas())
    def test_roundtrip(self, f):
        assert parse_formula(format_formula(f)) == f

    @given(st.lists(any_formulas(3), max_size=3), st.lists(any_formulas(3), max_size=3))
    def test_sequent_roundtrip(self, ant, suc):
        s = Sequent(tuple(ant), tuple(suc))
        assert parse_sequent(format_sequent(s)) == s


class TestSubformulas:
    def test_examples(self):
        assert subformulas(Imp(p, q)) == {p, q, Imp(p, q)}
        assert proper_subformulas(p) == frozenset()
        assert not is_subformula(And(p, q), [p, q, Atom("r")])
        assert is_subformula(q, [Imp(p, q)])

    @given(any_formulas())
    def test_properties(self, f):
        subs = subformulas(f)
        assert f in subs
        assert proper_subformulas(f) == subs - {f}
        assert len(subs) <= size(f)
        for g in subs:
            assert subformulas(g) <= subs


class TestDualize:
    def test_examples(self):
        assert dualize(Imp(p, q)) == Coimp(q, p)
        assert dualize(p) == p
        assert dualize(Coimp(And(p, q), r)) == Imp(r, Or(p, q))
        assert dualize(Top()) == Bot()

    def test_signature_error(self):
        with pytest.raises(SignatureError):
            dualize(Box(p))
        with pytest.raises(SignatureError):
            dualize(Neg(p))

    @given(biint_formulas())
    def test_involution(self, f):
        assert dualize(dualize(f)) == f

    @given(st.lists(biint_formulas(3), max_size=3), st.lists(biint_formulas(3), max_size=3))
    def test_sequent_involution(self, ant, suc):
        s = Sequent(tuple(ant), tuple(suc))
        assert dualize_sequent(dualize_sequent(s)) == s
        assert multiset_eq(s, s)
