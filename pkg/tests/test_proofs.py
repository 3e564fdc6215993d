"""Proof trees: checking, macros, axiom expansion, dualization, round-trips."""

import itertools
import random

import pytest

from cutrestrict.errors import InvalidProofError, PreconditionError
from cutrestrict.formulas import (
    And, Atom, Bot, Box, Coimp, Imp, Neg, Or, Sequent, Top, dualize_sequent,
    parse_formula, parse_sequent, size,
)
from cutrestrict.proofs import (
    Proof, check_proof, contract_macro, cut_star, dualize_proof, expand_axiom,
    graft, is_locally_analytic, reorder_endsequent, rule_node, weaken,
)
from cutrestrict.proofio import (
    format_proof, parse_proof, proof_from_json, proof_to_json,
)
from cutrestrict.rules import BIINT, S5

p, q, r = Atom("p"), Atom("q"), Atom("r")
S = parse_sequent


def init(calc, text, ai=None, si=None):
    seq = S(text)
    if ai is None:
        ai, si = next((i, j) for i, f in enumerate(seq.ant)
                      for j, g in enumerate(seq.suc)
                      if f == g and isinstance(f, Atom))
    return Proof(rule_node(calc, "init", seq, (("a", ai), ("s", si)), []))


def top_case_proof():
    """Cut on T over 'p |- p': left premise a top_R axiom, right a top_L."""
    left = Proof(rule_node(BIINT, "top_R", S("p |- T, p"), (("s", 0),), []))
    inner = init(BIINT, "p |- p")
    right = Proof(rule_node(BIINT, "top_L", S("p, T |- p"), (("a", 1),), [inner]))
    root = rule_node(BIINT, "cut", S("p |- p"), (),
                     [left, Proof(graft(right, S("p, T |- p")))], cutf=Top())
    return Proof(root)


class TestCheck:
    def test_single_init(self):
        audit = check_proof(BIINT, init(BIINT, "p |- p"))
        assert audit.cuts == [] and audit.height == 1

    def test_top_case(self):
        proof = top_case_proof()
        audit = check_proof(BIINT, proof)
        assert len(audit.cuts) == 1
        assert audit.nonanalytic_formulas == [Top()]
        assert not audit.locally_analytic

    def test_bad_imp_r_detected(self):
        # hand-build an imp_R whose premise has succedent context
        with pytest.raises(InvalidProofError):
            rule_node(BIINT, "imp_R", S("p |- p -> q, r"),
                      (("s", 0),), [init(BIINT, "p, p |- q, r", 0, 0)])

    def test_coimp_principal_reduction_figure(self):
        # cut on p over (p |- p), right premise built by an inner cut on q
        inner = cut_star(BIINT, init(BIINT, "p |- q, p", 0, 1),
                         init(BIINT, "p, q |- p"), q)
        outer = cut_star(BIINT, init(BIINT, "p |- p, p"), inner, p)
        audit = check_proof(BIINT, outer)
        assert len(audit.cuts) == 2

    def test_is_locally_analytic(self):
        assert is_locally_analytic(init(BIINT, "p |- p"))
        analytic_cut = cut_star(BIINT, init(BIINT, "p |- p, p", 0, 0),
                                init(BIINT, "p, p |- p", 0, 0), p)
        assert analytic_cut.sequent == S("p |- p")
        assert is_locally_analytic(analytic_cut)
        assert not is_locally_analytic(top_case_proof())


class TestMacros:
    def test_weaken(self):
        out = weaken(BIINT, init(BIINT, "p |- p"), [q], [])
        assert out.sequent == S("q, p |- p")
        assert out.root.rule == "w_L"
        check_proof(BIINT, out)

    def test_cut_star_contexts(self):
        # cut* aligns contexts by weakening both sides to their max-union
        out = cut_star(BIINT, init(BIINT, "p |- r, p", 0, 1),
                       init(BIINT, "s, r |- s", 0, 0), r)
        assert out.sequent == S("p, s |- p, s")
        audit = check_proof(BIINT, out)
        assert len(audit.cuts) == 1

    def test_contract_macro(self):
        wide = weaken(BIINT, init(BIINT, "p |- p"), [p], [])
        out = contract_macro(BIINT, wide, [p], [])
        assert out.sequent == S("p |- p")
        check_proof(BIINT, out)

    def test_reorder(self):
        proof = init(BIINT, "q, p |- p")
        out = reorder_endsequent(proof, S("p, q |- p"))
        assert out.sequent == S("p, q |- p")
        check_proof(BIINT, out)
        with pytest.raises(PreconditionError):
            reorder_endsequent(proof, S("p |- p"))


def biint_formulas_upto(n, atoms):
    """All BiInt formulas of size <= n over the given atoms and constants."""
    leaves = [Atom(a) for a in atoms] + [Top(), Bot()]
    by_size = {1: list(leaves)}
    for s in range(2, n + 1):
        acc = []
        for ls in range(1, s - 1):
            rs = s - 1 - ls
            for a in by_size.get(ls, ()):
                for b in by_size.get(rs, ()):
                    acc += [And(a, b), Or(a, b), Imp(a, b), Coimp(a, b)]
        by_size[s] = acc
    return [f for s in range(1, n + 1) for f in by_size[s]]


def s5_formulas_upto(n, atoms):
    leaves = [Atom(a) for a in atoms] + [Top(), Bot()]
    by_size = {1: list(leaves)}
    for s in range(2, n + 1):
        acc = [ctor(a) for ctor in (Neg, Box) for a in by_size.get(s - 1, ())]
        for ls in range(1, s - 1):
            rs = s - 1 - ls
            for a in by_size.get(ls, ()):
                for b in by_size.get(rs, ()):
                    acc += [And(a, b), Or(a, b)]
        by_size[s] = acc
    return [f for s in range(1, n + 1) for f in by_size[s]]


class TestExpandAxiom:
    def test_atom(self):
        out = expand_axiom(BIINT, [], p, [])
        assert out.root.rule == "init" and out.height() == 1

    def test_imp_shape(self):
        out = expand_axiom(BIINT, [], Imp(p, q), [])
        assert out.sequent == S("p -> q |- p -> q")
        audit = check_proof(BIINT, out)
        assert audit.cuts == []
        assert out.root.rule == "imp_R"
        assert out.root.children[0].rule == "imp_L"

    def test_s5_box(self):
        out = expand_axiom(S5, [], Box(p), [])
        assert out.sequent == S("[]p |- []p")
        assert out.root.rule == "5"
        assert out.root.children[0].rule == "T"
        check_proof(S5, out)

    def test_with_contexts(self):
        out = expand_axiom(BIINT, [q], Coimp(p, q), [r])
        assert out.sequent == S("q, p -< q |- p -< q, r")
        assert check_proof(BIINT, out).cuts == []
        out = expand_axiom(S5, [q], Box(Neg(p)), [Box(q)])
        assert out.sequent == S("q, []~p |- []~p, []q")
        assert check_proof(S5, out).cuts == []

    def test_exhaustive_small(self):
        for f in biint_formulas_upto(5, ["p", "q"]):
            out = expand_axiom(BIINT, [], f, [])
            audit = check_proof(BIINT, out)
            assert audit.cuts == []
            assert audit.height <= 2 * size(f) + 1
        for f in s5_formulas_upto(4, ["p", "q"]):
            out = expand_axiom(S5, [], f, [])
            audit = check_proof(S5, out)
            assert audit.cuts == []
            assert audit.height <= 2 * size(f) + 1


class TestDualize:
    def test_init_fixed(self):
        out = dualize_proof(init(BIINT, "p |- p"))
        assert out.sequent == S("p |- p")
        check_proof(BIINT, out)

    def test_imp_r_becomes_coimp_l(self):
        proof = expand_axiom(BIINT, [], Imp(p, q), [])
        out = dualize_proof(proof)
        assert out.root.rule == "coimp_L"
        assert out.sequent == dualize_sequent(proof.sequent)
        check_proof(BIINT, out)

    def test_involution_and_cut_preservation(self):
        rng = random.Random(3)
        from genlib import random_formula
        for _ in range(30):
            f = random_formula(rng, BIINT, 2)
            base = expand_axiom(BIINT, [q], f, [r])
            proof = cut_star(BIINT, weaken(BIINT, base, [], [p]),
                             init(BIINT, "p, q |- p, r", 0, 0), p)
            audit = check_proof(BIINT, proof)
            d1 = dualize_proof(proof)
            daudit = check_proof(BIINT, d1)
            assert d1.sequent == dualize_sequent(proof.sequent)
            assert len(daudit.cuts) == len(audit.cuts)
            assert sorted(a for _, _, a in daudit.cuts) == \
                sorted(a for _, _, a in audit.cuts)
            d2 = dualize_proof(d1)
            assert format_proof(BIINT, d2) == format_proof(BIINT, proof)


class TestRoundTrip:
    def test_text(self):
        proof = top_case_proof()
        text = format_proof(BIINT, proof)
        calc, back = parse_proof(text)
        assert calc == BIINT
        check_proof(calc, back)
        assert format_proof(calc, back) == text

    def test_text_s5(self):
        proof = expand_axiom(S5, [Box(q)], Box(And(p, Neg(q))), [])
        text = format_proof(S5, proof)
        calc, back = parse_proof(text)
        assert calc == S5
        check_proof(calc, back)
        assert format_proof(calc, back) == text

    def test_json(self):
        proof = top_case_proof()
        blob = proof_to_json(BIINT, proof)
        calc, back = proof_from_json(blob)
        check_proof(calc, back)
        assert format_proof(calc, back) == format_proof(BIINT, proof)
