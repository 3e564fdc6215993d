"""The restriction engine, case by case, on hand-built inputs."""

import pytest

from cutrestrict.errors import PreconditionError
from cutrestrict.formulas import (
    And, Atom, Bot, Box, Coimp, Imp, Neg, Or, Sequent, Top,
    is_subformula, parse_formula, parse_sequent,
)
from cutrestrict.proofs import (
    Proof, check_proof, cut_star, dualize_proof, expand_axiom, graft,
    is_locally_analytic, rule_node, weaken,
)
from cutrestrict.restriction import (
    RestrictionReport, principal_reduce, restrict_all, restrict_bottom_cut,
)
from cutrestrict.rules import BIINT, S5

p, q, r, s = Atom("p"), Atom("q"), Atom("r"), Atom("s")
S = parse_sequent
F = parse_formula


def init(calc, text, ai=None, si=None):
    seq = S(text)
    if ai is None:
        ai, si = next((i, j) for i, f in enumerate(seq.ant)
                      for j, g in enumerate(seq.suc)
                      if f == g and isinstance(f, Atom))
    return Proof(rule_node(calc, "init", seq, (("a", ai), ("s", si)), []))


def make_cut(calc, concl, left, right, cutf):
    return Proof(rule_node(calc, "cut", S(concl) if isinstance(concl, str) else concl,
                           (), [left, right], cutf=cutf))


def graft_proof(proof, text):
    return Proof(graft(proof, parse_sequent(text)))


def assert_restricted(calc, proof, expect_end=None):
    before = proof.sequent
    out, report = restrict_bottom_cut(calc, proof)
    audit = check_proof(calc, out)
    assert audit.locally_analytic
    assert out.sequent == (expect_end or before)
    return out, report


def top_case_proof():
    left = Proof(rule_node(BIINT, "top_R", S("p |- T, p"), (("s", 0),), []))
    inner = init(BIINT, "p |- p")
    right = Proof(rule_node(BIINT, "top_L", S("p, T |- p"), (("a", 1),), [inner]))
    return make_cut(BIINT, "p |- p", left, right, Top())


class TestTopBotAtomic:
    def test_top_case_collapses_to_init(self):
        out, report = assert_restricted(BIINT, top_case_proof())
        assert out.root.rule == "init"
        assert check_proof(BIINT, out).cuts == []

    def test_bot_case_via_duality(self):
        left = Proof(rule_node(BIINT, "bot_R", S("p |- F, p"), (("s", 0),),
                               [init(BIINT, "p |- p")]))
        right = Proof(rule_node(BIINT, "bot_L", S("p, F |- p"), (("a", 1),), []))
        proof = make_cut(BIINT, "p |- p", left, right, Bot())
        out, _ = assert_restricted(BIINT, proof)
        assert check_proof(BIINT, out).cuts == []

    def test_bot_case_s5_direct(self):
        left = Proof(rule_node(S5, "bot_R", S("p |- F, p"), (("s", 0),),
                               [init(S5, "p |- p")]))
        right = Proof(rule_node(S5, "bot_L", S("p, F |- p"), (("a", 1),), []))
        proof = make_cut(S5, "p |- p", left, right, Bot())
        out, _ = assert_restricted(S5, proof)
        assert check_proof(S5, out).cuts == []

    def test_atomic_case(self):
        proof = make_cut(BIINT, "p |- p",
                         init(BIINT, "p |- q, p", 0, 1),
                         init(BIINT, "p, q |- p", 0, 0), q)
        out, _ = assert_restricted(BIINT, proof)
        audit = check_proof(BIINT, out)
        for _, f, analytic in audit.cuts:
            assert analytic and f == p

    def test_atomic_case_constant_target(self):
        # endsequent 'T |- T': only a constant is available as the target
        proof = make_cut(BIINT, "T |- T",
                         Proof(rule_node(BIINT, "top_R", S("T |- q, T"),
                                         (("s", 1),), [])),
                         Proof(rule_node(BIINT, "top_R", S("T, q |- T"),
                                         (("s", 0),), [])), q)
        out, _ = assert_restricted(BIINT, proof)
        assert is_locally_analytic(out)

    def test_precondition_analytic_cut_rejected(self):
        proof = make_cut(BIINT, "p |- p",
                         init(BIINT, "p |- p, p"), init(BIINT, "p, p |- p"), p)
        with pytest.raises(PreconditionError):
            restrict_bottom_cut(BIINT, proof)


class TestAndOr:
    def spec_and_proof(self):
        # cut on p & q over 'p, q |- p'
        l1 = init(BIINT, "p, q |- p, p")
        l2 = init(BIINT, "p, q |- q, p", 1, 0)
        left = Proof(rule_node(BIINT, "and_R", S("p, q |- p & q, p"),
                               (("s", 0),), [l1, l2]))
        right = init(BIINT, "p, q, p & q |- p", 0, 0)
        return make_cut(BIINT, "p, q |- p", left, right, And(p, q))

    def test_and_case(self):
        out, report = assert_restricted(BIINT, self.spec_and_proof())
        audit = check_proof(BIINT, out)
        assert {f for _, f, _ in audit.cuts} <= {p, q}
        assert all(analytic for _, _, analytic in audit.cuts)

    def test_or_case(self):
        c = Or(p, q)
        inner = init(BIINT, "p, q |- p, q, p")
        left = Proof(rule_node(BIINT, "or_R", S("p, q |- p | q, p"),
                               (("s", 0),), [inner]))
        r1 = init(BIINT, "p, q, p |- p", 0, 0)
        r2 = init(BIINT, "p, q, q |- p", 0, 0)
        right = Proof(rule_node(BIINT, "or_L", S("p, q, p | q |- p"),
                                (("a", 2),), [r1, r2]))
        proof = make_cut(BIINT, "p, q |- p", left, right, c)
        out, _ = assert_restricted(BIINT, proof)
        assert is_locally_analytic(out)

    def test_and_case_weakened_only(self):
        c = And(Imp(p, q), r)
        left = weaken(BIINT, init(BIINT, "p |- p"), [], [c])
        right = weaken(BIINT, init(BIINT, "p |- p"), [c], [])
        proof = make_cut(BIINT, "p |- p", left, right, c)
        out, _ = assert_restricted(BIINT, proof)
        assert check_proof(BIINT, out).cuts == []


def imp_two_criticals_proof():
    """Cut on s -> s over 'p | q |- p | q' with two imp_R criticals
    (one per or_L branch, critical antecedents {p} and {q})."""
    c = Imp(s, s)
    b1 = Proof(rule_node(BIINT, "imp_R", S("p |- s -> s, p | q"), (("s", 0),),
                         [init(BIINT, "p, s |- s", 1, 0)]))
    b2 = Proof(rule_node(BIINT, "imp_R", S("q |- s -> s, p | q"), (("s", 0),),
                         [init(BIINT, "q, s |- s", 1, 0)]))
    d1 = Proof(rule_node(BIINT, "or_L", S("p | q |- s -> s, p | q"),
                         (("a", 0),), [b1, b2]))
    r1_inner_p = init(BIINT, "p, s -> s |- s, p, q", 0, 1)
    r1_inner_q = init(BIINT, "q, s -> s |- s, p, q", 0, 2)
    r1_or = Proof(rule_node(BIINT, "or_L", S("p | q, s -> s |- s, p, q"),
                            (("a", 0),), [r1_inner_p, r1_inner_q]))
    r1 = Proof(rule_node(BIINT, "or_R", S("p | q, s -> s |- s, p | q"),
                         (("s", 1),), [r1_or]))
    r2_inner_p = init(BIINT, "p, s -> s, s |- p, q", 0, 0)
    r2_inner_q = init(BIINT, "q, s -> s, s |- p, q", 0, 1)
    r2_or = Proof(rule_node(BIINT, "or_L", S("p | q, s -> s, s |- p, q"),
                            (("a", 0),), [r2_inner_p, r2_inner_q]))
    r2 = Proof(rule_node(BIINT, "or_R", S("p | q, s -> s, s |- p | q"),
                         (("s", 0),), [r2_or]))
    d2 = Proof(rule_node(BIINT, "imp_L", S("p | q, s -> s |- p | q"),
                         (("a", 1),), [r1, r2]))
    return make_cut(BIINT, "p | q |- p | q", d1, d2, c)


class TestArrowCases:
    def test_imp_two_criticals(self):
        proof = imp_two_criticals_proof()
        out, report = assert_restricted(BIINT, proof)
        assert report.criticals_delta1 == 2
        assert report.tuples_expanded >= 1
        end = out.sequent.formulas()
        for n in out.cut_nodes():
            assert is_subformula(n.inst.cut_formula(), end)

    def test_imp_weakened_both_sides(self):
        c = Imp(s, s)
        left = weaken(BIINT, init(BIINT, "p |- p"), [], [c])
        right = weaken(BIINT, init(BIINT, "p |- p"), [c], [])
        proof = make_cut(BIINT, "p |- p", left, right, c)
        out, _ = assert_restricted(BIINT, proof)
        assert check_proof(BIINT, out).cuts == []

    def test_coimp_case_via_duality(self):
        c = Coimp(s, s)
        d1 = weaken(BIINT, init(BIINT, "p |- p, q", 0, 0), [], [c])
        inner = weaken(BIINT, init(BIINT, "s |- s"), [], [q, p])
        d2 = Proof(rule_node(BIINT, "coimp_L", S("p, s -< s |- p, q"),
                             (("a", 1),),
                             [graft(inner, S("s |- s, p, q"))]))
        proof = make_cut(BIINT, "p |- p, q",
                         graft_proof(d1, "p |- s -< s, p, q"), d2, c)
        out, _ = assert_restricted(BIINT, proof)
        assert is_locally_analytic(out)

    def test_measure_decrease_reported(self):
        proof = imp_two_criticals_proof()
        out, report = restrict_bottom_cut(BIINT, proof)
        assert report.max_recursion_depth <= 3  # size(s -> s) = 3
        assert report.recursive_invocations >= 1


class TestS5Cases:
    def test_neg_case(self):
        c = Neg(p)
        d1 = Proof(rule_node(S5, "neg_R", S("q |- ~p, q"), (("s", 0),),
                             [init(S5, "q, p |- q", 0, 0)]))
        d2 = Proof(rule_node(S5, "neg_L", S("q, ~p |- q"), (("a", 1),),
                             [init(S5, "q |- p, q", 0, 1)]))
        proof = make_cut(S5, "q |- q", d1, d2, c)
        out, _ = assert_restricted(S5, proof)
        assert is_locally_analytic(out)

    def test_box_case(self):
        """Cut on [](p & p) over '[]p |- p': one Five critical with critical
        antecedent {[]p} and one T critical; the restricted proof cuts on
        []p and on subformulas of p & p only."""
        cc = Box(And(p, p))
        five = Proof(rule_node(
            S5, "5", S("[]p |- [](p & p)"), (("s", 0),),
            [Proof(rule_node(S5, "T", S("[]p |- p & p"), (("a", 0),),
                             [Proof(rule_node(S5, "and_R", S("p |- p & p"),
                                              (("s", 0),),
                                              [init(S5, "p |- p"),
                                               init(S5, "p |- p")]))]))]))
        t_use = Proof(rule_node(
            S5, "T", S("[]p, [](p & p) |- p"), (("a", 1),),
            [Proof(rule_node(S5, "and_L", S("[]p, p & p |- p"), (("a", 1),),
                             [Proof(rule_node(S5, "T", S("[]p, p, p |- p"),
                                              (("a", 0),),
                                              [init(S5, "p, p, p |- p")]))]))]))
        proof = make_cut(S5, "[]p |- p",
                         graft_proof(weaken(S5, five, [], [p]),
                                     "[]p |- [](p & p), p"),
                         t_use, cc)
        out, report = assert_restricted(S5, proof)
        end = out.sequent.formulas()
        for n in out.cut_nodes():
            assert is_subformula(n.inst.cut_formula(), end)
        assert report.criticals_delta1 >= 1 and report.criticals_delta2 >= 1

    def test_box_weakened_both_sides(self):
        c = Box(Neg(Box(p)))
        left = weaken(S5, init(S5, "q |- q"), [], [c])
        right = weaken(S5, init(S5, "q |- q"), [c], [])
        proof = make_cut(S5, "q |- q", left, right, c)
        out, _ = assert_restricted(S5, proof)
        assert check_proof(S5, out).cuts == []


class TestRestrictAll:
    def test_fixed_point_on_locally_analytic(self):
        proof = init(BIINT, "p |- p")
        out, report = restrict_all(BIINT, proof)
        assert out.sequent == proof.sequent
        assert report.cuts_after == 0

    def test_stacked_cuts(self):
        # T-cut above a q-cut, over 'p |- p'
        top = top_case_proof()
        left = Proof(rule_node(BIINT, "w_R", S("p |- q, p"), (("s", 0),), [top]))
        right = init(BIINT, "p, q |- p", 0, 0)
        proof = make_cut(BIINT, "p |- p", left, right, q)
        out, report = restrict_all(BIINT, proof)
        assert check_proof(BIINT, out).locally_analytic
        assert report.recursive_invocations >= 2
        end = out.sequent.formulas()
        for n in out.cut_nodes():
            assert is_subformula(n.inst.cut_formula(), end)


class TestPrincipalReduce:
    def test_coimp_paper_figure(self):
        c = Coimp(p, q)
        left = Proof(rule_node(
            BIINT, "coimp_R", S("p |- p -< q, p"), (("s", 0),),
            [init(BIINT, "p |- p, p -< q, p"),
             init(BIINT, "p, q |- p -< q, p", 0, 1)]))
        right = Proof(rule_node(BIINT, "coimp_L", S("p -< q |- p"), (("a", 0),),
                                [init(BIINT, "p |- q, p", 0, 1)]))
        out = principal_reduce(BIINT, left, right, c)
        check_proof(BIINT, out)
        for n in out.cut_nodes():
            assert n.inst.cut_formula() in {p, q}

    def test_imp_splice(self):
        c = Imp(p, q)
        left = Proof(rule_node(BIINT, "imp_R", S("q |- p -> q"), (("s", 0),),
                               [init(BIINT, "q, p |- q", 0, 0)]))
        right = Proof(rule_node(
            BIINT, "imp_L", S("r, p -> q |- r"), (("a", 1),),
            [init(BIINT, "r, p -> q |- p, r", 0, 1),
             init(BIINT, "r, p -> q, q |- r", 0, 0)]))
        out = principal_reduce(BIINT, left, right, c)
        check_proof(BIINT, out)
        for n in out.cut_nodes():
            assert n.inst.cut_formula() in {p, q}

    def test_box_reduce(self):
        left = Proof(rule_node(S5, "5", S("[]p |- []p"), (("s", 0),),
                               [Proof(rule_node(S5, "T", S("[]p |- p"),
                                                (("a", 0),),
                                                [init(S5, "p |- p")]))]))
        right = Proof(rule_node(S5, "T", S("s, []p |- s"), (("a", 1),),
                                [init(S5, "s, p |- s", 0, 0)]))
        out = principal_reduce(S5, left, right, Box(p))
        check_proof(S5, out)
        for n in out.cut_nodes():
            assert n.inst.cut_formula() == p

    def test_and_reduce(self):
        left = Proof(rule_node(BIINT, "and_R", S("p, q |- p & q"), (("s", 0),),
                               [init(BIINT, "p, q |- p", 0, 0),
                                init(BIINT, "p, q |- q", 1, 0)]))
        right = Proof(rule_node(BIINT, "and_L", S("p & q |- q"), (("a", 0),),
                                [init(BIINT, "p, q |- q", 1, 0)]))
        out = principal_reduce(BIINT, left, right, And(p, q))
        check_proof(BIINT, out)
        for n in out.cut_nodes():
            assert n.inst.cut_formula() in {p, q}
