"""The cut-restriction engine: turns a proof ending in a non-analytic cut
(with locally analytic subproofs) into a locally analytic proof of the same
endsequent, and iterates that transformation over whole proofs.

Case analysis on the cut formula C, recursion on size(C):

  atom      global replacement by an atom or constant of the endsequent;
  T         substitute the antecedent predecessors away in the right subproof
            (top_L criticals collapse to their premise);
  F         dual (via proof dualization for BiInt, mirrored directly for S5);
  A & B     invertibility-style: substitute A / B / A,B for the predecessors,
            collapse the broken and_R / and_L criticals, combine with cuts on
            A and B;
  A | B     mirror of conjunction;
  ~A        substitute the predecessors away while threading A on the opposite
            side; broken neg criticals close by a contraction; one cut on A;
  A -> B    the three-step construction: per critical of the left subproof,
            substitute its context into the right subproof and splice with
            cuts on A and B (step 1); per choice of one context formula per
            critical, substitute the choices into the left subproof and close
            broken criticals by axiom expansion (step 2); cut the results
            together over every context formula (step 3);
  A -< B    dual of implication via proof dualization;
  []A       the implication playbook with Five/T criticals, boxed contexts on
            both sides of the trace, and single-cut splices.

Irredundance is enforced before any tracing; tameness, reductivity,
pre-soundness and the size measure are asserted mechanically on every run.
"""

from __future__ import annotations

import itertools
import json
from collections import Counter
from dataclasses import dataclass, field

from .errors import InternalCheckError, PreconditionError
from .formulas import (
    And, Atom, Bot, Box, Coimp, Formula, Imp, Neg, Or, Sequent, Top,
    is_subformula, proper_subformulas, size, subformulas,
)
from .proofs import (
    Proof, ProofNode, check_proof, contract_macro, cut_star, dualize_proof,
    expand_axiom, fresh_id, graft, max_cut_size, refresh_ids,
    reorder_endsequent, replace_subtree, rule_node, weaken_to,
)
from .rules import BIINT, S5, RuleInstance, is_analytic_cut, validate_instance
from .tracing import (
    CriticalInference, Trace, compute_trace, enforce_irredundance,
    reductivity_audit, seed_of, substitute,
)


@dataclass
class RestrictionReport:
    cuts_before: int = 0
    cuts_after: int = 0
    max_cut_size_before: int = 0
    max_cut_size_after: int = 0
    recursive_invocations: int = 0
    max_recursion_depth: int = 0
    tuples_expanded: int = 0
    criticals_delta1: int = 0
    criticals_delta2: int = 0
    assertions_checked: int = 0

    def lines(self):
        for k, v in vars(self).items():
            yield f"{k}={v}"

    def to_json(self) -> str:
        return json.dumps(vars(self), indent=1)


def _assert(report: RestrictionReport, cond: bool, what: str):
    report.assertions_checked += 1
    if not cond:
        raise InternalCheckError(what)


def _use(proof: Proof) -> Proof:
    """Fresh node ids for every graft of a memoized proof."""
    return Proof(refresh_ids(proof.root))


def _fit_to(calc: str, proof: Proof, target: Sequent) -> Proof:
    """Weaken what is missing, contract what is surplus, reorder exactly."""
    cur = proof.sequent
    need_a = Counter(target.ant) - Counter(cur.ant)
    need_s = Counter(target.suc) - Counter(cur.suc)
    if need_a or need_s:
        proof = weaken_to(calc, proof,
                          Sequent(cur.ant + tuple(need_a.elements()),
                                  cur.suc + tuple(need_s.elements())))
        cur = proof.sequent
    over_a = Counter(cur.ant) - Counter(target.ant)
    over_s = Counter(cur.suc) - Counter(target.suc)
    if over_a or over_s:
        proof = contract_macro(calc, proof, tuple(over_a.elements()),
                               tuple(over_s.elements()))
    return reorder_endsequent(proof, target)


def tameness_assert(criticals, endsequent: Sequent, cutf: Formula,
                    report: RestrictionReport, include_pi: bool = False):
    """Every critical-antecedent formula (and, for the box case, every
    critical-succedent formula) must be a subformula of the endsequent or a
    proper subformula of the cut formula.  Failure signals an engine bug."""
    allowed = set()
    for f in endsequent.formulas():
        allowed |= subformulas(f)
    allowed |= proper_subformulas(cutf)
    for r, crit in enumerate(criticals):
        pool = crit.sigma + (crit.pi if include_pi else ())
        for d in pool:
            report.assertions_checked += 1
            if d not in allowed:
                raise InternalCheckError(
                    f"tameness violated: '{d}' in critical {r} is neither a "
                    f"subformula of the endsequent nor proper in '{cutf}'")


# --- driver -------------------------------------------------------------------


def restrict_bottom_cut(calc: str, proof: Proof,
                        report: RestrictionReport | None = None):
    """Restriction of a single bottom non-analytic cut.  Preconditions: the
    proof checks, its root is a non-analytic cut, and both subproofs are
    locally analytic."""
    report = report or RestrictionReport()
    audit = check_proof(calc, proof)
    root = proof.root
    if root.rule != "cut":
        raise PreconditionError("proof does not end in a cut")
    if is_analytic_cut(root.inst):
        raise PreconditionError("the bottom cut is already analytic")
    for child in root.children:
        sub_audit = check_proof(calc, Proof(child))
        if not sub_audit.locally_analytic:
            raise PreconditionError("a subproof of the bottom cut is not "
                                    "locally analytic")
    report.cuts_before = len(audit.cuts)
    report.max_cut_size_before = max_cut_size(proof)
    out = _restrict(calc, proof, report, 1, size(root.inst.cut_formula()))
    out_audit = check_proof(calc, out)
    _assert(report, out_audit.locally_analytic, "result is not locally analytic")
    report.cuts_after = len(out_audit.cuts)
    report.max_cut_size_after = max_cut_size(out)
    return out, report


def restrict_all(calc: str, proof: Proof,
                 report: RestrictionReport | None = None):
    """Restrict every non-analytic cut, uppermost (DFS-leftmost) first, until
    the proof is locally analytic; by the subformula property of the calculi
    the result is then globally analytic, which is asserted."""
    report = report or RestrictionReport()
    audit = check_proof(calc, proof)
    report.cuts_before = len(audit.cuts)
    report.max_cut_size_before = max_cut_size(proof)
    out = proof
    while True:
        audit = check_proof(calc, out)
        bad = {nid for nid, _, ok in audit.cuts if not ok}
        if not bad:
            break
        target = None
        for n in out.nodes():  # DFS pre-order: first uppermost candidate
            if n.nid in bad:
                above = {m.nid for c in n.children for m in Proof(c).nodes()}
                if not (above & bad):
                    target = n
                    break
        _assert(report, target is not None, "no uppermost non-analytic cut")
        cutf = target.inst.cut_formula()
        fixed = _restrict(calc, Proof(target), report, 1, size(cutf))
        out = replace_subtree(out, target.nid, graft(fixed, target.sequent))
    end = out.sequent.formulas()
    for n in out.cut_nodes():
        _assert(report, is_subformula(n.inst.cut_formula(), end),
                "cut formula escapes the endsequent after restriction")
    report.cuts_after = len(check_proof(calc, out).cuts)
    report.max_cut_size_after = max_cut_size(out)
    return out, report


def _restrict(calc: str, proof: Proof, report: RestrictionReport,
              depth: int, run_size: int) -> Proof:
    """One bottom-cut restriction; `run_size` is the size of the cut formula
    the outermost invocation of this run started from."""
    report.recursive_invocations += 1
    report.max_recursion_depth = max(report.max_recursion_depth, depth)
    _assert(report, depth <= run_size, "recursion depth exceeds the cut size")
    root = proof.root
    _assert(report, root.rule == "cut", "restriction target is not a cut")
    cutf = root.inst.cut_formula()
    original_end = proof.sequent

    if isinstance(cutf, Atom):
        out = _atomic_case(calc, proof, cutf, report)
    elif isinstance(cutf, Top):
        out = _constant_case(calc, proof, report, premise=1)
    elif isinstance(cutf, Bot):
        if calc == BIINT:
            dual = dualize_proof(proof)
            out = dualize_proof(_constant_case(calc, dual, report, premise=1))
        else:
            out = _constant_case(calc, proof, report, premise=0)
    elif isinstance(cutf, And):
        out = _and_case(calc, proof, cutf, report, depth, run_size)
    elif isinstance(cutf, Or):
        out = _or_case(calc, proof, cutf, report, depth, run_size)
    elif isinstance(cutf, Neg):
        out = _neg_case(calc, proof, cutf, report, depth, run_size)
    elif isinstance(cutf, Imp):
        out = _arrow_case(calc, proof, cutf, report, depth, run_size)
    elif isinstance(cutf, Coimp):
        dual = dualize_proof(proof)
        dual_out = _arrow_case(calc, dual, dual.root.inst.cut_formula(),
                               report, depth, run_size)
        out = dualize_proof(dual_out)
    elif isinstance(cutf, Box):
        out = _arrow_case(calc, proof, cutf, report, depth, run_size)
    else:
        raise InternalCheckError(f"no restriction case for {cutf!r}")

    return reorder_endsequent(_fit_to(calc, out, original_end), original_end)


def _resolve(calc: str, proof: Proof, report: RestrictionReport,
             depth: int, run_size: int, budget: int) -> Proof:
    """Restrict every remaining non-analytic cut of a constructed proof; all
    of them must sit strictly below `budget` in the size measure."""
    while True:
        audit = check_proof(calc, proof)
        bad = {nid for nid, _, ok in audit.cuts if not ok}
        if not bad:
            return proof
        target = None
        for n in proof.nodes():
            if n.nid in bad:
                above = {m.nid for c in n.children for m in Proof(c).nodes()}
                if not (above & bad):
                    target = n
                    break
        cutf = target.inst.cut_formula()
        _assert(report, size(cutf) < budget,
                f"recursion on '{cutf}' does not shrink the cut size")
        fixed = _restrict(calc, Proof(target), report, depth + 1, run_size)
        proof = replace_subtree(proof, target.nid, graft(fixed, target.sequent))


# --- the cases ------------------------------------------------------------------


def _irredundant(calc: str, proof: Proof, cutf: Formula,
                 report: RestrictionReport):
    t1 = compute_trace(proof, seed_of(proof, 0))
    proof = enforce_irredundance(calc, proof, cutf, t1)
    t2 = compute_trace(proof, seed_of(proof, 1))
    proof = enforce_irredundance(calc, proof, cutf, t2)
    t1 = compute_trace(proof, seed_of(proof, 0))
    t2 = compute_trace(proof, seed_of(proof, 1))
    report.criticals_delta1 += len(t1.criticals)
    report.criticals_delta2 += len(t2.criticals)
    return proof, t1, t2


def _subproofs(proof: Proof):
    return Proof(proof.root.children[0]), Proof(proof.root.children[1])


def _collapse_fix(calc: str, which: int):
    def fix(rn, kids):
        return graft(Proof(kids[which]), rn.sequent)
    return fix


def _merge_fix(calc: str):
    """Close a broken single-premise critical whose premise equals the target
    up to surplus copies of threaded material: contract, then reorder."""
    def fix(rn, kids):
        child = Proof(kids[0])
        over_a = Counter(child.sequent.ant) - Counter(rn.sequent.ant)
        over_s = Counter(child.sequent.suc) - Counter(rn.sequent.suc)
        out = contract_macro(calc, child, tuple(over_a.elements()),
                             tuple(over_s.elements()))
        return graft(out, rn.sequent)
    return fix


def _atomic_case(calc: str, proof: Proof, cutf: Atom,
                 report: RestrictionReport) -> Proof:
    """Globally replace the atomic cut formula by an atom or constant that
    occurs in the endsequent; repair init leaves that named it."""
    end = proof.sequent
    _assert(report, not is_subformula(cutf, end.formulas()),
            "atomic case invoked on an analytic cut")
    occurring = set()
    for f in end.formulas():
        occurring |= subformulas(f)
    atoms = sorted((g.name for g in occurring if isinstance(g, Atom)))
    if atoms:
        target: Formula = Atom(atoms[0])
    elif Top() in occurring and (Bot() not in occurring or end.suc):
        target = Top()
    elif Bot() in occurring:
        target = Bot()
    else:
        raise InternalCheckError("endsequent carries no atom or constant")

    subst_cache: dict[Formula, Formula] = {}

    def subst(f: Formula) -> Formula:
        got = subst_cache.get(f)
        if got is None:
            if f == cutf:
                got = target
            elif isinstance(f, (And, Or, Imp, Coimp)):
                got = type(f)(subst(f.left), subst(f.right))
            elif isinstance(f, (Neg, Box)):
                got = type(f)(subst(f.arg))
            else:
                got = f
            subst_cache[f] = got
        return got

    def subst_seq(s: Sequent) -> Sequent:
        return Sequent(tuple(subst(f) for f in s.ant),
                       tuple(subst(f) for f in s.suc))

    def walk(n: ProofNode) -> ProofNode:
        inst = n.inst
        new_concl = subst_seq(inst.conclusion)
        if n.rule == "init" and inst.principal_formula() == cutf \
                and not isinstance(target, Atom):
            ant_pos, suc_pos = inst.principal
            if ant_pos[0] != "a":
                ant_pos, suc_pos = suc_pos, ant_pos
            if isinstance(target, Top):
                return rule_node(calc, "top_R", new_concl, (suc_pos,), [])
            return rule_node(calc, "bot_L", new_concl, (ant_pos,), [])
        inst2 = RuleInstance(inst.rule, new_concl,
                             tuple(subst_seq(s) for s in inst.premises),
                             inst.principal, inst.active, inst.flow)
        diag = validate_instance(calc, inst2)
        if diag is not None:
            raise InternalCheckError(f"atomic replacement broke {n.rule}: {diag}")
        return ProofNode(fresh_id(), inst2, tuple(walk(c) for c in n.children))

    out = Proof(walk(proof.root))
    _assert(report, out.sequent == end, "atomic case changed the endsequent")
    return out


def _constant_case(calc: str, proof: Proof, report: RestrictionReport,
                   premise: int) -> Proof:
    """Cut on T (premise=1: substitute in the right subproof, top_L criticals
    collapse) or on F (premise=0, dually with bot_R criticals)."""
    cutf = proof.root.inst.cut_formula()
    proof, t1, t2 = _irredundant(calc, proof, cutf, report)
    t = t2 if premise == 1 else t1
    wanted = "top_L" if premise == 1 else "bot_R"
    _assert(report, all(c.rule == wanted for c in t.criticals),
            f"unexpected critical rules in the {cutf} case")
    branch = Proof(proof.root.children[premise])
    sub = substitute(calc, branch, t, ())
    leftovers = reductivity_audit(branch, sub)
    _assert(report, not leftovers, "constants admit no proper subformulas")
    return sub.repair(calc, _collapse_fix(calc, 0))


def _and_case(calc, proof, cutf: And, report, depth, run_size) -> Proof:
    a, b = cutf.left, cutf.right
    proof, t1, t2 = _irredundant(calc, proof, cutf, report)
    _assert(report, all(c.rule == "and_R" for c in t1.criticals),
            "left-premise criticals must introduce the conjunction")
    _assert(report, all(c.rule == "and_L" for c in t2.criticals),
            "right-premise criticals must decompose the conjunction")
    d1, d2 = _subproofs(proof)

    def collapsed(branch, t, repl, which):
        sub = substitute(calc, branch, t, repl)
        reductivity_audit(branch, sub)
        return sub.repair(calc, _collapse_fix(calc, which))

    p1a = collapsed(d1, t1, (a,), 0)          # |- A side of each and_R
    p1b = collapsed(d1, t1, (b,), 1)          # |- B side
    p2ab = collapsed(d2, t2, (a, b), 0)       # A, B |- side of each and_L
    inner = cut_star(calc, p1b, p2ab, b)
    outer = cut_star(calc, p1a, inner, a)
    return _resolve(calc, outer, report, depth, run_size, size(cutf))


def _or_case(calc, proof, cutf: Or, report, depth, run_size) -> Proof:
    a, b = cutf.left, cutf.right
    proof, t1, t2 = _irredundant(calc, proof, cutf, report)
    _assert(report, all(c.rule == "or_R" for c in t1.criticals),
            "left-premise criticals must introduce the disjunction")
    _assert(report, all(c.rule == "or_L" for c in t2.criticals),
            "right-premise criticals must decompose the disjunction")
    d1, d2 = _subproofs(proof)

    def collapsed(branch, t, repl, which):
        sub = substitute(calc, branch, t, repl)
        reductivity_audit(branch, sub)
        return sub.repair(calc, _collapse_fix(calc, which))

    p1ab = collapsed(d1, t1, (a, b), 0)       # |- A, B
    p2a = collapsed(d2, t2, (a,), 0)          # A |-
    p2b = collapsed(d2, t2, (b,), 1)          # B |-
    inner = cut_star(calc, p1ab, p2b, b)      # |- A
    outer = cut_star(calc, inner, p2a, a)
    return _resolve(calc, outer, report, depth, run_size, size(cutf))


def _neg_case(calc, proof, cutf: Neg, report, depth, run_size) -> Proof:
    a = cutf.arg
    proof, t1, t2 = _irredundant(calc, proof, cutf, report)
    _assert(report, all(c.rule == "neg_R" for c in t1.criticals),
            "left-premise criticals must introduce the negation")
    _assert(report, all(c.rule == "neg_L" for c in t2.criticals),
            "right-premise criticals must decompose the negation")
    d1, d2 = _subproofs(proof)
    s1 = substitute(calc, d1, t1, (), (a,))   # thread A on the antecedent
    reductivity_audit(d1, s1)
    p1 = s1.repair(calc, _merge_fix(calc))    # Gamma, A |- Delta
    s2 = substitute(calc, d2, t2, (), (a,))   # thread A on the succedent
    reductivity_audit(d2, s2)
    p2 = s2.repair(calc, _merge_fix(calc))    # Gamma |- A, Delta
    out = cut_star(calc, p2, p1, a)
    return _resolve(calc, out, report, depth, run_size, size(cutf))


def _arrow_case(calc, proof, cutf, report, depth, run_size) -> Proof:
    """Shared three-step construction for implication (BiInt) and box (S5).

    For C = A -> B: left criticals are imp_R with premise  Sigma_r, A |- B,
    spliced into the right subproof with cuts on A then B.
    For C = []A: left criticals are Five with premise Sigma_r |- A, Theta_r,
    spliced with a single cut on A, and the boxed critical succedent Theta_r
    is threaded through the substitution; choices may come from either side.
    """
    boxed = isinstance(cutf, Box)
    a = cutf.arg if boxed else cutf.left
    b = None if boxed else cutf.right
    left_rule, right_rule = ("5", "T") if boxed else ("imp_R", "imp_L")

    proof, t1, t2 = _irredundant(calc, proof, cutf, report)
    end = proof.sequent
    _assert(report, all(c.rule == left_rule for c in t1.criticals),
            f"left-premise criticals must be {left_rule} instances")
    _assert(report, all(c.rule == right_rule for c in t2.criticals),
            f"right-premise criticals must be {right_rule} instances")
    d1, d2 = _subproofs(proof)

    if not boxed:
        # no two left criticals may share a branch (imp_R kills the trace)
        crit_ids = {c.node for c in t1.criticals}
        for c in t1.criticals:
            inside = {m.nid for m in Proof(proof.node(c.node)).nodes()} & crit_ids
            _assert(report, inside == {c.node},
                    "left-premise criticals share a branch")
    else:
        for c in t1.criticals:
            _assert(report, c.predecessor_count == 1,
                    "box restriction requires uncontracted cut-formula "
                    "occurrences in the left subproof")
            _assert(report, all(isinstance(f, Box) for f in c.sigma + c.pi),
                    "Five critical context is not boxed")
    tameness_assert(t1.criticals, end, cutf, report, include_pi=boxed)

    crits = list(t1.criticals)
    crit_index = {c.node: r for r, c in enumerate(crits)}
    premise_subtrees = [proof.node(c.node).children[0] for c in crits]

    # ---- step 1: one locally analytic proof per left critical
    def splice_fix(r):
        d1r = premise_subtrees[r]

        def fix(rn, kids):
            d1r_copy = Proof(refresh_ids(d1r))
            if boxed:
                got = cut_star(calc, d1r_copy, Proof(kids[0]), a,
                               target=rn.sequent)
            else:
                mid_target = Sequent(rn.sequent.ant, (b,) + rn.sequent.suc)
                mid = cut_star(calc, Proof(kids[0]), d1r_copy, a,
                               target=mid_target)
                got = cut_star(calc, mid, Proof(kids[1]), b, target=rn.sequent)
            return graft(got, rn.sequent)
        return fix

    step1: dict[int, Proof] = {}

    def step1_proof(r) -> Proof:
        if r not in step1:
            extra = crits[r].pi if boxed else ()
            sub = substitute(calc, d2, t2, crits[r].sigma, extra)
            reductivity_audit(d2, sub)
            raw = sub.repair(calc, splice_fix(r))
            step1[r] = _resolve(calc, raw, report, depth, run_size, size(cutf))
        return step1[r]

    for r, c in enumerate(crits):
        if not c.sigma and not (boxed and c.pi):
            return step1_proof(r)  # already proves Gamma |- Delta

    # ---- step 2: one locally analytic proof per choice of context formulas
    def dedup(items):
        seen = []
        for f in items:
            if f not in seen:
                seen.append(f)
        return seen

    options = []
    for c in crits:
        opts = [("a", d) for d in dedup(c.sigma)]
        if boxed:
            opts += [("s", d) for d in dedup(c.pi)]
        options.append(opts)
    n = len(crits)
    total = 1
    for opts in options:
        total *= len(opts)
    report.tuples_expanded += total if n else 1

    def expand_fix(choice):
        def fix(rn, kids):
            side, d = choice[crit_index[rn.orig.nid]]
            seq = rn.sequent
            ai = seq.ant.index(d)
            si = seq.suc.index(d)
            got = expand_axiom(calc, seq.ant[:ai] + seq.ant[ai + 1:], d,
                               seq.suc[:si] + seq.suc[si + 1:])
            return graft(got, seq)
        return fix

    step2: dict[tuple, Proof] = {}

    def step2_proof(choice: tuple) -> Proof:
        if choice not in step2:
            repl = tuple(d for side, d in choice if side == "a")
            extra = tuple(d for side, d in choice if side == "s")
            sub = substitute(calc, d1, t1, repl, extra)
            reductivity_audit(d1, sub)
            raw = sub.repair(calc, expand_fix(choice))
            step2[choice] = _resolve(calc, raw, report, depth, run_size, size(cutf))
        return step2[choice]

    # ---- step 3: cut the context formulas away, one critical at a time
    proofs = {choice: step2_proof(choice)
              for choice in itertools.product(*options)}
    for r in range(n):
        er = step1_proof(r)
        grouped_sigma = [f for d in dedup(crits[r].sigma)
                         for f in crits[r].sigma if f == d]
        grouped_pi = [f for d in dedup(crits[r].pi)
                      for f in crits[r].pi if f == d] if boxed else []
        new_proofs = {}
        for tail in itertools.product(*options[r + 1:]):
            current = _use(er)
            for d in grouped_sigma:
                left = _use(proofs[(("a", d),) + tail])
                current = cut_star(calc, left, current, d)
            for d in grouped_pi:
                right = _use(proofs[(("s", d),) + tail])
                current = cut_star(calc, current, right, d)
            new_proofs[tail] = current
        proofs = new_proofs
    final = proofs[()]
    return _resolve(calc, final, report, depth, run_size, size(cutf))


# --- standalone principal reduction --------------------------------------------


def principal_reduce(calc: str, left: Proof, right: Proof, cutf: Formula) -> Proof:
    """Replace a cut whose formula is principal in both premises by cuts on
    its immediate subformulas (plus structural rules).  For the copying rules
    this is the cross-branch splice: the principal's copies in the left-rule
    premises are substituted away rather than cut."""
    lr = left.root
    rr = right.root
    target = _implied_cut_target(left, right, cutf)

    def check_heads(lrule, rrule):
        if lr.rule != lrule or lr.inst.principal_formula() != cutf:
            raise PreconditionError(f"left proof must end in {lrule} on '{cutf}'")
        if rr.rule != rrule or rr.inst.principal_formula() != cutf:
            raise PreconditionError(f"right proof must end in {rrule} on '{cutf}'")

    if isinstance(cutf, And):
        check_heads("and_R", "and_L")
        la, lb = Proof(lr.children[0]), Proof(lr.children[1])
        rab = Proof(rr.children[0])
        inner = cut_star(calc, lb, rab, cutf.right)
        out = cut_star(calc, la, inner, cutf.left)
    elif isinstance(cutf, Or):
        check_heads("or_R", "or_L")
        lab = Proof(lr.children[0])
        ra, rb = Proof(rr.children[0]), Proof(rr.children[1])
        inner = cut_star(calc, lab, rb, cutf.right)
        out = cut_star(calc, inner, ra, cutf.left)
    elif isinstance(cutf, Neg):
        check_heads("neg_R", "neg_L")
        out = cut_star(calc, Proof(rr.children[0]), Proof(lr.children[0]), cutf.arg)
    elif isinstance(cutf, Box):
        check_heads("5", "T")
        out = cut_star(calc, Proof(lr.children[0]), Proof(rr.children[0]), cutf.arg)
    elif isinstance(cutf, Imp):
        check_heads("imp_R", "imp_L")
        out = _imp_splice(calc, left, right, cutf)
    elif isinstance(cutf, Coimp):
        check_heads("coimp_R", "coimp_L")
        from .formulas import dualize
        dual_cut = dualize(cutf)  # an implication; sides swap under duality
        dual_out = _imp_splice(calc, dualize_proof(right), dualize_proof(left),
                               dual_cut)
        out = dualize_proof(dual_out)
    else:
        raise PreconditionError(f"no principal reduction for '{cutf}'")
    return _fit_to(calc, out, target)


def _implied_cut_target(left: Proof, right: Proof, cutf: Formula) -> Sequent:
    def minus(items, f):
        i = items.index(f)
        return items[:i] + items[i + 1:]

    from .proofs import _max_union
    return Sequent(_max_union(left.sequent.ant, minus(right.sequent.ant, cutf)),
                   _max_union(minus(left.sequent.suc, cutf), right.sequent.suc))


def _imp_splice(calc: str, left: Proof, right: Proof, cutf: Imp) -> Proof:
    """Substitute the left premise's context for the principal copies in the
    right proof; close each broken imp_L with cuts on the subformulas."""
    a, b = cutf.left, cutf.right
    sigma = left.root.sequent.ant
    d1r = left.root.children[0]
    rpos = right.root.inst.principal[0]
    from .proofs import OccRef
    seed = OccRef(right.root.nid, rpos[0], rpos[1])
    t = compute_trace(right, seed, require_cut_premise=False)

    def fix(rn, kids):
        d1r_copy = Proof(refresh_ids(d1r))
        mid_target = Sequent(rn.sequent.ant, (b,) + rn.sequent.suc)
        mid = cut_star(calc, Proof(kids[0]), d1r_copy, a, target=mid_target)
        got = cut_star(calc, mid, Proof(kids[1]), b, target=rn.sequent)
        return graft(got, rn.sequent)

    sub = substitute(calc, right, t, sigma)
    return sub.repair(calc, fix)
