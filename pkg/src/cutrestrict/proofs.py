"""Proof trees: checking, occurrence addressing, structural-rule macros,
axiom expansion, and proof dualization.

Proofs are immutable trees of rule instances; every edit builds new nodes with
fresh ids.  A node's children must reproduce the instance's premises with exact
index agreement, which keeps flow maps trustworthy; `reorder_endsequent` is the
sanctioned way to permute a proof's root sequent when grafting.
"""

from __future__ import annotations

import itertools
from collections import Counter
from dataclasses import dataclass, field
from typing import NamedTuple

from .errors import InternalCheckError, InvalidProofError, PreconditionError
from .formulas import (
    And, Atom, Bot, Box, Coimp, Formula, Imp, Neg, Or, Sequent, Top,
    dualize_sequent, multiset_eq, size,
)
from .rules import (
    BIINT, DUAL_RULE, DUAL_SWAPS, LEAF_RULES, Diagnostic, RuleInstance, S5,
    all_positions, formula_at, is_analytic_cut, premises_for, resolve_instance,
    validate_instance,
)

_ids = itertools.count(1)


def fresh_id() -> int:
    return next(_ids)


class OccRef(NamedTuple):
    node: int
    side: str  # "a" | "s"
    index: int


@dataclass
class ProofNode:
    nid: int
    inst: RuleInstance
    children: tuple["ProofNode", ...]

    @property
    def sequent(self) -> Sequent:
        return self.inst.conclusion

    @property
    def rule(self) -> str:
        return self.inst.rule


class Proof:
    """A rooted proof tree.  The wrapper carries a node index for addressing."""

    def __init__(self, root: ProofNode):
        self.root = root
        self._index: dict[int, ProofNode] | None = None

    @property
    def sequent(self) -> Sequent:
        return self.root.sequent

    def node(self, nid: int) -> ProofNode:
        if self._index is None:
            self._index = {n.nid: n for n in self.nodes()}
        return self._index[nid]

    def nodes(self):
        """Pre-order (DFS, leftmost-first) traversal."""
        stack = [self.root]
        while stack:
            n = stack.pop()
            yield n
            stack.extend(reversed(n.children))

    def parents(self) -> dict[int, tuple[int, int]]:
        """nid -> (parent nid, premise index)."""
        out = {}
        for n in self.nodes():
            for k, c in enumerate(n.children):
                out[c.nid] = (n.nid, k)
        return out

    def height(self) -> int:
        def h(n: ProofNode) -> int:
            return 1 + max((h(c) for c in n.children), default=0)
        return h(self.root)

    def cut_nodes(self):
        return [n for n in self.nodes() if n.rule == "cut"]

    def __str__(self):
        from .proofio import format_proof_body
        return format_proof_body(self)


def node(inst: RuleInstance, children) -> ProofNode:
    children = tuple(children)
    if len(children) != len(inst.premises):
        raise PreconditionError(f"{inst.rule}: {len(children)} children for "
                                f"{len(inst.premises)} premises")
    for c, want in zip(children, inst.premises):
        if c.sequent != want:
            raise PreconditionError(
                f"{inst.rule}: child proves '{c.sequent}', premise is '{want}'")
    return ProofNode(fresh_id(), inst, children)


def rule_node(calc: str, rule: str, conclusion: Sequent, principal,
              children, cutf: Formula | None = None) -> ProofNode:
    """Resolve an instance against the children's actual sequents and attach
    them.  Children may prove any permutation of the canonical premises; they
    are reordered, never restructured."""
    child_nodes = []
    premise_seqs = []
    canonical = premises_for(rule, conclusion, tuple(principal), cutf)
    for child, want in zip(children, canonical):
        got = child.root if isinstance(child, Proof) else child
        if got.sequent != want:
            got = reorder_root(got, want)
        child_nodes.append(got)
        premise_seqs.append(got.sequent)
    inst = resolve_instance(calc, rule, conclusion, premise_seqs,
                            tuple(principal), cutf)
    if isinstance(inst, Diagnostic):
        raise InvalidProofError(inst)
    return node(inst, child_nodes)


# --- checking ----------------------------------------------------------------


@dataclass
class AnalyticityAudit:
    cuts: list[tuple[int, Formula, bool]] = field(default_factory=list)
    nonanalytic_formulas: list[Formula] = field(default_factory=list)
    height: int = 0

    @property
    def locally_analytic(self) -> bool:
        return not self.nonanalytic_formulas

    def lines(self):
        yield f"height: {self.height}"
        yield f"cuts: {len(self.cuts)}"
        for nid, f, ok in self.cuts:
            yield f"  node={nid} cut on '{f}' {'analytic' if ok else 'NON-ANALYTIC'}"
        yield f"locally analytic: {'yes' if self.locally_analytic else 'no'}"


def check_proof(calc: str, proof: Proof) -> AnalyticityAudit:
    """Validate every node and leaf; collect the cut/analyticity audit.
    Raises InvalidProofError with a node-local diagnostic on failure."""
    audit = AnalyticityAudit()
    seen = set()

    def walk(n: ProofNode, depth: int):
        if n.nid in seen:
            raise InvalidProofError(Diagnostic(n.rule, "duplicate node id", (), "", n.nid))
        seen.add(n.nid)
        audit.height = max(audit.height, depth)
        diag = validate_instance(calc, n.inst)
        if diag is not None:
            raise InvalidProofError(diag.at_node(n.nid))
        if len(n.children) != len(n.inst.premises):
            raise InvalidProofError(Diagnostic(n.rule, "child count mismatch", (), "", n.nid))
        if not n.children and n.rule not in LEAF_RULES:
            raise InvalidProofError(Diagnostic(n.rule, "non-initial leaf", (), "", n.nid))
        for c, want in zip(n.children, n.inst.premises):
            if c.sequent != want:
                raise InvalidProofError(Diagnostic(
                    n.rule, "child sequent differs from premise", (), str(c.sequent), n.nid))
        if n.rule == "cut":
            f = n.inst.cut_formula()
            ok = is_analytic_cut(n.inst)
            audit.cuts.append((n.nid, f, ok))
            if not ok:
                audit.nonanalytic_formulas.append(f)
        for c in n.children:
            walk(c, depth + 1)

    walk(proof.root, 1)
    return audit


def is_locally_analytic(proof: Proof, calc: str = BIINT) -> bool:
    return check_proof(calc, proof).locally_analytic


def globally_analytic(calc: str, proof: Proof) -> bool:
    """Every cut formula is a subformula of the endsequent."""
    from .formulas import is_subformula
    end = proof.sequent.formulas()
    return all(is_subformula(n.inst.cut_formula(), end) for n in proof.cut_nodes())


# --- structural edits ---------------------------------------------------------


def reorder_root(pn: ProofNode, target: Sequent) -> ProofNode:
    """Rebuild the root instance with a permuted conclusion; children are
    untouched.  `target` must be multiset-equal to the current sequent."""
    cur = pn.sequent
    if cur == target:
        return pn
    if not multiset_eq(cur, target):
        raise PreconditionError(f"reorder: '{target}' is not a permutation of '{cur}'")
    mapping = {}
    for side in ("a", "s"):
        queues: dict[Formula, list[int]] = {}
        for j, f in enumerate(target.side(side)):
            queues.setdefault(f, []).append(j)
        for i, f in enumerate(cur.side(side)):
            mapping[(side, i)] = (side, queues[f].pop(0))
    inst = pn.inst
    new_flow = tuple({mapping[pos]: tgt for pos, tgt in fmap.items()}
                     for fmap in inst.flow)
    new_inst = RuleInstance(inst.rule, target, inst.premises,
                            tuple(mapping[p] for p in inst.principal),
                            inst.active, new_flow)
    return ProofNode(fresh_id(), new_inst, pn.children)


def reorder_endsequent(proof: Proof, target: Sequent) -> Proof:
    return Proof(reorder_root(proof.root, target))


def graft(proof: Proof, target: Sequent) -> ProofNode:
    """The proof's root, reordered to prove exactly `target`."""
    return reorder_root(proof.root, target)


def refresh_ids(pn: ProofNode) -> ProofNode:
    return ProofNode(fresh_id(), pn.inst, tuple(refresh_ids(c) for c in pn.children))


def weaken(calc: str, proof: Proof, x, y) -> Proof:
    """Append single-formula weakenings below the root: the result proves
    (x + ant |- y + suc), new formulas at the front of each side."""
    pn = proof.root
    for f in reversed(tuple(y)):
        seq = pn.sequent
        concl = Sequent(seq.ant, (f,) + seq.suc)
        pn = rule_node(calc, "w_R", concl, (("s", 0),), [pn])
    for f in reversed(tuple(x)):
        seq = pn.sequent
        concl = Sequent((f,) + seq.ant, seq.suc)
        pn = rule_node(calc, "w_L", concl, (("a", 0),), [pn])
    return Proof(pn)


def weaken_to(calc: str, proof: Proof, target: Sequent) -> Proof:
    """Weaken and reorder so the result proves exactly `target`."""
    seq = proof.sequent
    extra_a = list((Counter(target.ant) - Counter(seq.ant)).elements())
    extra_s = list((Counter(target.suc) - Counter(seq.suc)).elements())
    if Counter(seq.ant) - Counter(target.ant) or Counter(seq.suc) - Counter(target.suc):
        raise PreconditionError(f"cannot weaken '{seq}' to smaller '{target}'")
    widened = weaken(calc, proof, extra_a, extra_s)
    return Proof(graft(widened, target))


def contract_macro(calc: str, proof: Proof, x, y) -> Proof:
    """Remove one copy of each formula in x from the antecedent and each in y
    from the succedent via single-formula contractions."""
    pn = proof.root
    for side, extra in (("a", tuple(x)), ("s", tuple(y))):
        for f in extra:
            seq = pn.sequent
            items = seq.side(side)
            occ = [i for i, g in enumerate(items) if g == f]
            if len(occ) < 2:
                raise PreconditionError(f"cannot contract '{f}' in '{seq}'")
            keep = occ[0]
            new_items = items[:occ[1]] + items[occ[1] + 1:]
            concl = (Sequent(new_items, seq.suc) if side == "a"
                     else Sequent(seq.ant, new_items))
            rule = "contr_L" if side == "a" else "contr_R"
            pn = rule_node(calc, rule, concl, ((side, keep),), [pn])
    return Proof(pn)


def _max_union(xs: tuple, ys: tuple) -> tuple:
    """Multiset max-union keeping xs' order first, then ys' extras in order."""
    remaining = Counter(ys) - Counter(xs)
    extras = []
    for f in ys:
        if remaining[f] > 0:
            remaining[f] -= 1
            extras.append(f)
    return xs + tuple(extras)


def cut_star(calc: str, left: Proof, right: Proof, cutf: Formula,
             target: Sequent | None = None) -> Proof:
    """Weakening followed by an additive cut: aligns the premises' contexts
    (their multiset max-union by default, or any larger `target`), then cuts.
    `left` must carry cutf in its succedent, `right` in its antecedent."""
    ls, rs = left.sequent, right.sequent
    if cutf not in ls.suc:
        raise PreconditionError(f"cut formula '{cutf}' absent from succedent of '{ls}'")
    if cutf not in rs.ant:
        raise PreconditionError(f"cut formula '{cutf}' absent from antecedent of '{rs}'")

    def minus_one(items: tuple, f: Formula) -> tuple:
        i = items.index(f)
        return items[:i] + items[i + 1:]

    if target is None:
        target = Sequent(_max_union(ls.ant, minus_one(rs.ant, cutf)),
                         _max_union(minus_one(ls.suc, cutf), rs.suc))
    lw = weaken_to(calc, left, Sequent(target.ant, (cutf,) + target.suc))
    rw = weaken_to(calc, right, Sequent(target.ant + (cutf,), target.suc))
    return Proof(rule_node(calc, "cut", target, (), [lw, rw], cutf=cutf))


# --- axiom expansion ----------------------------------------------------------


def expand_axiom(calc: str, gamma, a: Formula, delta) -> Proof:
    """A cut-free proof of (gamma, a |- a, delta), by structural induction on
    a.  The result proves exactly that sequent, a last in the antecedent and
    first in the succedent."""
    from .errors import SignatureError
    from .rules import signature_violation
    gamma, delta = tuple(gamma), tuple(delta)
    for f in gamma + (a,) + delta:
        bad = signature_violation(calc, f)
        if bad is not None:
            raise SignatureError(f"{bad} outside the {calc} signature")
    return Proof(_expand(calc, gamma, a, delta))


def _expand(calc: str, gamma: tuple, a: Formula, delta: tuple) -> ProofNode:
    concl = Sequent(gamma + (a,), (a,) + delta)
    ant_pos = ("a", len(gamma))
    suc_pos = ("s", 0)
    if isinstance(a, Atom):
        return rule_node(calc, "init", concl, (ant_pos, suc_pos), [])
    if isinstance(a, Top):
        return rule_node(calc, "top_R", concl, (suc_pos,), [])
    if isinstance(a, Bot):
        return rule_node(calc, "bot_L", concl, (ant_pos,), [])
    if isinstance(a, And):
        # and_L below and_R; left branch needs one extra weakening
        left = _expand(calc, gamma, a.left, delta)  # gamma, A |- A, delta
        left = weaken_to(calc, Proof(left),
                         Sequent(gamma + (a.left, a.right), (a.left,) + delta)).root
        right = _expand(calc, gamma + (a.left,), a.right, delta)
        p1 = rule_node(calc, "and_L", Sequent(gamma + (a,), (a.left,) + delta),
                       (ant_pos,), [left])
        p2 = rule_node(calc, "and_L", Sequent(gamma + (a,), (a.right,) + delta),
                       (ant_pos,), [right])
        return rule_node(calc, "and_R", concl, (suc_pos,), [p1, p2])
    if isinstance(a, Or):
        left = _expand(calc, gamma, a.left, (a.right,) + delta)
        right = _expand(calc, gamma, a.right, delta)
        right = weaken_to(calc, Proof(right),
                          Sequent(gamma + (a.right,), (a.left, a.right) + delta)).root
        p1 = rule_node(calc, "or_R", Sequent(gamma + (a.left,), (a,) + delta),
                       (suc_pos,), [left])
        p2 = rule_node(calc, "or_R", Sequent(gamma + (a.right,), (a,) + delta),
                       (suc_pos,), [right])
        return rule_node(calc, "or_L", concl, (ant_pos,), [p1, p2])
    if isinstance(a, Imp):
        ctx = gamma + (a,)
        p1 = _expand(calc, ctx, a.left, (a.right,))        # ctx, A |- A, B
        p2 = _expand(calc, ctx + (a.left,), a.right, ())   # ctx, A, B |- B
        mid = rule_node(calc, "imp_L", Sequent(ctx + (a.left,), (a.right,)),
                        (("a", len(gamma)),), [p1, p2])
        return rule_node(calc, "imp_R", concl, (suc_pos,), [mid])
    if isinstance(a, Coimp):
        ctx = (a,) + delta
        p1 = _expand(calc, (), a.left, (a.right,) + ctx)      # A |- A, B, ctx
        p2 = _expand(calc, (a.left,), a.right, ctx)           # A, B |- B, ctx
        mid = rule_node(calc, "coimp_R", Sequent((a.left,), (a.right,) + ctx),
                        (("s", 1),), [p1, p2])
        return rule_node(calc, "coimp_L", concl, (ant_pos,), [mid])
    if isinstance(a, Neg):
        inner = _expand(calc, gamma, a.arg, delta)            # gamma, A |- A, delta
        mid = rule_node(calc, "neg_R", Sequent(gamma, (a.arg, a) + delta),
                        (("s", 1),), [inner])
        return rule_node(calc, "neg_L", concl, (ant_pos,), [mid])
    if isinstance(a, Box):
        boxed_g = tuple(f for f in gamma if isinstance(f, Box))
        boxed_d = tuple(f for f in delta if isinstance(f, Box))
        inner = _expand(calc, boxed_g, a.arg, boxed_d)
        t_node = rule_node(calc, "T", Sequent(boxed_g + (a,), (a.arg,) + boxed_d),
                           (("a", len(boxed_g)),), [inner])
        five = rule_node(calc, "5", Sequent(boxed_g + (a,), (a,) + boxed_d),
                         (("s", 0),), [t_node])
        if boxed_g == gamma and boxed_d == delta:
            return five
        return weaken_to(calc, Proof(five), concl).root
    raise PreconditionError(f"cannot expand {a!r}")


# --- dualization --------------------------------------------------------------


def _dual_pos(seq: Sequent, pos) -> tuple:
    side, i = pos
    return ("s", i) if side == "a" else ("a", i)


def dualize_proof(proof: Proof, calc: str = BIINT) -> Proof:
    """Mirror a BiInt proof: every sequent is dualized (sides swapped, formulas
    translated) and every rule replaced by its dual; cut count and analyticity
    flags are preserved."""
    if calc != BIINT:
        raise PreconditionError("proof dualization is defined for BiInt only")

    def walk(n: ProofNode) -> ProofNode:
        inst = n.inst
        rule2 = DUAL_RULE[inst.rule]
        concl2 = dualize_sequent(inst.conclusion)
        swap = inst.rule in DUAL_SWAPS
        order = tuple(reversed(range(len(inst.premises)))) if swap \
            else tuple(range(len(inst.premises)))
        prem2 = tuple(dualize_sequent(inst.premises[k]) for k in order)
        princ2 = tuple(_dual_pos(inst.conclusion, p) for p in inst.principal)
        act2 = tuple(tuple(_dual_pos(inst.premises[k], p) for p in inst.active[k])
                     for k in order)
        flow2 = tuple({_dual_pos(inst.conclusion, cpos):
                       tuple(_dual_pos(inst.premises[k], t) for t in tgts)
                       for cpos, tgts in inst.flow[k].items()}
                      for k in order)
        inst2 = RuleInstance(rule2, concl2, prem2, princ2, act2, flow2)
        kids = tuple(walk(n.children[k]) for k in order)
        return ProofNode(fresh_id(), inst2, kids)

    return Proof(walk(proof.root))


# --- misc --------------------------------------------------------------------


def max_cut_size(proof: Proof) -> int:
    return max((size(n.inst.cut_formula()) for n in proof.cut_nodes()), default=0)


def replace_subtree(proof: Proof, nid: int, replacement: ProofNode) -> Proof:
    """Swap the subtree rooted at nid for `replacement` (which must prove the
    same sequent, index-exactly)."""

    def walk(n: ProofNode) -> ProofNode:
        if n.nid == nid:
            if replacement.sequent != n.sequent:
                raise PreconditionError("replacement proves a different sequent")
            return replacement
        if any(has(c) for c in n.children):
            return ProofNode(fresh_id(), n.inst, tuple(walk(c) for c in n.children))
        return n

    def has(n: ProofNode) -> bool:
        return n.nid == nid or any(has(c) for c in n.children)

    if not has(proof.root):
        raise PreconditionError(f"node {nid} not in proof")
    return Proof(walk(proof.root))
