"""Predecessor tracing, irredundance normalization, and predecessor
substitution with pre-soundness checking.

A trace starts at a designated cut-formula occurrence in a cut premise (the
seed) and follows flow maps upward.  A branch of the trace ends at

  * a logical inference whose principal occurrence is the traced one (recorded
    as a critical inference; for the copying rules the premise copies continue
    the trace),
  * a weakening or a context position a rule drops (imp_R succedents,
    coimp_L antecedents), or
  * a context position of a leaf.

Substitution replaces every predecessor occurrence by a fixed multiset and can
additionally thread extra material on the opposite side along the trace's
spine (needed by the S5 box case; BiInt always passes none).  Every inference
except the criticals must survive substitution unchanged; criticals that stop
validating are returned as data for the restriction engine to repair.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field

from .errors import InternalCheckError, PreconditionError
from .formulas import Atom, Formula, Sequent, proper_subformulas
from .proofs import (
    OccRef, Proof, ProofNode, contract_macro, fresh_id, graft, refresh_ids,
    replace_subtree, weaken_to,
)
from .rules import (
    LOGICAL_RULES, RuleInstance, is_analytic_cut, validate_instance,
)


@dataclass
class CriticalInference:
    node: int
    rule: str
    sigma: tuple[Formula, ...]   # conclusion antecedent minus predecessors
    pi: tuple[Formula, ...]      # conclusion succedent minus predecessors
    predecessor_count: int

    def __str__(self):
        from .formulas import format_sequent
        return (f"node={self.node} rule={self.rule} preds={self.predecessor_count} "
                f"critical: {format_sequent(Sequent(self.sigma, self.pi))}")


@dataclass
class Trace:
    cut_formula: Formula
    seed: OccRef
    premise_index: int           # which premise of the cut the seed sits in
    side: str                    # the side all predecessors live on
    predecessors: frozenset
    criticals: tuple[CriticalInference, ...]
    weakening_ends: frozenset
    by_node: dict = field(default_factory=dict)  # nid -> sorted pred indices

    def dump_lines(self):
        for occ in sorted(self.predecessors):
            yield f"node={occ.node} side={occ.side} ix={occ.index}"
        for crit in self.criticals:
            yield str(crit)


def seed_of(proof: Proof, premise_index: int) -> OccRef:
    """The cut-formula occurrence in the given premise of the root cut."""
    root = proof.root
    if root.rule != "cut":
        raise PreconditionError("proof does not end in a cut")
    side, ix = root.inst.active[premise_index][0]
    return OccRef(root.children[premise_index].nid, side, ix)


def compute_trace(proof: Proof, seed: OccRef, require_cut_premise: bool = True) -> Trace:
    premise_ix = -1
    if require_cut_premise:
        parents = proof.parents()
        if seed.node not in parents:
            raise PreconditionError("seed must sit in a cut premise, not the root")
        pnid, k = parents[seed.node]
        parent = proof.node(pnid)
        if parent.rule != "cut" or parent.inst.active[k][0] != (seed.side, seed.index):
            raise PreconditionError("seed is not the active cut occurrence of a premise")
        premise_ix = k
    cutf = proof.node(seed.node).sequent.side(seed.side)[seed.index]
    if isinstance(cutf, Atom):
        raise PreconditionError("atomic cut formulas are never traced")

    predecessors: set[OccRef] = set()
    weak_ends: set[OccRef] = set()
    critical_nodes: dict[int, str] = {}
    work = [seed]
    while work:
        occ = work.pop()
        if occ in predecessors:
            continue
        predecessors.add(occ)
        n = proof.node(occ.node)
        inst = n.inst
        pos = (occ.side, occ.index)
        got = inst.conclusion.side(occ.side)[occ.index]
        if got != cutf:
            raise InternalCheckError(
                f"trace reached occurrence of '{got}', expected '{cutf}'")
        if pos in inst.principal and inst.rule in LOGICAL_RULES:
            critical_nodes[occ.node] = inst.rule
            # copying rules continue into the premise copies
            for k2, fmap in enumerate(inst.flow):
                for tgt in fmap.get(pos, ()):
                    work.append(OccRef(n.children[k2].nid, tgt[0], tgt[1]))
            continue
        if not n.children:
            weak_ends.add(occ)
            continue
        targets = [(k2, fmap[pos]) for k2, fmap in enumerate(inst.flow)]
        if all(not tgts for _, tgts in targets):
            weak_ends.add(occ)
            continue
        for k2, tgts in targets:
            for tgt in tgts:
                work.append(OccRef(n.children[k2].nid, tgt[0], tgt[1]))

    by_node: dict[int, list[int]] = {}
    for occ in predecessors:
        by_node.setdefault(occ.node, []).append(occ.index)
    for nid in by_node:
        by_node[nid] = sorted(by_node[nid])

    order = {n.nid: i for i, n in enumerate(proof.nodes())}
    crits = []
    for nid in sorted(critical_nodes, key=order.__getitem__):
        n = proof.node(nid)
        preds = set(by_node[nid])
        if seed.side == "a":
            sigma = tuple(f for i, f in enumerate(n.sequent.ant) if i not in preds)
            pi = n.sequent.suc
        else:
            sigma = n.sequent.ant
            pi = tuple(f for i, f in enumerate(n.sequent.suc) if i not in preds)
        crits.append(CriticalInference(nid, critical_nodes[nid], sigma, pi, len(preds)))

    if premise_ix < 0:
        premise_ix = 0 if seed.side == "s" else 1
    return Trace(cutf, seed, premise_ix, seed.side, frozenset(predecessors),
                 tuple(crits), frozenset(weak_ends), by_node)


# --- irredundance -------------------------------------------------------------


def enforce_irredundance(calc: str, proof: Proof, cutf: Formula, trace: Trace) -> Proof:
    """Rewrite until no sequent carrying a predecessor of the cut formula is
    the conclusion of a cut on that formula; each such cut becomes a
    contraction of its matching premise.  Returns the proof unchanged (same
    nodes) when nothing fires."""
    t = trace
    while True:
        offending = None
        for n in proof.nodes():
            if n.rule == "cut" and n.nid in t.by_node \
                    and n.inst.cut_formula() == cutf:
                offending = n
                break
        if offending is None:
            return proof
        side = t.side
        keep = 1 if side == "a" else 0
        kept = offending.children[keep]
        pred_ix = t.by_node[offending.nid][0]
        pred_pos = (side, pred_ix)
        fmap = dict(offending.inst.flow[keep])
        fmap[pred_pos] = (offending.inst.flow[keep][pred_pos][0],
                          offending.inst.active[keep][0])
        rule = "contr_L" if side == "a" else "contr_R"
        inst = RuleInstance(rule, offending.sequent, (kept.sequent,),
                            (pred_pos,), ((),), (fmap,))
        diag = validate_instance(calc, inst)
        if diag is not None:
            raise InternalCheckError(f"irredundance rewrite failed: {diag}")
        proof = replace_subtree(proof, offending.nid,
                                ProofNode(fresh_id(), inst, (kept,)))
        t = compute_trace(proof, seed_of(proof, t.premise_index))


# --- substitution -------------------------------------------------------------


@dataclass
class RawNode:
    kind: str                 # ok | broken | pad | merge | reuse
    sequent: Sequent          # target sequent after substitution
    rule: str
    children: list
    inst: RuleInstance | None = None
    orig: ProofNode | None = None

    def walk(self):
        yield self
        for c in self.children:
            yield from c.walk()


@dataclass
class Substitution:
    """Result of replacing predecessors: a raw tree whose `broken` nodes are
    exactly the criticals that stopped validating."""
    root: RawNode
    broken: set            # original node ids
    trace: Trace
    replacement: tuple
    extra: tuple

    def repair(self, calc: str, fix=None) -> Proof:
        """Materialize the raw tree.  `fix(raw_node, repaired_children)` must
        return a ProofNode proving raw_node.sequent for every broken node."""

        def go(rn: RawNode) -> ProofNode:
            if rn.kind == "reuse":
                return refresh_ids(rn.orig)
            kids = [go(c) for c in rn.children]
            if rn.kind == "ok":
                return ProofNode(fresh_id(), rn.inst, tuple(kids))
            if rn.kind == "pad":
                return graft(weaken_to(calc, Proof(kids[0]), rn.sequent), rn.sequent)
            if rn.kind == "merge":
                child = kids[0]
                diff_a = Counter(child.sequent.ant) - Counter(rn.sequent.ant)
                diff_s = Counter(child.sequent.suc) - Counter(rn.sequent.suc)
                got = contract_macro(calc, Proof(child),
                                     tuple(diff_a.elements()), tuple(diff_s.elements()))
                return graft(got, rn.sequent)
            if rn.kind == "broken":
                if fix is None:
                    raise InternalCheckError("broken node with no repair strategy")
                out = fix(rn, kids)
                if out.sequent != rn.sequent:
                    raise InternalCheckError(
                        f"repair proves '{out.sequent}', wanted '{rn.sequent}'")
                return out
            raise InternalCheckError(f"unknown raw node kind {rn.kind}")

        return Proof(go(self.root))


def _apply_side(items: tuple, preds: set, repl: tuple):
    """Splice `repl` at each predecessor index; return (new items, mapping)."""
    out = []
    mapping = {}
    for i, f in enumerate(items):
        if i in preds:
            mapping[i] = tuple(range(len(out), len(out) + len(repl)))
            out.extend(repl)
        else:
            mapping[i] = (len(out),)
            out.append(f)
    return tuple(out), mapping


def substitute(calc: str, proof: Proof, trace: Trace, replacement, extra=()) -> Substitution:
    """Replace every predecessor occurrence by `replacement`; append `extra`
    to the opposite side of every sequent on the trace's spine.  Broken nodes
    are exactly the criticals whose instance no longer validates; any other
    validation failure is a pre-soundness violation and raises."""
    replacement = tuple(replacement)
    extra = tuple(extra)
    t = trace
    other = "a" if t.side == "s" else "s"
    critical_ids = {c.node for c in t.criticals}
    broken: set[int] = set()

    def maps_for(n: ProofNode):
        """(new sequent, trace-side mapping) for a spine node."""
        preds = set(t.by_node.get(n.nid, ()))
        items = n.sequent.side(t.side)
        new_items, mapping = _apply_side(items, preds, replacement)
        if t.side == "a":
            ant, suc = new_items, n.sequent.suc + extra
        else:
            ant, suc = n.sequent.ant + extra, new_items
        return Sequent(ant, suc), mapping

    def build(n: ProofNode) -> RawNode:
        if n.nid not in t.by_node:
            return RawNode("reuse", n.sequent, n.rule, [], None, n)
        new_seq, mapping = maps_for(n)
        preds = set(t.by_node[n.nid])

        struct_pred = (n.rule in ("w_L", "w_R", "contr_L", "contr_R")
                       and n.inst.principal[0][0] == t.side
                       and n.inst.principal[0][1] in preds)
        if struct_pred:
            kid = build(n.children[0])
            kind = "pad" if n.rule in ("w_L", "w_R") else "merge"
            return RawNode(kind, new_seq, n.rule, [kid], None, n)

        kids = [build(c) for c in n.children]
        kid_mappings = []
        for c, rk in zip(n.children, kids):
            kid_mappings.append(None if rk.kind == "reuse" else maps_for(c)[1])

        def remap_concl(pos):
            side, i = pos
            if side != t.side:
                return ((side, i),)
            return tuple((side, j) for j in mapping[i])

        def remap_prem(k, pos):
            side, i = pos
            km = kid_mappings[k]
            if side != t.side or km is None:
                return ((side, i),)
            return tuple((side, j) for j in km[i])

        # principal occurrences must survive as single occurrences
        new_principal = []
        explodes = False
        for ppos in n.inst.principal:
            images = remap_concl(ppos)
            if len(images) != 1:
                explodes = True
                break
            new_principal.append(images[0])
        if explodes:
            if n.nid in critical_ids:
                broken.add(n.nid)
                return RawNode("broken", new_seq, n.rule, kids, None, n)
            raise InternalCheckError(
                f"pre-soundness: non-critical {n.rule} principal substituted away")

        new_premises = tuple(rk.sequent for rk in kids)
        new_active = []
        for k in range(len(n.children)):
            acts = []
            for apos in n.inst.active[k]:
                images = remap_prem(k, apos)
                if len(images) != 1:
                    raise InternalCheckError("pre-soundness: active occurrence exploded")
                acts.append(images[0])
            new_active.append(tuple(acts))
        new_flow = []
        for k in range(len(n.children)):
            fmap = {}
            for cpos, tgts in n.inst.flow[k].items():
                cimages = remap_concl(cpos)
                timages = [remap_prem(k, tp) for tp in tgts]
                for idx, ci in enumerate(cimages):
                    fmap[ci] = tuple(ti[idx] for ti in timages)
            # thread the extra material on the opposite side
            base_c = len(n.sequent.side(other))
            for j in range(len(extra)):
                rk, c = kids[k], n.children[k]
                if rk.kind == "reuse":
                    fmap[(other, base_c + j)] = ()
                else:
                    fmap[(other, base_c + j)] = \
                        ((other, len(c.sequent.side(other)) + j),)
            new_flow.append(fmap)

        inst = RuleInstance(n.rule, new_seq, new_premises,
                            tuple(new_principal), tuple(new_active), tuple(new_flow))
        diag = validate_instance(calc, inst)
        if diag is None:
            return RawNode("ok", new_seq, n.rule, kids, inst, n)
        if n.nid in critical_ids:
            broken.add(n.nid)
            return RawNode("broken", new_seq, n.rule, kids, None, n)
        raise InternalCheckError(f"pre-soundness violated at {n.rule}: {diag}")

    root = build(proof.root)
    if not broken <= critical_ids:
        raise InternalCheckError("broken nodes outside the critical set")
    return Substitution(root, broken, t, replacement, extra)


def reductivity_audit(before: Proof, sub: Substitution) -> set:
    """Cut formulas of cuts analytic in `before` that the substitution turned
    non-analytic.  Every such formula must be a proper subformula of the traced
    cut formula; anything else signals an irredundance bug."""
    out = set()
    allowed = proper_subformulas(sub.trace.cut_formula)

    def walk(rn: RawNode):
        if rn.kind == "reuse":
            return
        if rn.kind == "ok" and rn.rule == "cut":
            was = is_analytic_cut(rn.orig.inst)
            now = is_analytic_cut(rn.inst)
            if was and not now:
                f = rn.inst.cut_formula()
                if f not in allowed:
                    raise InternalCheckError(
                        f"reductivity violated: cut on '{f}' left the subformula "
                        f"budget of '{sub.trace.cut_formula}'")
                out.add(f)
        for c in rn.children:
            walk(c)

    walk(sub.root)
    return out
