"""Rule schemas and validated rule instances for the BiInt and S5 calculi.

A rule instance records, besides its conclusion and premises, which conclusion
occurrences are principal, which premise occurrences are active, and a flow map
sending every remaining conclusion occurrence to its occurrence(s) in each
premise.  Flow maps are what make occurrence tracing and predecessor
substitution possible.  They may permute occurrences freely: context order is
never significant for validity, only the occurrence correspondence is.

Conventions:
  * positions are ("a", i) / ("s", i) pairs into a sequent side;
  * all context-carrying rules are additive (contexts copied to each premise);
  * imp_L and coimp_R copy their principal formula into every premise, and the
    flow map records the principal -> copy correspondence;
  * imp_R drops the succedent context (its premise succedent is the active
    formula alone) and coimp_L drops the antecedent context; dropped positions
    map to no premise occurrence, exactly like a weakened formula.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field

from .errors import PreconditionError
from .formulas import (
    And, Atom, Bot, Box, Coimp, Formula, Imp, Neg, Or, Sequent, Top,
    children, is_subformula,
)

BIINT = "biint"
S5 = "s5"
CALCULI = (BIINT, S5)

SHARED_RULES = ("init", "cut", "w_L", "w_R", "contr_L", "contr_R")
BIINT_LOGICAL = ("top_L", "top_R", "bot_L", "bot_R", "and_L", "and_R",
                 "or_L", "or_R", "imp_L", "imp_R", "coimp_L", "coimp_R")
S5_LOGICAL = ("top_L", "top_R", "bot_L", "bot_R", "and_L", "and_R",
              "or_L", "or_R", "neg_L", "neg_R", "T", "5")

RULES = {BIINT: frozenset(SHARED_RULES + BIINT_LOGICAL),
         S5: frozenset(SHARED_RULES + S5_LOGICAL)}

LEAF_RULES = frozenset(("init", "top_R", "bot_L"))
STRUCTURAL_RULES = frozenset(("w_L", "w_R", "contr_L", "contr_R"))
COPYING_RULES = frozenset(("imp_L", "coimp_R"))
LOGICAL_RULES = frozenset(BIINT_LOGICAL) | frozenset(S5_LOGICAL)

# rule -> (principal side, principal constructor); leaves included.
PRINCIPAL_SHAPE = {
    "top_L": ("a", Top), "top_R": ("s", Top),
    "bot_L": ("a", Bot), "bot_R": ("s", Bot),
    "and_L": ("a", And), "and_R": ("s", And),
    "or_L": ("a", Or), "or_R": ("s", Or),
    "imp_L": ("a", Imp), "imp_R": ("s", Imp),
    "coimp_L": ("a", Coimp), "coimp_R": ("s", Coimp),
    "neg_L": ("a", Neg), "neg_R": ("s", Neg),
    "T": ("a", Box), "5": ("s", Box),
}

N_PREMISES = {
    "init": 0, "top_R": 0, "bot_L": 0,
    "top_L": 1, "bot_R": 1, "and_L": 1, "or_R": 1, "imp_R": 1, "coimp_L": 1,
    "neg_L": 1, "neg_R": 1, "T": 1, "5": 1,
    "w_L": 1, "w_R": 1, "contr_L": 1, "contr_R": 1,
    "and_R": 2, "or_L": 2, "imp_L": 2, "coimp_R": 2, "cut": 2,
}

# Mirror table used by proof dualization (BiInt only).
DUAL_RULE = {
    "init": "init", "cut": "cut",
    "w_L": "w_R", "w_R": "w_L", "contr_L": "contr_R", "contr_R": "contr_L",
    "top_L": "bot_R", "bot_R": "top_L", "top_R": "bot_L", "bot_L": "top_R",
    "and_L": "or_R", "or_R": "and_L", "and_R": "or_L", "or_L": "and_R",
    "imp_L": "coimp_R", "coimp_R": "imp_L", "imp_R": "coimp_L", "coimp_L": "imp_R",
}
# Rules whose premise order reverses under dualization.
DUAL_SWAPS = frozenset(("cut", "imp_L", "coimp_R"))

Pos = tuple  # ("a" | "s", index)


def all_positions(seq: Sequent) -> list[Pos]:
    return [("a", i) for i in range(len(seq.ant))] + [("s", i) for i in range(len(seq.suc))]


def formula_at(seq: Sequent, pos: Pos) -> Formula:
    side, i = pos
    return seq.side(side)[i]


def signature_violation(calc: str, f: Formula):
    """Return the offending subformula if f leaves the calculus signature."""
    banned = (Neg, Box) if calc == BIINT else (Imp, Coimp)
    if isinstance(f, banned):
        return f
    for c in children(f):
        bad = signature_violation(calc, c)
        if bad is not None:
            return bad
    return None


@dataclass(frozen=True)
class Diagnostic:
    rule: str
    condition: str
    positions: tuple = ()
    message: str = ""
    node: int | None = None

    def __str__(self):
        where = "" if self.node is None else f"node {self.node}: "
        detail = f" [{self.message}]" if self.message else ""
        at = f" at {list(self.positions)}" if self.positions else ""
        return f"{where}{self.rule}: {self.condition}{at}{detail}"

    def at_node(self, nid: int) -> "Diagnostic":
        return Diagnostic(self.rule, self.condition, self.positions, self.message, nid)


@dataclass
class RuleInstance:
    rule: str
    conclusion: Sequent
    premises: tuple[Sequent, ...]
    principal: tuple[Pos, ...] = ()
    active: tuple[tuple[Pos, ...], ...] = ()
    flow: tuple[dict, ...] = ()  # per premise: Pos -> tuple[Pos, ...]

    def principal_formula(self) -> Formula:
        return formula_at(self.conclusion, self.principal[0])

    def cut_formula(self) -> Formula:
        if self.rule != "cut":
            raise PreconditionError(f"cut_formula on a {self.rule} instance")
        return formula_at(self.premises[0], self.active[0][0])


# --- canonical premise synthesis --------------------------------------------


def _splice(items: tuple, index: int, repl: tuple) -> tuple:
    return items[:index] + repl + items[index + 1:]


def premises_for(rule: str, conclusion: Sequent, principal: tuple[Pos, ...],
                 cutf: Formula | None = None) -> list[Sequent]:
    """Canonical premise sequents for a rule applied at the given principal
    position(s) of `conclusion`.  Active formulas go to the front of the
    succedent / the back of the antecedent; decompositions splice in place."""
    ant, suc = conclusion.ant, conclusion.suc
    if rule in LEAF_RULES:
        return []
    if rule == "cut":
        if cutf is None:
            raise PreconditionError("cut premises need the cut formula")
        return [Sequent(ant, (cutf,) + suc), Sequent(ant + (cutf,), suc)]
    if rule in ("w_L", "w_R", "contr_L", "contr_R"):
        (side, i), = principal
        items = conclusion.side(side)
        if rule.startswith("w"):
            new = _splice(items, i, ())
        else:
            new = _splice(items, i, (items[i], items[i]))
        return [Sequent(new, suc) if side == "a" else Sequent(ant, new)]
    (side, i), = principal
    f = formula_at(conclusion, (side, i))
    if rule == "top_L" or rule == "bot_R":
        items = _splice(conclusion.side(side), i, ())
        return [Sequent(items, suc) if side == "a" else Sequent(ant, items)]
    if rule == "and_L":
        return [Sequent(_splice(ant, i, (f.left, f.right)), suc)]
    if rule == "or_R":
        return [Sequent(ant, _splice(suc, i, (f.left, f.right)))]
    if rule == "and_R":
        return [Sequent(ant, _splice(suc, i, (f.left,))),
                Sequent(ant, _splice(suc, i, (f.right,)))]
    if rule == "or_L":
        return [Sequent(_splice(ant, i, (f.left,)), suc),
                Sequent(_splice(ant, i, (f.right,)), suc)]
    if rule == "imp_L":
        return [Sequent(ant, (f.left,) + suc), Sequent(ant + (f.right,), suc)]
    if rule == "imp_R":
        return [Sequent(ant + (f.left,), (f.right,))]
    if rule == "coimp_L":
        return [Sequent((f.left,), (f.right,) + suc)]
    if rule == "coimp_R":
        return [Sequent(ant, (f.left,) + suc), Sequent(ant + (f.right,), suc)]
    if rule == "neg_L":
        return [Sequent(_splice(ant, i, ()), (f.arg,) + suc)]
    if rule == "neg_R":
        return [Sequent(ant + (f.arg,), _splice(suc, i, ()))]
    if rule == "T":
        return [Sequent(_splice(ant, i, (f.arg,)), suc)]
    if rule == "5":
        return [Sequent(ant, _splice(suc, i, (f.arg,)))]
    raise PreconditionError(f"unknown rule {rule!r}")


# --- instance resolution (flow map computation) ------------------------------


def _match_side(concl_items, prem_formulas, actives_needed):
    """Match conclusion occurrences against an actual premise side.

    concl_items: list of (conclusion index, formula) to be matched 1-1;
    actives_needed: Counter of formulas the premise must additionally contain.
    Returns (mapping {concl index -> premise index}, active indices in premise
    order) or an error string.  Matching is stable: the i-th conclusion
    occurrence of a formula takes the i-th unclaimed premise occurrence.
    """
    queues: dict[Formula, list[int]] = {}
    for ci, f in concl_items:
        queues.setdefault(f, []).append(ci)
    need = Counter(actives_needed)
    mapping: dict[int, int] = {}
    actives: list[int] = []
    for pi, f in enumerate(prem_formulas):
        q = queues.get(f)
        if q:
            mapping[q.pop(0)] = pi
        elif need[f] > 0:
            need[f] -= 1
            actives.append(pi)
        else:
            return None, None, f"unmatched premise occurrence {f}"
    leftover = [f for f, q in queues.items() if q]
    if leftover:
        return None, None, f"conclusion occurrence not found in premise: {leftover[0]}"
    if +need:
        missing = next(iter(+need))
        return None, None, f"active formula missing from premise: {missing}"
    return mapping, actives, None


def _expected_premise_shape(rule: str, concl: Sequent, principal, cutf):
    """Per premise: (antecedent context mode, succedent context mode,
    active formulas by side, principal copied here).  Context mode is 'flow'
    or 'dead'."""
    if rule == "cut":
        return [{"a": "flow", "s": "flow", "act_a": [], "act_s": [cutf], "copy": False},
                {"a": "flow", "s": "flow", "act_a": [cutf], "act_s": [], "copy": False}]
    if rule in ("w_L", "w_R"):
        return [{"a": "flow", "s": "flow", "act_a": [], "act_s": [], "copy": False}]
    if rule in ("contr_L", "contr_R"):
        side = "a" if rule == "contr_L" else "s"
        f = formula_at(concl, principal[0])
        d = {"a": "flow", "s": "flow", "act_a": [], "act_s": [], "copy": False}
        d["act_" + side] = [f, f]  # both copies targeted by the contracted occurrence
        return [d]
    f = formula_at(concl, principal[0]) if principal else None
    base = {"a": "flow", "s": "flow", "act_a": [], "act_s": [], "copy": False}

    def prem(**kw):
        d = dict(base)
        d.update(kw)
        return d

    if rule in ("top_L", "bot_R"):
        return [prem()]
    if rule == "and_L":
        return [prem(act_a=[f.left, f.right])]
    if rule == "or_R":
        return [prem(act_s=[f.left, f.right])]
    if rule == "and_R":
        return [prem(act_s=[f.left]), prem(act_s=[f.right])]
    if rule == "or_L":
        return [prem(act_a=[f.left]), prem(act_a=[f.right])]
    if rule == "imp_L":
        return [prem(act_s=[f.left], copy=True), prem(act_a=[f.right], copy=True)]
    if rule == "imp_R":
        return [prem(s="dead", act_a=[f.left], act_s=[f.right])]
    if rule == "coimp_L":
        return [prem(a="dead", act_a=[f.left], act_s=[f.right])]
    if rule == "coimp_R":
        return [prem(act_s=[f.left], copy=True), prem(act_a=[f.right], copy=True)]
    if rule == "neg_L":
        return [prem(act_s=[f.arg])]
    if rule == "neg_R":
        return [prem(act_a=[f.arg])]
    if rule == "T":
        return [prem(act_a=[f.arg])]
    if rule == "5":
        return [prem(act_s=[f.arg])]
    raise PreconditionError(f"unknown rule {rule!r}")


def _principal_diag(rule, concl, principal):
    """Check principal positions against the rule's shape; None if fine."""
    for side, i in principal:
        items = concl.side(side)
        if not 0 <= i < len(items):
            return Diagnostic(rule, "principal position out of range", (("" + side, i),))
    if rule == "init":
        if len(principal) != 2:
            return Diagnostic(rule, "init needs one antecedent and one succedent principal")
        (s1, i1), (s2, i2) = principal
        if {s1, s2} != {"a", "s"}:
            return Diagnostic(rule, "init principal must span both sides")
        fa = formula_at(concl, principal[0])
        fb = formula_at(concl, principal[1])
        if fa != fb:
            return Diagnostic(rule, "init principal formulas differ", tuple(principal))
        if not isinstance(fa, Atom):
            return Diagnostic(rule, "init principal must be atomic", tuple(principal),
                              str(fa))
        return None
    if rule in ("cut", "w_L", "w_R"):
        want = 0 if rule == "cut" else 1
        if len(principal) != want:
            return Diagnostic(rule, "wrong principal arity")
        if rule == "w_L" and principal and principal[0][0] != "a":
            return Diagnostic(rule, "weakened occurrence on wrong side")
        if rule == "w_R" and principal and principal[0][0] != "s":
            return Diagnostic(rule, "weakened occurrence on wrong side")
        return None
    if rule in ("contr_L", "contr_R"):
        if len(principal) != 1:
            return Diagnostic(rule, "wrong principal arity")
        side = "a" if rule == "contr_L" else "s"
        if principal[0][0] != side:
            return Diagnostic(rule, "contracted occurrence on wrong side")
        return None
    shape = PRINCIPAL_SHAPE.get(rule)
    if shape is None:
        return Diagnostic(rule, "unknown rule")
    want_side, ctor = shape
    if len(principal) != 1:
        return Diagnostic(rule, "wrong principal arity")
    (side, i), = principal
    if side != want_side:
        return Diagnostic(rule, "principal on wrong side", (principal[0],))
    f = formula_at(concl, principal[0])
    if not isinstance(f, ctor):
        return Diagnostic(rule, "principal does not match rule pattern",
                          (principal[0],), str(f))
    return None


def resolve_instance(calc: str, rule: str, conclusion: Sequent,
                     premise_seqs, principal, cutf: Formula | None = None):
    """Build a RuleInstance from actual sequents, computing actives and flow
    by stable occurrence matching.  Returns RuleInstance or Diagnostic."""
    if rule not in RULES[calc]:
        return Diagnostic(rule, f"rule not in calculus {calc}")
    premise_seqs = tuple(premise_seqs)
    principal = tuple(principal)
    if len(premise_seqs) != N_PREMISES[rule]:
        return Diagnostic(rule, "wrong number of premises")
    for seq in (conclusion,) + premise_seqs:
        for f in seq.formulas():
            bad = signature_violation(calc, f)
            if bad is not None:
                return Diagnostic(rule, "signature violation", (), str(bad))
    diag = _principal_diag(rule, conclusion, principal)
    if diag is not None:
        return diag
    if rule in LEAF_RULES:
        return RuleInstance(rule, conclusion, (), principal, (), ())
    if rule == "cut" and cutf is None:
        extra = Counter(premise_seqs[0].suc) - Counter(conclusion.suc)
        if len(extra) != 1 or sum(extra.values()) != 1:
            return Diagnostic(rule, "cannot determine cut formula")
        cutf = next(iter(extra))

    shapes = _expected_premise_shape(rule, conclusion, principal, cutf)
    principal_set = set(principal)
    flows = []
    actives = []
    for k, (shape, prem) in enumerate(zip(shapes, premise_seqs)):
        fmap: dict = {}
        act_positions = []
        for side in ("a", "s"):
            concl_items = []
            dead_positions = []
            for i, f in enumerate(conclusion.side(side)):
                pos = (side, i)
                if pos in principal_set:
                    if shape["copy"] and rule in COPYING_RULES:
                        concl_items.append((i, f))
                    elif rule in ("w_L", "w_R"):
                        dead_positions.append(pos)
                    continue
                if shape[side] == "dead":
                    dead_positions.append(pos)
                else:
                    concl_items.append((i, f))
            need = Counter(shape["act_" + side])
            mapping, act_ix, err = _match_side(concl_items, prem.side(side), need)
            if err is not None:
                return Diagnostic(rule, "schema mismatch", (("premise", k),), err)
            if rule in ("contr_L", "contr_R") and side == principal[0][0]:
                # the two matched "actives" are really the contraction targets
                fmap[principal[0]] = tuple((side, i) for i in act_ix)
                act_ix = []
            for ci, pi in mapping.items():
                fmap[(side, ci)] = ((side, pi),)
            for pos in dead_positions:
                fmap[pos] = ()
            act_positions.extend((side, i) for i in act_ix)
        flows.append(fmap)
        actives.append(tuple(act_positions))
    inst = RuleInstance(rule, conclusion, premise_seqs, principal,
                        tuple(actives), tuple(flows))
    diag = _side_conditions(calc, inst)
    if diag is not None:
        return diag
    return inst


def _side_conditions(calc: str, inst: RuleInstance):
    rule = inst.rule
    if rule == "imp_R" and len(inst.premises[0].suc) != 1:
        return Diagnostic(rule, "premise succedent must be the active formula alone")
    if rule == "coimp_L" and len(inst.premises[0].ant) != 1:
        return Diagnostic(rule, "premise antecedent must be the active formula alone")
    if rule == "5":
        ctx = [("a", i) for i in range(len(inst.conclusion.ant))]
        ctx += [("s", i) for i in range(len(inst.conclusion.suc))
                if ("s", i) not in inst.principal]
        for pos in ctx:
            if not isinstance(formula_at(inst.conclusion, pos), Box):
                return Diagnostic(rule, "context must be boxed", (pos,),
                                  str(formula_at(inst.conclusion, pos)))
    if rule == "cut":
        if len(inst.active[0]) != 1 or inst.active[0][0][0] != "s":
            return Diagnostic(rule, "left premise needs the cut formula in the succedent")
        if len(inst.active[1]) != 1 or inst.active[1][0][0] != "a":
            return Diagnostic(rule, "right premise needs the cut formula in the antecedent")
        if formula_at(inst.premises[0], inst.active[0][0]) != \
           formula_at(inst.premises[1], inst.active[1][0]):
            return Diagnostic(rule, "cut formulas differ between premises")
    return None


# --- validation of stored instances ------------------------------------------


def validate_instance(calc: str, inst: RuleInstance):
    """Check a stored instance against its rule schema, side conditions, and
    flow-map well-formedness.  Returns None if ok, else a Diagnostic."""
    rule = inst.rule
    if rule not in RULES[calc]:
        return Diagnostic(rule, f"rule not in calculus {calc}")
    if len(inst.premises) != N_PREMISES[rule]:
        return Diagnostic(rule, "wrong number of premises")
    for seq in (inst.conclusion,) + inst.premises:
        for f in seq.formulas():
            bad = signature_violation(calc, f)
            if bad is not None:
                return Diagnostic(rule, "signature violation", (), str(bad))
    diag = _principal_diag(rule, inst.conclusion, inst.principal)
    if diag is not None:
        return diag
    if rule in LEAF_RULES:
        if inst.flow or inst.active:
            return Diagnostic(rule, "leaf carries premise data")
        return None

    cutf = None
    if rule == "cut":
        if len(inst.active) != 2 or not inst.active[0] or not inst.active[1]:
            return Diagnostic(rule, "cut actives missing")
        pos = inst.active[0][0]
        side, i = pos
        if side != "s" or not 0 <= i < len(inst.premises[0].suc):
            return Diagnostic(rule, "bad cut active position")
        cutf = inst.premises[0].suc[i]
    shapes = _expected_premise_shape(rule, inst.conclusion, inst.principal, cutf)
    if len(inst.flow) != len(inst.premises) or len(inst.active) != len(inst.premises):
        return Diagnostic(rule, "flow/active arity mismatch")
    principal_set = set(inst.principal)

    for k, (shape, prem) in enumerate(zip(shapes, inst.premises)):
        fmap = inst.flow[k]
        covered = Counter()
        # required domain
        domain = set()
        for pos in all_positions(inst.conclusion):
            if pos in principal_set:
                if shape["copy"]:
                    domain.add(pos)
                elif rule in ("w_L", "w_R", "contr_L", "contr_R"):
                    domain.add(pos)
            else:
                domain.add(pos)
        if set(fmap.keys()) != domain:
            return Diagnostic(rule, "flow domain mismatch", (("premise", k),))
        for cpos, targets in fmap.items():
            side = cpos[0]
            if cpos in principal_set:
                if rule in ("w_L", "w_R"):
                    want = 0
                elif rule in ("contr_L", "contr_R"):
                    want = 2
                else:  # copying rules
                    want = 1
            elif shape[side] == "dead":
                want = 0
            else:
                want = 1
            if len(targets) != want:
                return Diagnostic(rule, "flow arity error", (cpos,),
                                  f"expected {want} targets, got {len(targets)}")
            cf = formula_at(inst.conclusion, cpos)
            for tpos in targets:
                tside, ti = tpos
                if tside != side:
                    return Diagnostic(rule, "flow crosses sides", (cpos, tpos))
                if not 0 <= ti < len(prem.side(tside)):
                    return Diagnostic(rule, "flow target out of range", (cpos, tpos))
                if formula_at(prem, tpos) != cf:
                    return Diagnostic(rule, "flow does not preserve the formula",
                                      (cpos, tpos), f"{cf} vs {formula_at(prem, tpos)}")
                covered[tpos] += 1
        # actives (contraction's premise copies are flow targets, not actives)
        need = Counter()
        if rule not in ("contr_L", "contr_R"):
            for f in shape["act_a"]:
                need[("a", f)] += 1
            for f in shape["act_s"]:
                need[("s", f)] += 1
        if rule == "cut":
            need = Counter({("s", cutf): 1}) if k == 0 else Counter({("a", cutf): 1})
        for apos in inst.active[k]:
            aside, ai = apos
            if not 0 <= ai < len(prem.side(aside)):
                return Diagnostic(rule, "active position out of range", (apos,))
            key = (aside, formula_at(prem, apos))
            if need[key] <= 0:
                return Diagnostic(rule, "unexpected active formula", (apos,),
                                  str(key[1]))
            need[key] -= 1
            covered[apos] += 1
        if +need:
            (_, f), = [next(iter(+need))]
            return Diagnostic(rule, "missing active formula", (("premise", k),), str(f))
        for pos in all_positions(prem):
            if covered[pos] != 1:
                return Diagnostic(rule, "premise occurrence not covered exactly once",
                                  (("premise", k), pos), f"covered {covered[pos]} times")
    return _side_conditions(calc, inst)


# --- derived predicates -------------------------------------------------------


def is_analytic_cut(inst: RuleInstance) -> bool:
    """A cut is analytic when its cut formula is a subformula of the multiset
    union of the conclusion's two sides."""
    if inst.rule != "cut":
        raise PreconditionError("is_analytic_cut on a non-cut instance")
    return is_subformula(inst.cut_formula(), inst.conclusion.formulas())


def check_append(calc: str, inst: RuleInstance, x, y) -> bool:
    """Append multiset x to every antecedent and y to every succedent of the
    instance (conclusion and premises, flow extended identically); True iff
    the result still validates.  This is the per-instance compatibility probe."""
    x, y = tuple(x), tuple(y)

    def app(seq: Sequent) -> Sequent:
        return Sequent(seq.ant + x, seq.suc + y)

    na, ns = len(inst.conclusion.ant), len(inst.conclusion.suc)
    new_flow = []
    for k, prem in enumerate(inst.premises):
        fmap = dict(inst.flow[k])
        pa, ps = len(prem.ant), len(prem.suc)
        for j in range(len(x)):
            fmap[("a", na + j)] = (("a", pa + j),)
        for j in range(len(y)):
            fmap[("s", ns + j)] = (("s", ps + j),)
        new_flow.append(fmap)
    inst2 = RuleInstance(inst.rule, app(inst.conclusion),
                         tuple(app(p) for p in inst.premises),
                         inst.principal, inst.active, tuple(new_flow))
    return validate_instance(calc, inst2) is None
