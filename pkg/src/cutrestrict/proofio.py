"""Proof serialization: an indented text format and a structured JSON export.

Text format, one node per line, premises indented two spaces under their
conclusion:

    calculus: biint
    p |- p  [cut on 'T']
      p |- T, p  [top_R principal=s0]
      p, T |- p  [top_L principal=a0]
        p |- p  [init principal=a0,s0]

`principal=` markers pin which occurrence a rule acts on; they are written for
every rule that has one and may be omitted on input, in which case the reader
tries each candidate occurrence.  Cut lines carry the cut formula.  Node ids
are assigned in pre-order when a file is read (the `check` command prints
them), so they are stable for a given file.
"""

from __future__ import annotations

import json
import re

from .errors import ProofFormatError
from .formulas import (
    Sequent, format_formula, format_sequent, parse_formula, parse_sequent,
)
from .proofs import Proof, ProofNode, node as make_node
from .rules import (
    BIINT, CALCULI, LEAF_RULES, N_PREMISES, PRINCIPAL_SHAPE, Diagnostic,
    RuleInstance, S5, all_positions, formula_at, resolve_instance,
)


def _pos_str(pos) -> str:
    return f"{pos[0]}{pos[1]}"


def _parse_pos(text: str):
    m = re.fullmatch(r"([as])(\d+)", text)
    if m is None:
        raise ProofFormatError(f"bad occurrence reference {text!r}")
    return (m.group(1), int(m.group(2)))


def _node_line(n: ProofNode, depth: int) -> str:
    tags = [n.rule]
    if n.rule == "cut":
        tags.append(f"on '{format_formula(n.inst.cut_formula())}'")
    elif n.inst.principal:
        tags.append("principal=" + ",".join(_pos_str(p) for p in n.inst.principal))
    return f"{'  ' * depth}{format_sequent(n.sequent)}  [{' '.join(tags)}]"


def format_proof_body(proof: Proof) -> str:
    lines = []

    def walk(n: ProofNode, depth: int):
        lines.append(_node_line(n, depth))
        for c in n.children:
            walk(c, depth + 1)

    walk(proof.root, 0)
    return "\n".join(lines)


def format_proof(calc: str, proof: Proof) -> str:
    return f"calculus: {calc}\n{format_proof_body(proof)}\n"


_LINE_RE = re.compile(r"^(?P<indent>(?:  )*)(?P<seq>.*?)\s*\[(?P<tag>[^]]+)\]\s*$")


def parse_proof(text: str) -> tuple[str, Proof]:
    """Parse the text format; rebuilds and re-validates every instance."""
    lines = [ln for ln in text.splitlines() if ln.strip() and not ln.lstrip().startswith("#")]
    if not lines:
        raise ProofFormatError("empty proof file")
    header = lines[0].strip()
    m = re.fullmatch(r"calculus:\s*(\w+)", header)
    if m is None:
        raise ProofFormatError("first line must be 'calculus: biint|s5'")
    calc = m.group(1)
    if calc not in CALCULI:
        raise ProofFormatError(f"unknown calculus {calc!r}")

    entries = []
    for ln in lines[1:]:
        lm = _LINE_RE.match(ln)
        if lm is None:
            raise ProofFormatError(f"malformed proof line: {ln!r}")
        depth = len(lm.group("indent")) // 2
        seq = parse_sequent(lm.group("seq"))
        tag = lm.group("tag").split()
        rule = tag[0]
        principal = None
        cutf = None
        for extra in tag[1:]:
            if extra.startswith("principal="):
                principal = tuple(_parse_pos(t) for t in extra[len("principal="):].split(","))
            elif extra.startswith("on"):
                pass  # cut formula text follows in quotes
        quoted = re.search(r"on '([^']*)'", lm.group("tag"))
        if quoted:
            cutf = parse_formula(quoted.group(1))
        entries.append((depth, seq, rule, principal, cutf))

    pos = 0

    def build(depth: int) -> ProofNode:
        nonlocal pos
        if pos >= len(entries):
            raise ProofFormatError("unexpected end of proof")
        d, seq, rule, principal, cutf = entries[pos]
        if d != depth:
            raise ProofFormatError(f"bad indentation at line {pos + 2}")
        if rule not in N_PREMISES:
            raise ProofFormatError(f"unknown rule {rule!r}")
        pos += 1
        children = []
        for _ in range(N_PREMISES[rule]):
            children.append(build(depth + 1))
        child_seqs = [c.sequent for c in children]
        inst = _resolve_with_hints(calc, rule, seq, child_seqs, principal, cutf)
        if isinstance(inst, Diagnostic):
            raise ProofFormatError(f"line {pos + 1}: {inst}")
        return make_node(inst, children)

    root = build(0)
    if pos != len(entries):
        raise ProofFormatError("trailing proof lines")
    return calc, Proof(root)


def _principal_candidates(rule: str, seq: Sequent):
    if rule in ("cut",):
        return [()]
    if rule == "init":
        out = []
        for i, f in enumerate(seq.ant):
            for j, g in enumerate(seq.suc):
                if f == g:
                    out.append((("a", i), ("s", j)))
        return out
    if rule in ("w_L", "contr_L"):
        return [(("a", i),) for i in range(len(seq.ant))]
    if rule in ("w_R", "contr_R"):
        return [(("s", i),) for i in range(len(seq.suc))]
    side, ctor = PRINCIPAL_SHAPE[rule]
    items = seq.side(side)
    return [((side, i),) for i, f in enumerate(items) if isinstance(f, ctor)]


def _resolve_with_hints(calc, rule, seq, child_seqs, principal, cutf):
    if principal is not None:
        return resolve_instance(calc, rule, seq, child_seqs, principal, cutf)
    last = Diagnostic(rule, "no viable principal occurrence")
    for cand in _principal_candidates(rule, seq):
        out = resolve_instance(calc, rule, seq, child_seqs, cand, cutf)
        if isinstance(out, RuleInstance):
            return out
        last = out
    return last


# --- JSON ---------------------------------------------------------------------


def proof_to_json(calc: str, proof: Proof) -> str:
    def enc_seq(s: Sequent):
        return {"ant": [format_formula(f) for f in s.ant],
                "suc": [format_formula(f) for f in s.suc]}

    def enc(n: ProofNode):
        inst = n.inst
        return {
            "id": n.nid,
            "rule": inst.rule,
            "sequent": enc_seq(inst.conclusion),
            "premises": [enc_seq(s) for s in inst.premises],
            "principal": [list(p) for p in inst.principal],
            "active": [[list(p) for p in act] for act in inst.active],
            "flow": [{_pos_str(k): [_pos_str(t) for t in v] for k, v in fmap.items()}
                     for fmap in inst.flow],
            "children": [enc(c) for c in n.children],
        }

    return json.dumps({"calculus": calc, "root": enc(proof.root)}, indent=1)


def proof_from_json(text: str) -> tuple[str, Proof]:
    data = json.loads(text)
    calc = data["calculus"]
    if calc not in CALCULI:
        raise ProofFormatError(f"unknown calculus {calc!r}")

    def dec_seq(d) -> Sequent:
        return Sequent(tuple(parse_formula(t) for t in d["ant"]),
                       tuple(parse_formula(t) for t in d["suc"]))

    def dec(d) -> ProofNode:
        inst = RuleInstance(
            d["rule"], dec_seq(d["sequent"]),
            tuple(dec_seq(s) for s in d["premises"]),
            tuple(tuple(p) for p in d["principal"]),
            tuple(tuple(tuple(p) for p in act) for act in d["active"]),
            tuple({_parse_pos(k): tuple(_parse_pos(t) for t in v)
                   for k, v in fmap.items()} for fmap in d["flow"]),
        )
        return make_node(inst, [dec(c) for c in d["children"]])

    return calc, Proof(dec(data["root"]))
