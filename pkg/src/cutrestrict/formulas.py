"""Formulas and sequents: the term language, subformula relations, duality,
and the concrete syntax (parser and printer).

Grammar:
    atoms        [a-z][a-zA-Z0-9_]*
    constants    T (truth), F (falsity)
    unary        ~ (negation), [] (box); bind tightest
    binary       &  >  |  >  -> , -<   (arrows right-associative, non-mixing)
    sequent      ant_1, ..., ant_m |- suc_1, ..., suc_n   (either side may be empty)

Sequent sides are ordered sequences; multiset equality is a separate predicate
so that occurrence indices stay stable for flow maps.
"""

from __future__ import annotations

import re
from collections import Counter
from dataclasses import dataclass

from .errors import FormulaSyntaxError, SignatureError


@dataclass(frozen=True)
class Formula:
    def __str__(self):
        return format_formula(self)


@dataclass(frozen=True)
class Atom(Formula):
    name: str


@dataclass(frozen=True)
class Top(Formula):
    pass


@dataclass(frozen=True)
class Bot(Formula):
    pass


@dataclass(frozen=True)
class And(Formula):
    left: Formula
    right: Formula


@dataclass(frozen=True)
class Or(Formula):
    left: Formula
    right: Formula


@dataclass(frozen=True)
class Imp(Formula):
    left: Formula
    right: Formula


@dataclass(frozen=True)
class Coimp(Formula):
    left: Formula
    right: Formula


@dataclass(frozen=True)
class Neg(Formula):
    arg: Formula


@dataclass(frozen=True)
class Box(Formula):
    arg: Formula


TOP = Top()
BOT = Bot()

BINARY = (And, Or, Imp, Coimp)
UNARY = (Neg, Box)

_size_cache: dict[Formula, int] = {}
_subf_cache: dict[Formula, frozenset] = {}


def children(f: Formula) -> tuple[Formula, ...]:
    if isinstance(f, BINARY):
        return (f.left, f.right)
    if isinstance(f, UNARY):
        return (f.arg,)
    return ()


def size(f: Formula) -> int:
    """Number of atom, constant and connective nodes."""
    got = _size_cache.get(f)
    if got is None:
        got = 1 + sum(size(c) for c in children(f))
        _size_cache[f] = got
    return got


def subformulas(f: Formula) -> frozenset:
    """All subformulas of f, including f itself."""
    got = _subf_cache.get(f)
    if got is None:
        acc = {f}
        for c in children(f):
            acc |= subformulas(c)
        got = frozenset(acc)
        _subf_cache[f] = got
    return got


def proper_subformulas(f: Formula) -> frozenset:
    return subformulas(f) - {f}


def is_subformula(a: Formula, of) -> bool:
    """True iff a is a subformula of some member of the collection `of`."""
    return any(a in subformulas(g) for g in of)


_TAG_RANK = {Atom: 0, Top: 1, Bot: 2, And: 3, Or: 4, Imp: 5, Coimp: 6, Neg: 7, Box: 8}


def formula_key(f: Formula):
    """Total order on formulas (used for deterministic enumeration)."""
    name = f.name if isinstance(f, Atom) else ""
    return (size(f), _TAG_RANK[type(f)], name, tuple(formula_key(c) for c in children(f)))


# --- sequents ---------------------------------------------------------------


@dataclass(frozen=True)
class Sequent:
    ant: tuple[Formula, ...]
    suc: tuple[Formula, ...]

    def __str__(self):
        return format_sequent(self)

    def side(self, s: str) -> tuple[Formula, ...]:
        return self.ant if s == "a" else self.suc

    def formulas(self) -> tuple[Formula, ...]:
        return self.ant + self.suc


def sequent(ant, suc) -> Sequent:
    return Sequent(tuple(ant), tuple(suc))


def multiset_eq(s1: Sequent, s2: Sequent) -> bool:
    return Counter(s1.ant) == Counter(s2.ant) and Counter(s1.suc) == Counter(s2.suc)


def seq_key(s: Sequent):
    """Order-insensitive key; equal iff sequents are multiset-equal."""
    return (tuple(sorted(map(formula_key, s.ant))), tuple(sorted(map(formula_key, s.suc))))


# --- duality ----------------------------------------------------------------


def dualize(f: Formula) -> Formula:
    """Connective-swapping translation: T/F and &/| swap, arrows swap and flip
    their arguments, atoms are fixed. Defined only on box- and negation-free
    formulas; an involution."""
    if isinstance(f, Atom):
        return f
    if isinstance(f, Top):
        return BOT
    if isinstance(f, Bot):
        return TOP
    if isinstance(f, And):
        return Or(dualize(f.left), dualize(f.right))
    if isinstance(f, Or):
        return And(dualize(f.left), dualize(f.right))
    if isinstance(f, Imp):
        return Coimp(dualize(f.right), dualize(f.left))
    if isinstance(f, Coimp):
        return Imp(dualize(f.right), dualize(f.left))
    raise SignatureError(f"duality is undefined for {type(f).__name__}: {f}")


def dualize_sequent(s: Sequent) -> Sequent:
    """Sides swap, each formula dualized pointwise (order kept)."""
    return Sequent(tuple(dualize(f) for f in s.suc), tuple(dualize(f) for f in s.ant))


# --- printer ----------------------------------------------------------------

_PREC_ARROW, _PREC_OR, _PREC_AND, _PREC_UNARY = 1, 2, 3, 4


def _fmt(f: Formula, min_prec: int) -> str:
    if isinstance(f, Atom):
        return f.name
    if isinstance(f, Top):
        return "T"
    if isinstance(f, Bot):
        return "F"
    if isinstance(f, Neg):
        s = "~" + _fmt(f.arg, _PREC_UNARY)
        return s if min_prec <= _PREC_UNARY else f"({s})"
    if isinstance(f, Box):
        s = "[]" + _fmt(f.arg, _PREC_UNARY)
        return s if min_prec <= _PREC_UNARY else f"({s})"
    if isinstance(f, And):
        s = _fmt(f.left, _PREC_AND) + " & " + _fmt(f.right, _PREC_AND + 1)
        return s if min_prec <= _PREC_AND else f"({s})"
    if isinstance(f, Or):
        s = _fmt(f.left, _PREC_OR) + " | " + _fmt(f.right, _PREC_OR + 1)
        return s if min_prec <= _PREC_OR else f"({s})"
    op = "->" if isinstance(f, Imp) else "-<"
    # Arrows are right-associative and may not mix without parentheses.
    right = f.right
    if isinstance(right, (Imp, Coimp)) and type(right) is type(f):
        rs = _fmt(right, _PREC_ARROW)
    else:
        rs = _fmt(right, _PREC_ARROW + 1)
    s = _fmt(f.left, _PREC_ARROW + 1) + f" {op} " + rs
    return s if min_prec <= _PREC_ARROW else f"({s})"


def format_formula(f: Formula) -> str:
    return _fmt(f, 0)


def format_sequent(s: Sequent) -> str:
    left = ", ".join(format_formula(f) for f in s.ant)
    right = ", ".join(format_formula(f) for f in s.suc)
    return f"{left} |- {right}".strip()


# --- parser -----------------------------------------------------------------

_TOKEN_RE = re.compile(
    r"""\s*(?:
        (?P<turnstile>\|-)
      | (?P<imp>->)
      | (?P<coimp>-<)
      | (?P<box>\[\])
      | (?P<and>&)
      | (?P<or>\|)
      | (?P<neg>~)
      | (?P<lpar>\()
      | (?P<rpar>\))
      | (?P<comma>,)
      | (?P<top>T\b)
      | (?P<bot>F\b)
      | (?P<atom>[a-z][a-zA-Z0-9_]*)
    )""",
    re.VERBOSE,
)


def _tokenize(text: str):
    tokens = []
    pos = 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            rest = text[pos:].strip()
            if not rest:
                break
            raise FormulaSyntaxError(f"unknown token {rest.split()[0]!r}", pos)
        tokens.append((m.lastgroup, m.group().strip(), m.start()))
        pos = m.end()
    return tokens


class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.tokens = _tokenize(text)
        self.pos = 0

    def peek(self):
        return self.tokens[self.pos][0] if self.pos < len(self.tokens) else None

    def next(self):
        if self.pos >= len(self.tokens):
            raise FormulaSyntaxError("unexpected end of input", len(self.text))
        tok = self.tokens[self.pos]
        self.pos += 1
        return tok

    def expect(self, kind):
        tok = self.next()
        if tok[0] != kind:
            raise FormulaSyntaxError(f"expected {kind}, found {tok[1]!r}", tok[2])
        return tok

    def formula(self) -> Formula:
        first = self.or_expr()
        arrow = self.peek()
        if arrow not in ("imp", "coimp"):
            return first
        parts = [first]
        while self.peek() in ("imp", "coimp"):
            kind, text, at = self.next()
            if kind != arrow:
                raise FormulaSyntaxError("mixing -> and -< requires parentheses", at)
            parts.append(self.or_expr())
        ctor = Imp if arrow == "imp" else Coimp
        result = parts[-1]
        for part in reversed(parts[:-1]):
            result = ctor(part, result)
        return result

    def or_expr(self) -> Formula:
        f = self.and_expr()
        while self.peek() == "or":
            self.next()
            f = Or(f, self.and_expr())
        return f

    def and_expr(self) -> Formula:
        f = self.unary()
        while self.peek() == "and":
            self.next()
            f = And(f, self.unary())
        return f

    def unary(self) -> Formula:
        kind = self.peek()
        if kind == "neg":
            self.next()
            return Neg(self.unary())
        if kind == "box":
            self.next()
            return Box(self.unary())
        return self.atom_expr()

    def atom_expr(self) -> Formula:
        kind, text, at = self.next()
        if kind == "atom":
            return Atom(text)
        if kind == "top":
            return TOP
        if kind == "bot":
            return BOT
        if kind == "lpar":
            f = self.formula()
            self.expect("rpar")
            return f
        raise FormulaSyntaxError(f"unexpected token {text!r}", at)

    def formula_list(self, stop_kinds) -> list[Formula]:
        if self.peek() in stop_kinds:
            return []
        out = [self.formula()]
        while self.peek() == "comma":
            self.next()
            out.append(self.formula())
        return out

    def done(self):
        if self.pos < len(self.tokens):
            tok = self.tokens[self.pos]
            raise FormulaSyntaxError(f"trailing input {tok[1]!r}", tok[2])


def parse_formula(text: str) -> Formula:
    p = _Parser(text)
    if p.peek() is None:
        raise FormulaSyntaxError("empty input", 0)
    f = p.formula()
    p.done()
    return f


def parse_sequent(text: str) -> Sequent:
    p = _Parser(text)
    ant = p.formula_list(stop_kinds=("turnstile",))
    p.expect("turnstile")
    suc = p.formula_list(stop_kinds=(None,))
    p.done()
    return Sequent(tuple(ant), tuple(suc))
