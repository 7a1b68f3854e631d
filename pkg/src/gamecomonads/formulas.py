"""Formula AST for first-order, counting and (graded) modal formulas, with a text syntax.

Text grammar (ASCII, whitespace-insensitive):

    formula := quant | disj
    quant   := (EXISTS | FORALL) var "." formula | (GEQ | LEQ) int var "." formula
    disj    := conj (OR conj)*
    conj    := unary (AND unary)*
    unary   := NOT unary | (DIA | BOX) "[" rel ("," int)? "]" unary | "(" formula ")"
             | quant | TRUE | rel "(" vars? ")" | var "=" var | prop

A quantifier body extends as far to the right as possible.
"""
from __future__ import annotations

import re
from dataclasses import dataclass
from itertools import product as iproduct

from .structures import Structure, StructureError


class Formula:
    __slots__ = ()

    def children(self) -> tuple:
        return ()

    def with_children(self, kids) -> "Formula":
        return self

    def __str__(self):
        return to_text(self)


@dataclass(frozen=True)
class Top(Formula):
    pass


@dataclass(frozen=True)
class Atom(Formula):
    rel: str
    args: tuple

    def __post_init__(self):
        object.__setattr__(self, "args", tuple(self.args))


@dataclass(frozen=True)
class Eq(Formula):
    left: str
    right: str


@dataclass(frozen=True)
class Prop(Formula):
    name: str


def _check_parts(parts, kind):
    parts = tuple(parts)
    if len(parts) < 2:
        raise ValueError(f"{kind} needs at least two parts; use conj/disj for smaller cases")
    return parts


@dataclass(frozen=True)
class And(Formula):
    parts: tuple

    def __post_init__(self):
        object.__setattr__(self, "parts", _check_parts(self.parts, "And"))

    def children(self):
        return self.parts

    def with_children(self, kids):
        return And(tuple(kids))


@dataclass(frozen=True)
class Or(Formula):
    parts: tuple

    def __post_init__(self):
        object.__setattr__(self, "parts", _check_parts(self.parts, "Or"))

    def children(self):
        return self.parts

    def with_children(self, kids):
        return Or(tuple(kids))


@dataclass(frozen=True)
class Not(Formula):
    body: Formula

    def children(self):
        return (self.body,)

    def with_children(self, kids):
        return Not(kids[0])


@dataclass(frozen=True)
class Exists(Formula):
    var: str
    body: Formula

    def children(self):
        return (self.body,)

    def with_children(self, kids):
        return Exists(self.var, kids[0])


@dataclass(frozen=True)
class Forall(Formula):
    var: str
    body: Formula

    def children(self):
        return (self.body,)

    def with_children(self, kids):
        return Forall(self.var, kids[0])


@dataclass(frozen=True)
class CountGE(Formula):
    """At least n distinct witnesses."""

    n: int
    var: str
    body: Formula

    def children(self):
        return (self.body,)

    def with_children(self, kids):
        return CountGE(self.n, self.var, kids[0])


@dataclass(frozen=True)
class CountLE(Formula):
    n: int
    var: str
    body: Formula

    def children(self):
        return (self.body,)

    def with_children(self, kids):
        return CountLE(self.n, self.var, kids[0])


@dataclass(frozen=True)
class Dia(Formula):
    """Some R-successor satisfies body; with grade n, at least n of them do."""

    rel: str
    body: Formula
    grade: int | None = None

    def children(self):
        return (self.body,)

    def with_children(self, kids):
        return Dia(self.rel, kids[0], self.grade)


@dataclass(frozen=True)
class Box(Formula):
    """Every R-successor satisfies body; with grade n, fewer than n successors fail it."""

    rel: str
    body: Formula
    grade: int | None = None

    def children(self):
        return (self.body,)

    def with_children(self, kids):
        return Box(self.rel, kids[0], self.grade)


BINDERS = (Exists, Forall, CountGE, CountLE)
MODAL_OPS = (Dia, Box)


def conj(*parts) -> Formula:
    """Conjunction in normal form: flattened, top-free, sorted by text."""
    flat = []
    for p in parts:
        if isinstance(p, And):
            flat.extend(p.parts)
        elif not isinstance(p, Top):
            flat.append(p)
    if not flat:
        return Top()
    if len(flat) == 1:
        return flat[0]
    return And(tuple(sorted(flat, key=to_text)))


def disj(*parts) -> Formula:
    if len(parts) == 1:
        return parts[0]
    return Or(tuple(parts))


def exists(vars, body: Formula) -> Formula:
    for v in reversed(list(vars)):
        body = Exists(v, body)
    return body


def normalize(f: Formula) -> Formula:
    """Normal form modulo associativity, commutativity and unit of conjunction, applied everywhere."""
    kids = tuple(normalize(c) for c in f.children())
    if isinstance(f, And):
        return conj(*kids)
    return f.with_children(kids) if kids else f


# positions

def subformula(f: Formula, pos) -> Formula:
    for i in pos:
        kids = f.children()
        if not 0 <= i < len(kids):
            raise IndexError(f"no child {i} at {to_text(f)!r}")
        f = kids[i]
    return f


def replace_at(f: Formula, pos, new: Formula) -> Formula:
    pos = tuple(pos)
    if not pos:
        return new
    kids = list(f.children())
    i = pos[0]
    if not 0 <= i < len(kids):
        raise IndexError(f"no child {i} at {to_text(f)!r}")
    kids[i] = replace_at(kids[i], pos[1:], new)
    return f.with_children(tuple(kids))


def positions(f: Formula, pred=lambda g: True, _pre=()):
    """Paths to matching subformulas in preorder."""
    if pred(f):
        yield _pre
    for i, c in enumerate(f.children()):
        yield from positions(c, pred, _pre + (i,))


# variables and metrics

def free_variables(f: Formula) -> frozenset:
    if isinstance(f, Atom):
        return frozenset(f.args)
    if isinstance(f, Eq):
        return frozenset((f.left, f.right))
    if isinstance(f, BINDERS):
        return free_variables(f.body) - {f.var}
    out = frozenset()
    for c in f.children():
        out |= free_variables(c)
    return out


def variables(f: Formula) -> frozenset:
    out = set()
    if isinstance(f, Atom):
        out.update(f.args)
    elif isinstance(f, Eq):
        out.update((f.left, f.right))
    elif isinstance(f, BINDERS):
        out.add(f.var)
    for c in f.children():
        out |= variables(c)
    return frozenset(out)


def variable_count(f: Formula) -> int:
    return len(variables(f))


def quantifier_rank(f: Formula) -> int:
    inner = max((quantifier_rank(c) for c in f.children()), default=0)
    return inner + 1 if isinstance(f, BINDERS) else inner


def modal_depth(f: Formula) -> int:
    inner = max((modal_depth(c) for c in f.children()), default=0)
    return inner + 1 if isinstance(f, MODAL_OPS) else inner


def size(f: Formula) -> int:
    return 1 + sum(size(c) for c in f.children())


def is_existential_positive(f: Formula) -> bool:
    if isinstance(f, (Top, Atom, Eq, Prop)):
        return True
    if isinstance(f, (And, Or, Exists)):
        return all(is_existential_positive(c) for c in f.children())
    return False


def is_conjunctive_query(f: Formula) -> bool:
    if isinstance(f, (Top, Atom)):
        return True
    if isinstance(f, (And, Exists)):
        return all(is_conjunctive_query(c) for c in f.children())
    return False


def is_modal(f: Formula) -> bool:
    if isinstance(f, (Top, Prop)):
        return True
    if isinstance(f, (And, Or, Not, Dia, Box)):
        return all(is_modal(c) for c in f.children())
    return False


def is_counting_free(f: Formula) -> bool:
    return not any(True for _ in positions(f, lambda g: isinstance(g, (CountGE, CountLE))))


# alpha-equivalence

def alpha_equivalent(f: Formula, g: Formula) -> bool:
    """Equal up to renaming of bound variables."""

    def var(v, env):
        for depth in range(len(env) - 1, -1, -1):
            if env[depth] == v:
                return ("bound", len(env) - 1 - depth)
        return ("free", v)

    def eq(a, b, ea, eb):
        if type(a) is not type(b):
            return False
        if isinstance(a, Atom):
            return a.rel == b.rel and len(a.args) == len(b.args) and all(
                var(x, ea) == var(y, eb) for x, y in zip(a.args, b.args))
        if isinstance(a, Eq):
            return var(a.left, ea) == var(b.left, eb) and var(a.right, ea) == var(b.right, eb)
        if isinstance(a, (Top, Prop)):
            return a == b
        if isinstance(a, BINDERS):
            if getattr(a, "n", None) != getattr(b, "n", None):
                return False
            return eq(a.body, b.body, ea + [a.var], eb + [b.var])
        if isinstance(a, MODAL_OPS) and (a.rel, a.grade) != (b.rel, b.grade):
            return False
        ka, kb = a.children(), b.children()
        return len(ka) == len(kb) and all(eq(x, y, ea, eb) for x, y in zip(ka, kb))

    return eq(f, g, [], [])


# substitution

class CaptureError(ValueError):
    pass


def rename_free(f: Formula, old: str, new: str) -> Formula:
    """f[new/old]; raises CaptureError if a binder of new would capture a free occurrence of old."""
    if old == new:
        return f
    if isinstance(f, Atom):
        return Atom(f.rel, tuple(new if a == old else a for a in f.args))
    if isinstance(f, Eq):
        return Eq(new if f.left == old else f.left, new if f.right == old else f.right)
    if isinstance(f, BINDERS):
        if f.var == old:
            return f
        if f.var == new and old in free_variables(f.body):
            raise CaptureError(f"substituting {new} for {old} is captured by the binder of {new}")
    kids = tuple(rename_free(c, old, new) for c in f.children())
    return f.with_children(kids) if kids else f


# model checking

class UnboundVariable(StructureError):
    pass


def model_check(b: Structure, f: Formula, env: dict | None = None, at: int | None = None) -> bool:
    """Evaluate f in b. env maps variable names to elements; at is the current world for modal operators."""
    env = dict(env or {})
    arity = dict(b.vocab.relations)
    succ_cache: dict = {}

    def succ(rel, x):
        key = (rel, x)
        if key not in succ_cache:
            if arity.get(rel) != 2:
                raise StructureError(f"modal operator needs a binary relation, {rel} is not one")
            succ_cache[key] = [y for (u, y) in sorted(b.relations[rel]) if u == x]
        return succ_cache[key]

    def look(v):
        if v not in env:
            raise UnboundVariable(f"unbound variable {v}")
        return env[v]

    def ev(f, w):
        if isinstance(f, Top):
            return True
        if isinstance(f, Atom):
            if f.rel not in arity:
                raise StructureError(f"relation {f.rel} not in vocabulary")
            if arity[f.rel] != len(f.args):
                raise StructureError(f"arity mismatch: {f.rel} has arity {arity[f.rel]}, got {len(f.args)} arguments")
            return tuple(look(a) for a in f.args) in b.relations[f.rel]
        if isinstance(f, Eq):
            return look(f.left) == look(f.right)
        if isinstance(f, Prop):
            if arity.get(f.name) != 1:
                raise StructureError(f"propositional atom {f.name} needs a unary relation")
            return (need_world(w),) in b.relations[f.name]
        if isinstance(f, And):
            return all(ev(c, w) for c in f.parts)
        if isinstance(f, Or):
            return any(ev(c, w) for c in f.parts)
        if isinstance(f, Not):
            return not ev(f.body, w)
        if isinstance(f, BINDERS):
            saved = env.get(f.var, _MISSING)
            try:
                if isinstance(f, Exists):
                    return any(bind(f.var, x) and ev(f.body, w) for x in b.universe)
                if isinstance(f, Forall):
                    return all(bind(f.var, x) and ev(f.body, w) for x in b.universe)
                count = 0
                for x in b.universe:
                    bind(f.var, x)
                    count += ev(f.body, w)
                return count >= f.n if isinstance(f, CountGE) else count <= f.n
            finally:
                if saved is _MISSING:
                    env.pop(f.var, None)
                else:
                    env[f.var] = saved
        if isinstance(f, (Dia, Box)):
            ys = succ(f.rel, need_world(w))
            n = 1 if f.grade is None else f.grade
            if isinstance(f, Dia):
                return sum(1 for y in ys if ev(f.body, y)) >= n
            return sum(1 for y in ys if not ev(f.body, y)) < n
        raise TypeError(f"not a formula: {f!r}")

    def bind(v, x):
        env[v] = x
        return True

    def need_world(w):
        if w is None:
            raise StructureError("modal formula evaluated without a current element")
        return w

    return ev(f, b.point if at is None else at)


_MISSING = object()


def satisfying_assignments(b: Structure, f: Formula, vars_) -> list[tuple]:
    return [t for t in iproduct(b.universe, repeat=len(vars_)) if model_check(b, f, dict(zip(vars_, t)))]


# text syntax

KEYWORDS = {"EXISTS", "FORALL", "GEQ", "LEQ", "AND", "OR", "NOT", "DIA", "BOX", "TRUE"}
_TOKEN = re.compile(r"\s*(?:(?P<num>\d+)|(?P<id>[A-Za-z_][A-Za-z0-9_']*)|(?P<sym>[().,=\[\]]))")


class FormulaSyntaxError(ValueError):
    def __init__(self, message, line, col):
        super().__init__(f"line {line}, column {col}: {message}")
        self.line, self.col = line, col


def _tokens(text: str):
    out = []
    i = 0
    while True:
        m = _TOKEN.match(text, i)
        j = m.start(m.lastindex) if m and m.lastindex else None
        if not m or m.lastindex is None:
            rest = text[i:]
            if rest.strip() == "":
                return out
            k = i + len(rest) - len(rest.lstrip())
            raise FormulaSyntaxError(f"unexpected character {text[k]!r}", *_linecol(text, k))
        kind = m.lastgroup
        out.append((kind, m.group(kind), j))
        i = m.end()


def _linecol(text, offset):
    line = text.count("\n", 0, offset) + 1
    col = offset - (text.rfind("\n", 0, offset) + 1) + 1
    return line, col


class _Parser:
    def __init__(self, text):
        self.text = text
        self.toks = _tokens(text)
        self.i = 0

    def peek(self):
        return self.toks[self.i] if self.i < len(self.toks) else (None, None, len(self.text))

    def error(self, msg, tok=None):
        tok = tok or self.peek()
        return FormulaSyntaxError(msg, *_linecol(self.text, tok[2]))

    def take(self, kind=None, value=None):
        tok = self.peek()
        if tok[0] is None:
            raise self.error("unexpected end of input")
        if (kind and tok[0] != kind) or (value is not None and tok[1] != value):
            want = value or kind
            raise self.error(f"expected {want!r}, found {tok[1]!r}")
        self.i += 1
        return tok

    def at(self, value):
        tok = self.peek()
        return tok[0] in ("id", "sym") and tok[1] == value

    def ident(self):
        tok = self.take("id")
        if tok[1] in KEYWORDS:
            raise self.error(f"keyword {tok[1]} used as a name", tok)
        return tok[1]

    def number(self):
        return int(self.take("num")[1])

    def formula(self):
        if self.peek()[1] in ("EXISTS", "FORALL", "GEQ", "LEQ") and self.peek()[0] == "id":
            return self.quant()
        return self.disj()

    def quant(self):
        kw = self.take("id")[1]
        n = self.number() if kw in ("GEQ", "LEQ") else None
        v = self.ident()
        self.take("sym", ".")
        body = self.formula()
        if kw == "EXISTS":
            return Exists(v, body)
        if kw == "FORALL":
            return Forall(v, body)
        return CountGE(n, v, body) if kw == "GEQ" else CountLE(n, v, body)

    def disj(self):
        parts = [self.conj()]
        while self.at("OR"):
            self.take()
            parts.append(self.conj())
        return parts[0] if len(parts) == 1 else Or(tuple(parts))

    def conj(self):
        parts = [self.unary()]
        while self.at("AND"):
            self.take()
            parts.append(self.unary())
        return parts[0] if len(parts) == 1 else And(tuple(parts))

    def unary(self):
        tok = self.peek()
        if tok[0] is None:
            raise self.error("unexpected end of input")
        if self.at("("):
            self.take()
            f = self.formula()
            self.take("sym", ")")
            return f
        if tok[0] != "id":
            raise self.error(f"unexpected {tok[1]!r}")
        word = tok[1]
        if word == "NOT":
            self.take()
            return Not(self.unary())
        if word in ("DIA", "BOX"):
            self.take()
            self.take("sym", "[")
            rel = self.ident()
            grade = None
            if self.at(","):
                self.take()
                grade = self.number()
                if grade < 1:
                    raise self.error("grade must be at least 1")
            self.take("sym", "]")
            body = self.unary()
            return Dia(rel, body, grade) if word == "DIA" else Box(rel, body, grade)
        if word in ("EXISTS", "FORALL", "GEQ", "LEQ"):
            return self.quant()
        if word == "TRUE":
            self.take()
            return Top()
        name = self.ident()
        if self.at("("):
            self.take()
            args = []
            if not self.at(")"):
                args.append(self.ident())
                while self.at(","):
                    self.take()
                    args.append(self.ident())
            self.take("sym", ")")
            return Atom(name, tuple(args))
        if self.at("="):
            self.take()
            return Eq(name, self.ident())
        return Prop(name)


def parse_formula(text: str) -> Formula:
    p = _Parser(text)
    f = p.formula()
    if p.peek()[0] is not None:
        raise p.error(f"unexpected {p.peek()[1]!r} after formula")
    return f


def to_text(f: Formula) -> str:
    def wrap(g):
        s = to_text(g)
        return f"({s})" if isinstance(g, (And, Or) + BINDERS) else s

    if isinstance(f, Top):
        return "TRUE"
    if isinstance(f, Atom):
        return f"{f.rel}({','.join(f.args)})"
    if isinstance(f, Eq):
        return f"{f.left} = {f.right}"
    if isinstance(f, Prop):
        return f.name
    if isinstance(f, And):
        return " AND ".join(wrap(p) for p in f.parts)
    if isinstance(f, Or):
        return " OR ".join(wrap(p) for p in f.parts)
    if isinstance(f, Not):
        return "NOT " + wrap(f.body)
    if isinstance(f, Exists):
        return f"EXISTS {f.var} . {to_text(f.body)}"
    if isinstance(f, Forall):
        return f"FORALL {f.var} . {to_text(f.body)}"
    if isinstance(f, CountGE):
        return f"GEQ {f.n} {f.var} . {to_text(f.body)}"
    if isinstance(f, CountLE):
        return f"LEQ {f.n} {f.var} . {to_text(f.body)}"
    if isinstance(f, (Dia, Box)):
        op = "DIA" if isinstance(f, Dia) else "BOX"
        g = "" if f.grade is None else f",{f.grade}"
        return f"{op}[{f.rel}{g}] {wrap(f.body)}"
    raise TypeError(f"not a formula: {f!r}")
