"""Canonical conjunctive queries and their rewriting to resource-minimal form.

Rules, applied at a child-index path:

    R1  normalize conjunctions (associativity, commutativity, unit TRUE)
    R2  EXISTS v . (phi AND psi)  ->  (EXISTS v . phi) AND psi      v not free in psi
    R3  EXISTS v . EXISTS w . phi  ->  EXISTS w . EXISTS v . phi
    R4  EXISTS v . phi  ->  EXISTS w . phi[w/v]                     capture-free

Every step returns its result in R1 normal form.
"""
from __future__ import annotations

from dataclasses import dataclass, field

from .decompositions import PebbleForestCover, cover_problems
from .formulas import (
    And, Atom, Box, CaptureError, CountGE, Dia, Exists, Forall, Formula, Not, Or, Prop, Top,
    conj, free_variables, normalize, positions, rename_free, replace_at, subformula, to_text,
)
from .modal import check_modal_vocabulary, successors, unary_profile
from .structures import Forest, Structure, StructureError, gaifman

RULES = ("R1", "R2", "R3", "R4")


class RewriteError(ValueError):
    pass


def var_name(x: int) -> str:
    return f"v{x}"


def canonical_cq(a: Structure, order=None) -> Formula:
    """EXISTS over all elements (in the given order) of the conjunction of all facts of a."""
    order = list(a.universe) if order is None else list(order)
    if sorted(order) != list(a.universe):
        raise StructureError("order must enumerate the universe exactly once")
    facts = [Atom(n, tuple(var_name(x) for x in t)) for n in a.vocab.names for t in sorted(a.relations[n])]
    body = conj(*facts)
    for x in reversed(order):
        body = Exists(var_name(x), body)
    return body


def _conjuncts(f: Formula) -> tuple:
    if isinstance(f, And):
        return f.parts
    if isinstance(f, Top):
        return ()
    return (f,)


def rewrite_step(f: Formula, rule: str, position=(), arg=None) -> Formula:
    """Apply one rule at position. R2 takes the indices of the conjuncts to move out; R4 the new name."""
    pos = tuple(position)
    try:
        g = subformula(f, pos)
    except IndexError as e:
        raise RewriteError(str(e)) from None
    if rule == "R1":
        return normalize(replace_at(f, pos, normalize(g)))
    if not isinstance(g, Exists):
        raise RewriteError(f"{rule} needs an existential at {list(pos)}, found {to_text(g)!r}")
    if rule == "R2":
        parts = _conjuncts(g.body)
        move = sorted(set(arg or ()))
        if not move:
            raise RewriteError("R2 needs at least one conjunct to move")
        if any(not 0 <= i < len(parts) for i in move):
            raise RewriteError(f"R2 conjunct index out of range at {list(pos)}")
        moved = [parts[i] for i in move]
        for m in moved:
            if g.var in free_variables(m):
                raise RewriteError(f"R2 side condition fails: {g.var} is free in {to_text(m)!r}")
        kept = [p for i, p in enumerate(parts) if i not in move]
        new = conj(Exists(g.var, conj(*kept)), *moved)
    elif rule == "R3":
        if not isinstance(g.body, Exists):
            raise RewriteError(f"R3 needs two adjacent existentials at {list(pos)}")
        new = Exists(g.body.var, Exists(g.var, g.body.body))
    elif rule == "R4":
        w = arg
        if not isinstance(w, str) or not w:
            raise RewriteError("R4 needs a new variable name")
        if w != g.var and w in free_variables(g):
            raise RewriteError(f"R4 side condition fails: {w} is free in {to_text(g)!r}")
        try:
            new = Exists(w, rename_free(g.body, g.var, w))
        except CaptureError as e:
            raise RewriteError(f"R4 side condition fails: {e}") from None
    else:
        raise RewriteError(f"unknown rule {rule!r}")
    return normalize(replace_at(f, pos, new))


@dataclass
class RewriteTrace:
    start: Formula
    steps: list = field(default_factory=list)  # (rule, position, arg, result)

    def apply(self, rule, position, arg=None) -> Formula:
        res = rewrite_step(self.result, rule, position, arg)
        self.steps.append((rule, tuple(position), arg, res))
        return res

    @property
    def result(self) -> Formula:
        return self.steps[-1][3] if self.steps else self.start

    @property
    def rules(self) -> set:
        return {s[0] for s in self.steps}

    def to_json(self) -> dict:
        return {"start": to_text(self.start),
                "steps": [{"rule": r, "position": list(p), "arg": a if not isinstance(a, tuple) else list(a),
                           "result": to_text(f)} for r, p, a, f in self.steps]}


def replay_trace(trace: RewriteTrace, allowed=RULES) -> list[Formula]:
    """Recompute every step; raises RewriteError on a disallowed rule or a mismatch."""
    cur = trace.start
    out = [cur]
    for i, (rule, pos, arg, res) in enumerate(trace.steps):
        if rule not in allowed:
            raise RewriteError(f"step {i} uses {rule}, outside {sorted(allowed)}")
        nxt = rewrite_step(cur, rule, pos, arg)
        if nxt != res:
            raise RewriteError(f"step {i} does not reproduce its recorded result")
        cur = nxt
        out.append(cur)
    return out


def _push_in(trace: RewriteTrace, order: list[int]):
    """From the innermost quantifier outward, move out every conjunct not mentioning its variable."""
    for i in range(len(order) - 1, -1, -1):
        pos = (0,) * i
        g = subformula(trace.result, pos)
        assert isinstance(g, Exists) and g.var == var_name(order[i])
        move = [j for j, p in enumerate(_conjuncts(g.body)) if g.var not in free_variables(p)]
        if move:
            trace.apply("R2", pos, tuple(move))


def _check_cover(a: Structure, f: Forest):
    probs = cover_problems(gaifman(a), f)
    if probs:
        raise StructureError("invalid forest cover: " + probs[0])


def minimize_quantifier_rank(a: Structure, cover: Forest, trace: bool = False):
    """Rewrite the canonical query with R1-R3 to quantifier rank at most the cover's height."""
    _check_cover(a, cover)
    t = RewriteTrace(canonical_cq(a))
    order = cover.preorder()
    cur = list(a.universe)
    # R3 bubble sort of the prefix into the preorder of the cover
    rank = {x: i for i, x in enumerate(order)}
    for end in range(len(cur) - 1, 0, -1):
        for i in range(end):
            if rank[cur[i]] > rank[cur[i + 1]]:
                t.apply("R3", (0,) * i)
                cur[i], cur[i + 1] = cur[i + 1], cur[i]
    _push_in(t, order)
    return (t.result, t) if trace else t.result


def pebble_var(p: int) -> str:
    return {1: "x", 2: "y", 3: "z"}.get(p, f"x{p}")


def minimize_variables(a: Structure, cover: PebbleForestCover, trace: bool = False):
    """Rewrite the canonical query (enumerated along the cover) with R1, R2 and R4 to at most k variables."""
    probs = cover.problems(gaifman(a))
    if probs:
        raise StructureError("invalid pebble forest cover: " + probs[0])
    order = cover.forest.preorder()
    t = RewriteTrace(canonical_cq(a, order))
    _push_in(t, order)
    done = set()
    while True:
        todo = [p for p in positions(t.result, lambda g: isinstance(g, Exists) and g.var.startswith("v")
                                     and g.var not in done)]
        if not todo:
            break
        pos = todo[0]
        v = subformula(t.result, pos).var
        done.add(v)
        t.apply("R4", pos, pebble_var(cover.pebbles[int(v[1:])]))
    return (t.result, t) if trace else t.result


# modal queries

def modal_cq(a: Structure, x: int | None = None) -> Formula | None:
    """Modal canonical query of the point; None when a transition cycle is reachable."""
    check_modal_vocabulary(a)
    x = a.point if x is None else x
    if x is None:
        raise StructureError("need a pointed structure")
    succ = successors(a)
    memo: dict = {}
    onstack: set = set()

    def mq(u):
        if u in memo:
            return memo[u]
        if u in onstack:
            return None
        onstack.add(u)
        parts = [Prop(p) for p in sorted(unary_profile(a, u))]
        for lab in sorted(succ):
            for y in succ[lab][u]:
                sub = mq(y)
                if sub is None:
                    return None
                parts.append(Dia(lab, sub))
        onstack.discard(u)
        memo[u] = conj(*parts)
        return memo[u]

    return mq(x)


def standard_translation(f: Formula, x: str = "x", y: str = "y") -> Formula:
    """First-order formula in the free variable x equivalent to the modal formula f; two variables alternate."""
    if isinstance(f, Top):
        return Top()
    if isinstance(f, Prop):
        return Atom(f.name, (x,))
    if isinstance(f, And):
        return And(tuple(standard_translation(p, x, y) for p in f.parts))
    if isinstance(f, Or):
        return Or(tuple(standard_translation(p, x, y) for p in f.parts))
    if isinstance(f, Not):
        return Not(standard_translation(f.body, x, y))
    if isinstance(f, Dia):
        body = And((Atom(f.rel, (x, y)), standard_translation(f.body, y, x)))
        return Exists(y, body) if f.grade is None else CountGE(f.grade, y, body)
    if isinstance(f, Box):
        inner = standard_translation(f.body, y, x)
        if f.grade is None:
            return Forall(y, Or((Not(Atom(f.rel, (x, y))), inner)))
        return Not(CountGE(f.grade, y, And((Atom(f.rel, (x, y)), Not(inner)))))
    raise StructureError(f"not a modal formula: {to_text(f)!r}")


def from_standard_translation(f: Formula, x: str = "x") -> Formula | None:
    """Inverse of standard_translation on its image (None outside it)."""

    def guard(body, var):
        if isinstance(body, And) and len(body.parts) == 2:
            g, rest = body.parts
            if isinstance(g, Atom) and len(g.args) == 2 and g.args == (x, var) and var != x:
                return g.rel, rest
        return None

    if isinstance(f, Top):
        return Top()
    if isinstance(f, Atom):
        return Prop(f.rel) if f.args == (x,) else None
    if isinstance(f, (And, Or)):
        kids = [from_standard_translation(p, x) for p in f.parts]
        return None if None in kids else f.with_children(tuple(kids))
    if isinstance(f, Not):
        if isinstance(f.body, CountGE):
            gd = guard(f.body.body, f.body.var)
            if gd and isinstance(gd[1], Not):
                inner = from_standard_translation(gd[1].body, f.body.var)
                return None if inner is None else Box(gd[0], inner, f.body.n)
        inner = from_standard_translation(f.body, x)
        return None if inner is None else Not(inner)
    if isinstance(f, (Exists, CountGE)):
        gd = guard(f.body, f.var)
        if gd is None:
            return None
        inner = from_standard_translation(gd[1], f.var)
        if inner is None:
            return None
        return Dia(gd[0], inner, f.n if isinstance(f, CountGE) else None)
    if isinstance(f, Forall):
        b = f.body
        if isinstance(b, Or) and len(b.parts) == 2 and isinstance(b.parts[0], Not):
            g = b.parts[0].body
            if isinstance(g, Atom) and len(g.args) == 2 and g.args == (x, f.var) and f.var != x:
                inner = from_standard_translation(b.parts[1], f.var)
                return None if inner is None else Box(g.rel, inner)
        return None
    return None


def is_modal_translation(f: Formula, x: str = "x") -> bool:
    return free_variables(f) <= {x} and from_standard_translation(f, x) is not None
