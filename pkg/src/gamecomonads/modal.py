"""The modal comonad M_k on pointed structures with unary and binary relations.

A modal play is stored as ((None, a0), (alpha1, a1), ..., (alphaj, aj)): the
first move carries no label and starts at the point, every later move follows
an alpha-transition.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

from .comonad import DEFAULT_BUDGET, Comonad, Realized
from .structures import Structure, StructureError


def check_modal_vocabulary(a: Structure):
    for n, m in a.vocab.relations:
        if m > 2:
            raise StructureError(f"modal structures allow arity at most 2; {n} has arity {m}")


def successors(a: Structure) -> dict[str, list[list[int]]]:
    out = {}
    for n, m in a.vocab.relations:
        if m == 2:
            succ = [[] for _ in a.universe]
            for x, y in sorted(a.relations[n]):
                succ[x].append(y)
            out[n] = succ
    return out


def unary_profile(a: Structure, x: int) -> frozenset:
    return frozenset(n for n, m in a.vocab.relations if m == 1 and (x,) in a.relations[n])


class Modal(Comonad):
    tag = "modal"

    def __init__(self, k: int):
        if not isinstance(k, int) or k < 0:
            raise StructureError(f"modal depth must be a non-negative integer, got {k!r}")
        self.k = k

    def __repr__(self):
        return f"Modal(k={self.k})"

    def element(self, move):
        return move[1]

    def retag(self, move, x):
        return (move[0], x)

    def _need_point(self, a):
        check_modal_vocabulary(a)
        if a.point is None:
            raise StructureError("modal comonad needs a pointed structure")

    def count(self, a):
        self._need_point(a)
        succ = successors(a)
        ways = {a.point: 1}
        total = 1
        for _ in range(self.k):
            nxt = {}
            for x, c in ways.items():
                for lst in succ.values():
                    for y in lst[x]:
                        nxt[y] = nxt.get(y, 0) + c
            ways = nxt
            total += sum(ways.values())
        return total

    def plays(self, a):
        self._need_point(a)
        succ = successors(a)
        level = [((None, a.point),)]
        for _ in range(self.k + 1):
            yield from level
            nxt = []
            for s in level:
                x = s[-1][1]
                for lab in sorted(succ):
                    for y in succ[lab][x]:
                        nxt.append(s + ((lab, y),))
            level = nxt

    def is_play(self, a, s):
        if not (isinstance(s, tuple) and 1 <= len(s) <= self.k + 1):
            return False
        if s[0] != (None, a.point):
            return False
        for (_, x), (lab, y) in zip(s, s[1:]):
            if lab not in a.vocab or a.vocab.arity(lab) != 2 or (x, y) not in a.relations[lab]:
                return False
        return True

    def holds(self, a, name, plays):
        plays = tuple(plays)
        if a.vocab.arity(name) == 1:
            return a.holds(name, (self.counit(plays[0]),))
        s, t = plays
        return len(t) == len(s) + 1 and t[: len(s)] == s and t[-1][0] == name

    def relation_tuples(self, a, name, plays, index):
        if a.vocab.arity(name) == 1:
            for s in plays:
                if (self.counit(s),) in a.relations[name]:
                    yield (index[s],)
        else:
            for t in plays:
                if len(t) > 1 and t[-1][0] == name:
                    yield (index[t[:-1]], index[t])

    def root_point(self, a):
        return ((None, a.point),)

    def render(self, s, a):
        parts = []
        for lab, x in s:
            if lab is not None:
                parts.append(str(lab))
            parts.append(a.name(x) if isinstance(x, int) else str(x))
        return "[" + "|".join(parts) + "]"


def unravel(a: Structure, k: int, budget: int = DEFAULT_BUDGET) -> Realized:
    return Modal(k).build(a, budget)


def modal_counit(s):
    return s[-1][1]


def modal_coextension(f: Callable) -> Callable:
    g = f.__getitem__ if isinstance(f, dict) else f
    return lambda s: tuple((s[i][0], g(s[: i + 1])) for i in range(len(s)))


def modal_to_pebble2(s) -> tuple:
    """Hand-over-hand: the i-th element of the path goes to pebble (i mod 2) + 1."""
    return tuple(((i % 2) + 1, x) for i, (_, x) in enumerate(s))


def simulation_preorder(a: Structure, b: Structure, k: int, x: int | None = None, y: int | None = None) -> bool:
    """x (default: the point of a) is simulated by y up to depth k."""
    check_modal_vocabulary(a)
    check_modal_vocabulary(b)
    x = a.point if x is None else x
    y = b.point if y is None else y
    if x is None or y is None:
        raise StructureError("simulation needs pointed structures or explicit elements")
    sa, sb = successors(a), successors(b)
    pa = [unary_profile(a, u) for u in a.universe]
    pb = [unary_profile(b, v) for v in b.universe]
    memo: dict = {}

    def sim(u, v, d):
        key = (u, v, d)
        if key in memo:
            return memo[key]
        ok = pa[u] <= pb[v]
        if ok and d > 0:
            for lab, succ in sa.items():
                targets = sb.get(lab)
                for u2 in succ[u]:
                    if targets is None or not any(sim(u2, v2, d - 1) for v2 in targets[v]):
                        ok = False
                        break
                if not ok:
                    break
        memo[key] = ok
        return ok

    return sim(x, y, k)


@dataclass(frozen=True)
class ModalAgreement:
    homomorphism: bool
    simulation: bool

    @property
    def agree(self) -> bool:
        return self.homomorphism == self.simulation


def modal_hom_equiv_check(a: Structure, b: Structure, k: int, budget: int = DEFAULT_BUDGET) -> ModalAgreement:
    from .homs import find_homomorphism
    r = unravel(a, k, budget)
    hom = find_homomorphism(r.structure, b) is not None
    return ModalAgreement(hom, simulation_preorder(a, b, k))


def check_modal_comonad_laws(a: Structure, k: int, **kw):
    from .laws import check_laws
    return check_laws(Modal(k), a, **kw)


@dataclass(eq=False)
class ModalApproximation:
    """Finite stages M_0 .. M_d of the unravelling with their inclusions."""

    base: Structure
    stages: list

    @property
    def depth(self) -> int:
        return len(self.stages) - 1

    @property
    def top(self) -> Realized:
        return self.stages[-1]

    def inclusion(self, i: int, j: int) -> list[int]:
        if i > j:
            raise StructureError("inclusion goes from a lower stage to a higher one")
        lo, hi = self.stages[i], self.stages[j]
        return [hi.index[s] for s in lo.plays]

    def stabilizes(self) -> bool:
        from .homs import find_isomorphism
        nxt = unravel(self.base, self.depth + 1)
        return find_isomorphism(self.top.structure, nxt.structure) is not None


def m_omega_approx(a: Structure, d: int, budget: int = DEFAULT_BUDGET) -> ModalApproximation:
    return ModalApproximation(a, [unravel(a, j, budget) for j in range(d + 1)])


__all__ = [
    "Modal", "unravel", "modal_counit", "modal_coextension", "modal_to_pebble2", "simulation_preorder",
    "modal_hom_equiv_check", "ModalAgreement", "check_modal_comonad_laws", "ModalApproximation",
    "m_omega_approx", "successors", "unary_profile", "check_modal_vocabulary",
]
