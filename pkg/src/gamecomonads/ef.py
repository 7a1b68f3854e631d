"""The Ehrenfeucht-Fraisse comonad E_k: plays are non-empty words of length at most k."""
from __future__ import annotations

from itertools import product
from typing import Callable

from .comonad import DEFAULT_BUDGET, Comonad, Realized, comparable, is_prefix, require_positive
from .structures import IDENTITY, Structure, StructureError


class EF(Comonad):
    tag = "ef"

    def __init__(self, k: int):
        require_positive(k)
        self.k = k

    def __repr__(self):
        return f"EF(k={self.k})"

    def element(self, move):
        return move

    def retag(self, move, x):
        return x

    def count(self, a):
        n = a.size
        return sum(n ** j for j in range(1, self.k + 1))

    def plays(self, a):
        for j in range(1, self.k + 1):
            yield from product(range(a.size), repeat=j)

    def is_play(self, a, s):
        return isinstance(s, tuple) and 1 <= len(s) <= self.k and all(
            isinstance(x, int) and 0 <= x < a.size for x in s)

    def holds(self, a, name, plays):
        plays = tuple(plays)
        for i, s in enumerate(plays):
            for t in plays[i + 1:]:
                if not comparable(s, t):
                    return False
        return a.holds(name, tuple(self.counit(s) for s in plays))

    def relation_tuples(self, a, name, plays, index):
        # every tuple is a set of prefixes of its longest member t
        m = a.vocab.arity(name)
        rel = a.relations[name]
        for t in plays:
            L = len(t)
            for idx in product(range(L), repeat=m):
                if L - 1 not in idx:
                    continue
                if tuple(t[i] for i in idx) in rel:
                    yield tuple(index[t[: i + 1]] for i in idx)

    def render(self, s, a):
        return "[" + ";".join(_name(a, x) for x in s) + "]"


def _name(a, x):
    return a.name(x) if isinstance(x, int) else str(x)


def ef_build(a: Structure, k: int, budget: int = DEFAULT_BUDGET) -> Realized:
    return EF(k).build(a, budget)


def ef_counit(s):
    return s[-1]


def ef_coextension(f: Callable, k: int | None = None) -> Callable:
    """f* for a map f on plays; f may be a callable or a dict keyed by plays."""
    g = f.__getitem__ if isinstance(f, dict) else f
    return lambda s: tuple(g(s[: i + 1]) for i in range(len(s)))


def ef_comultiplication(s):
    return tuple(s[: i + 1] for i in range(len(s)))


def ef_functor_action(h) -> Callable:
    hh = h.__getitem__ if not callable(h) else h
    return lambda s: tuple(hh(x) for x in s)


def ef_inclusion(k: int, l: int, a: Structure | None = None) -> Callable:
    if k > l:
        raise StructureError(f"inclusion needs k <= l, got k={k}, l={l}")
    return lambda s: s


def find_I_violation(f, plays) -> tuple | None:
    """A comparable pair s, t with equal last elements and f(s) != f(t), if any."""
    g = f.__getitem__ if isinstance(f, dict) else f
    plays = list(plays)
    for t in plays:
        for j in range(1, len(t)):
            s = t[:j]
            if s[-1] == t[-1] and g(s) != g(t):
                return s, t
    return None


def is_I_morphism(f, a: Structure, k: int) -> bool:
    """The identity discipline: s a prefix of t with the same last element forces f(s) = f(t)."""
    return find_I_violation(f, EF(k).plays(a)) is None


def preserves_lifted_identity(f, a: Structure, k: int, budget: int = DEFAULT_BUDGET) -> bool:
    """Same question, asked as preservation of I on the lift of a with the identity relation."""
    from .structures import add_identity_relation
    base = a if IDENTITY in a.vocab else add_identity_relation(a)
    r = ef_build(base, k, budget)
    g = f.__getitem__ if isinstance(f, dict) else f
    img = [g(s) for s in r.plays]
    return all(img[i] == img[j] for i, j in r.structure.relations[IDENTITY])


def check_comonad_laws(a: Structure, k: int, **kw):
    from .laws import check_laws
    return check_laws(EF(k), a, **kw)


__all__ = [
    "EF", "ef_build", "ef_counit", "ef_coextension", "ef_comultiplication", "ef_functor_action",
    "ef_inclusion", "is_I_morphism", "find_I_violation", "preserves_lifted_identity", "check_comonad_laws",
    "is_prefix",
]
