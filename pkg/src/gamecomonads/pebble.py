"""The pebbling comonad P_k, materialized up to a play-length bound n."""
from __future__ import annotations

from itertools import product
from typing import Callable

from .comonad import DEFAULT_BUDGET, Comonad, Realized, comparable, is_prefix, require_positive
from .structures import IDENTITY, Structure


class Pebble(Comonad):
    tag = "pebble"

    def __init__(self, k: int, n: int | None = None):
        require_positive(k)
        self.k = k
        self.n = k if n is None else n
        require_positive(self.n, "n")

    def __repr__(self):
        return f"Pebble(k={self.k}, n={self.n})"

    def element(self, move):
        return move[1]

    def retag(self, move, x):
        return (move[0], x)

    def count(self, a):
        m = self.k * a.size
        return sum(m ** j for j in range(1, self.n + 1))

    def plays(self, a):
        moves = [(p, x) for p in range(1, self.k + 1) for x in range(a.size)]
        for j in range(1, self.n + 1):
            yield from product(moves, repeat=j)

    def is_play(self, a, s):
        return isinstance(s, tuple) and 1 <= len(s) <= self.n and all(
            isinstance(m, tuple) and len(m) == 2 and 1 <= m[0] <= self.k and 0 <= m[1] < a.size for m in s)

    def suffix_ok(self, s, t) -> bool:
        """s a prefix of t: the pebble of s's last move is not moved again in t."""
        p = s[-1][0]
        return all(q != p for q, _ in t[len(s):])

    def holds(self, a, name, plays):
        plays = tuple(plays)
        for i, s in enumerate(plays):
            for t in plays[i + 1:]:
                if not comparable(s, t):
                    return False
                lo, hi = (s, t) if len(s) <= len(t) else (t, s)
                if not self.suffix_ok(lo, hi):
                    return False
        return a.holds(name, tuple(self.counit(s) for s in plays))

    def relation_tuples(self, a, name, plays, index):
        m = a.vocab.arity(name)
        rel = a.relations[name]
        for t in plays:
            L = len(t)
            # prefixes still current at the end of t
            active = [i for i in range(L) if self.suffix_ok(t[: i + 1], t)]
            for idx in product(active, repeat=m):
                if L - 1 not in idx:
                    continue
                if tuple(t[i][1] for i in idx) in rel:
                    yield tuple(index[t[: i + 1]] for i in idx)

    def render(self, s, a):
        return "[" + ";".join(f"({p},{a.name(x) if isinstance(x, int) else x})" for p, x in s) + "]"


def pebble_build(a: Structure, k: int, n: int | None = None, budget: int = DEFAULT_BUDGET) -> Realized:
    return Pebble(k, n).build(a, budget)


def pebble_counit(s):
    return s[-1][1]


def pebble_coextension(f: Callable) -> Callable:
    g = f.__getitem__ if isinstance(f, dict) else f
    return lambda s: tuple((s[i][0], g(s[: i + 1])) for i in range(len(s)))


def ef_to_pebble(s) -> tuple:
    return tuple((i + 1, x) for i, x in enumerate(s))


def pebble_is_I_morphism(f, a: Structure, k: int, n: int | None = None) -> bool:
    """f identifies every pair of plays related by the lifted identity relation."""
    return find_pebble_I_violation(f, a, k, n) is None


def find_pebble_I_violation(f, a: Structure, k: int, n: int | None = None):
    g = f.__getitem__ if isinstance(f, dict) else f
    c = Pebble(k, n)
    for t in c.plays(a):
        for j in range(1, len(t)):
            s = t[:j]
            if s[-1][1] == t[-1][1] and c.suffix_ok(s, t) and g(s) != g(t):
                return s, t
    return None


def preserves_lifted_identity(f, a: Structure, k: int, n: int | None = None, budget: int = DEFAULT_BUDGET) -> bool:
    from .structures import add_identity_relation
    base = a if IDENTITY in a.vocab else add_identity_relation(a)
    r = pebble_build(base, k, n, budget)
    g = f.__getitem__ if isinstance(f, dict) else f
    img = [g(s) for s in r.plays]
    return all(img[i] == img[j] for i, j in r.structure.relations[IDENTITY])


def is_non_duplicating(s) -> bool:
    """No prefix has two distinct pebbles currently on the same element."""
    for j in range(1, len(s) + 1):
        cur = {}
        for p, x in s[:j]:
            cur[p] = x
        vals = list(cur.values())
        if len(set(vals)) != len(vals):
            return False
    return True


def check_pebble_comonad_laws(a: Structure, k: int, n: int | None = None, **kw):
    from .laws import check_laws
    return check_laws(Pebble(k, n), a, **kw)


def check_ef_to_pebble(a: Structure, k: int, n: int | None = None, budget: int = DEFAULT_BUDGET):
    """Checks that [a1..aj] -> [(1,a1)..(j,aj)] is a comonad morphism on the plays of a."""
    from .ef import EF
    from .laws import LawCheck, LawReport
    e, p = EF(k), Pebble(k, max(k, n or k))
    report = LawReport(f"ef_to_pebble k={k}")
    plays = list(e.plays(a))

    def first(pred):
        for s in plays:
            if not pred(s):
                return s
        return None

    w = first(lambda s: p.counit(ef_to_pebble(s)) == e.counit(s))
    report.add(LawCheck("counits commute", w is None, w))
    # delta_P . t  versus  t_P . E(t) . delta_E
    w = first(lambda s: p.comultiply(ef_to_pebble(s)) == ef_to_pebble(e.fmap(ef_to_pebble, e.comultiply(s))))
    report.add(LawCheck("comultiplications commute", w is None, w))
    r = e.build(a, budget)
    bad = None
    for name, ts in r.structure.relations.items():
        for tup in ts:
            if not p.holds(a, name, [ef_to_pebble(r.plays[i]) for i in tup]):
                bad = tuple(r.plays[i] for i in tup)
                break
    report.add(LawCheck("homomorphism E_k -> P_k", bad is None, bad))
    return report


__all__ = [
    "Pebble", "pebble_build", "pebble_counit", "pebble_coextension", "ef_to_pebble", "pebble_is_I_morphism",
    "find_pebble_I_violation", "preserves_lifted_identity", "is_non_duplicating", "check_pebble_comonad_laws",
    "check_ef_to_pebble", "is_prefix",
]
