"""Shared machinery for the play comonads.

A play is a tuple of moves. Each comonad says how to read the element out of
a move and how to put a new element into a move while keeping its tag (pebble
index or transition label). Counit, coextension, comultiplication and the
functor action are then the same formulas for all three comonads, and they work
on nested plays (plays over plays) without any materialization.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Iterable, Iterator

from .structures import ResourceLimit, Structure, StructureError

DEFAULT_BUDGET = 200_000


class Comonad:
    tag = "?"

    def element(self, move):
        raise NotImplementedError

    def retag(self, move, x):
        raise NotImplementedError

    # structure maps

    def counit(self, s):
        return self.element(s[-1])

    def coextend(self, f: Callable, s) -> tuple:
        return tuple(self.retag(m, f(s[: i + 1])) for i, m in enumerate(s))

    def coextension(self, f: Callable) -> Callable:
        return lambda s: self.coextend(f, s)

    def comultiply(self, s) -> tuple:
        return self.coextend(lambda p: p, s)

    def fmap(self, h: Callable, s) -> tuple:
        return self.coextend(lambda p: h(self.counit(p)), s)

    # finite universes

    def count(self, a: Structure) -> int:
        raise NotImplementedError

    def plays(self, a: Structure) -> Iterator[tuple]:
        raise NotImplementedError

    def is_play(self, a: Structure, s) -> bool:
        raise NotImplementedError

    def holds(self, a: Structure, name: str, plays) -> bool:
        """Membership of a tuple of plays in the lifted relation."""
        raise NotImplementedError

    def relation_tuples(self, a: Structure, name: str, plays: list, index: dict) -> Iterable[tuple]:
        """All tuples of play ids in the lifted relation; override for speed."""
        from itertools import product
        m = a.vocab.arity(name)
        for tup in product(plays, repeat=m):
            if self.holds(a, name, tup):
                yield tuple(index[s] for s in tup)

    def render(self, s, a: Structure) -> str:
        raise NotImplementedError

    def root_point(self, a: Structure):
        return None

    def build(self, a: Structure, budget: int = DEFAULT_BUDGET) -> "Realized":
        need = self.count(a)
        if need > budget:
            raise ResourceLimit(f"budget exceeded: {self.tag} structure needs {need} elements, budget is {budget}", need)
        plays = list(self.plays(a))
        index = {s: i for i, s in enumerate(plays)}
        rels = {n: set(self.relation_tuples(a, n, plays, index)) for n in a.vocab.names}
        root = self.root_point(a)
        point = index[root] if root is not None else None
        names = tuple(self.render(s, a) for s in plays)
        return Realized(self, a, plays, index, Structure(a.vocab, len(plays), rels, point, names))


@dataclass(eq=False)
class Realized:
    """A materialized comonad image: interned plays plus the structure on their ids."""

    comonad: Comonad
    base: Structure
    plays: list
    index: dict
    structure: Structure

    def id(self, s) -> int:
        return self.index[s]

    def play(self, i: int):
        return self.plays[i]

    def __len__(self):
        return len(self.plays)

    def as_map(self, f: Callable) -> list:
        """Tabulate a function on plays as a list indexed by play id."""
        return [f(s) for s in self.plays]

    def lift_play(self, s):
        """Rewrite a play whose elements are plays of this structure into one over their ids."""
        c = self.comonad
        return tuple(c.retag(m, self.index[c.element(m)]) for m in s)

    def lower_play(self, s):
        c = self.comonad
        return tuple(c.retag(m, self.plays[c.element(m)]) for m in s)


def is_prefix(s, t) -> bool:
    return len(s) <= len(t) and t[: len(s)] == s


def comparable(s, t) -> bool:
    return is_prefix(s, t) or is_prefix(t, s)


def require_positive(k, what="k"):
    if not isinstance(k, int) or k < 1:
        raise StructureError(f"{what} must be a positive integer, got {k!r}")
