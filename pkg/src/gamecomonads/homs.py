"""Homomorphism search and the existential games that decide coKleisli morphisms."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterator

from .structures import (
    ResourceLimit, Structure, StructureError, _same_vocab, is_homomorphism, is_strong_homomorphism,
)


@dataclass
class HomWitness:
    assignment: list
    nodes: int = 0
    backtracks: int = 0

    def __getitem__(self, x):
        return self.assignment[x]


class _Search:
    """Backtracking with forward checking over the tuples of the source structure."""

    def __init__(self, a: Structure, b: Structure, injective=False, respect_point=True, node_limit=None):
        _same_vocab(a, b)
        self.a, self.b = a, b
        self.injective = injective
        self.node_limit = node_limit
        self.nodes = 0
        self.backtracks = 0
        doms = [set(b.universe) for _ in a.universe]
        if respect_point and a.point is not None and b.point is not None:
            doms[a.point] &= {b.point}
        self.cons = []  # (scope, allowed target tuples, same as a set)
        self.touch = [[] for _ in a.universe]
        for n, ts in a.relations.items():
            allowed = tuple(sorted(b.relations[n]))
            for t in ts:
                ci = len(self.cons)
                self.cons.append((t, allowed, b.relations[n]))
                for x in set(t):
                    self.touch[x].append(ci)
        self.doms = doms
        # node consistency for scopes with a single variable
        for t, allowed, _ in self.cons:
            vs = set(t)
            if len(vs) == 1:
                x = t[0]
                doms[x] &= {u[0] for u in allowed if all(c == u[0] for c in u)}

    def _forward(self, doms, assigned, x, v):
        doms = list(doms)
        doms[x] = {v}
        changed = []
        if self.injective:
            for y in range(len(doms)):
                if y != x and y not in assigned and v in doms[y]:
                    doms[y] = doms[y] - {v}
                    if not doms[y]:
                        return None
        for ci in self.touch[x]:
            scope, allowed, allowed_set = self.cons[ci]
            free = {y for y in scope if y not in assigned and y != x}
            if not free:
                img = tuple(v if y == x else assigned[y] for y in scope)
                if img not in allowed_set:
                    return None
            elif len(free) == 1:
                (u,) = free
                ok = set()
                for cand in allowed:
                    good = True
                    val = None
                    for y, c in zip(scope, cand):
                        if y == u:
                            if val is None:
                                val = c
                            elif val != c:
                                good = False
                                break
                        elif (v if y == x else assigned[y]) != c:
                            good = False
                            break
                    if good:
                        ok.add(val)
                nd = doms[u] & ok
                if not nd:
                    return None
                if nd != doms[u]:
                    doms[u] = nd
                    changed.append(u)
        return doms

    def solutions(self) -> Iterator[list]:
        n = self.a.size
        if any(not d for d in self.doms):
            return
        if n == 0:
            yield []
            return
        # iterative depth-first search; each frame holds the candidate values of one variable
        assigned: dict = {}
        stack = []

        def pick(doms):
            best, bsize = None, None
            for y in range(n):
                if y not in assigned:
                    s = len(doms[y])
                    if best is None or s < bsize:
                        best, bsize = y, s
            return best

        x = pick(self.doms)
        stack.append((x, sorted(self.doms[x]), 0, self.doms))
        while stack:
            x, cands, i, doms = stack.pop()
            if i >= len(cands):
                assigned.pop(x, None)
                self.backtracks += 1
                continue
            stack.append((x, cands, i + 1, doms))
            v = cands[i]
            self.nodes += 1
            if self.node_limit is not None and self.nodes > self.node_limit:
                raise ResourceLimit(f"homomorphism search exceeded {self.node_limit} nodes")
            assigned.pop(x, None)
            nd = self._forward(doms, assigned, x, v)
            if nd is None:
                continue
            assigned[x] = v
            if len(assigned) == n:
                yield [assigned[y] for y in range(n)]
                del assigned[x]
                continue
            y = pick(nd)
            stack.append((y, sorted(nd[y]), 0, nd))


def find_homomorphism(a: Structure, b: Structure, node_limit=None) -> HomWitness | None:
    s = _Search(a, b, node_limit=node_limit)
    for f in s.solutions():
        if not is_homomorphism(f, a, b):
            raise AssertionError("search returned a non-homomorphism")
        return HomWitness(f, s.nodes, s.backtracks)
    return None


def iter_homomorphisms(a: Structure, b: Structure, injective=False) -> Iterator[list]:
    yield from _Search(a, b, injective=injective).solutions()


def find_isomorphism(a: Structure, b: Structure) -> list | None:
    if a.vocab != b.vocab or a.size != b.size:
        return None
    if any(len(a.relations[n]) != len(b.relations[n]) for n in a.vocab.names):
        return None
    for f in iter_homomorphisms(a, b, injective=True):
        if is_strong_homomorphism(f, a, b):
            return f
    return None


# existential games

class _PartialHomCheck:
    """Incremental test that adding one pair keeps a partial map a partial homomorphism."""

    def __init__(self, a: Structure, b: Structure, iso=False):
        _same_vocab(a, b)
        self.a, self.b, self.iso = a, b, iso
        self.by_elem_a = [[] for _ in a.universe]
        for n, ts in a.relations.items():
            for t in ts:
                for x in set(t):
                    self.by_elem_a[x].append((n, t))
        if iso:
            self.by_elem_b = [[] for _ in b.universe]
            for n, ts in b.relations.items():
                for t in ts:
                    for y in set(t):
                        self.by_elem_b[y].append((n, t))

    def extend(self, m: dict, x: int, y: int, inv: dict | None = None) -> bool:
        """m (and its inverse inv, for isos) plus (x, y)."""
        if x in m:
            if m[x] != y:
                return False
            return not self.iso or inv.get(y) == x
        if self.iso and y in inv:
            return False
        m2 = dict(m)
        m2[x] = y
        for n, t in self.by_elem_a[x]:
            if all(z in m2 for z in t) and tuple(m2[z] for z in t) not in self.b.relations[n]:
                return False
        if self.iso:
            i2 = dict(inv)
            i2[y] = x
            for n, t in self.by_elem_b[y]:
                if all(z in i2 for z in t) and tuple(i2[z] for z in t) not in self.a.relations[n]:
                    return False
        return True


def _key(m: dict) -> frozenset:
    return frozenset(m.items())


@dataclass
class ExistentialStrategy:
    """Duplicator's responses. EF keys: (position, a). Pebble keys: (position, dropped pair or None, a)."""

    kind: str
    k: int
    table: dict = field(default_factory=dict)

    def to_json(self, a: Structure, b: Structure) -> dict:
        def pos(p):
            return [[a.name(x), b.name(y)] for x, y in sorted(p)]
        rows = []
        for key, resp in sorted(self.table.items(), key=lambda kv: repr(kv[0])):
            row = {"position": pos(key[0]), "move": a.name(key[-1]), "response": b.name(resp)}
            if self.kind == "pebble":
                row["drop"] = None if key[1] is None else [a.name(key[1][0]), b.name(key[1][1])]
            rows.append(row)
        return {"kind": self.kind, "k": self.k, "table": rows}


def exists_ckm_ef(a: Structure, b: Structure, k: int, want_strategy=True):
    """Existential k-round game: Duplicator keeps the induced map a partial homomorphism."""
    chk = _PartialHomCheck(a, b)
    memo: dict = {}
    A, B = list(a.universe), list(b.universe)

    def win(m: dict, r: int) -> bool:
        if r == 0:
            return True
        key = (_key(m), r)
        if key in memo:
            return memo[key]
        ok = True
        for x in A:
            if x in m:
                if not win(m, r - 1):
                    ok = False
                    break
                continue
            found = False
            for y in B:
                if chk.extend(m, x, y):
                    m2 = dict(m)
                    m2[x] = y
                    if win(m2, r - 1):
                        found = True
                        break
            if not found:
                ok = False
                break
        memo[key] = ok
        return ok

    result = win({}, k)
    if not result or not want_strategy:
        return result, None
    strat = ExistentialStrategy("ef", k)
    frontier = [({}, k)]
    seen = set()
    while frontier:
        nxt = []
        for m, r in frontier:
            key = _key(m)
            if r == 0 or key in seen:
                continue
            seen.add(key)
            for x in A:
                if x in m:
                    strat.table[(key, x)] = m[x]
                    continue
                for y in B:
                    if chk.extend(m, x, y):
                        m2 = dict(m)
                        m2[x] = y
                        if win(m2, r - 1):
                            strat.table[(key, x)] = y
                            nxt.append((m2, r - 1))
                            break
        frontier = nxt
    return result, strat


def _windows(a: Structure, b: Structure, k: int, chk) -> set:
    """All partial homomorphisms (or isos, depending on chk) with at most k pairs."""
    out = {frozenset()}
    level = [dict()]
    for _ in range(k):
        nxt = []
        for m in level:
            lo = max(m) + 1 if m else 0
            inv = {y: x for x, y in m.items()}
            for x in range(lo, a.size):
                for y in b.universe:
                    if chk.extend(m, x, y, inv):
                        m2 = dict(m)
                        m2[x] = y
                        out.add(_key(m2))
                        nxt.append(m2)
        level = nxt
    return out


def pebble_fixpoint(a: Structure, b: Structure, k: int, iso=False, rounds=None):
    """Greatest fixpoint of the pebble game on windows; with `rounds`, the finite-round version.

    Returns (surviving windows, response function).
    """
    chk = _PartialHomCheck(a, b, iso=iso)
    W = _windows(a, b, k, chk)
    A, B = list(a.universe), list(b.universe)
    sides = [("A", x) for x in A] + ([("B", y) for y in B] if iso else [])

    def options(S):
        drops = list(S) + ([None] if len(S) < k else [])
        return drops

    def respond(S, drop, side, z, alive):
        base = S - {drop} if drop is not None else S
        for w in (B if side == "A" else A):
            pair = (z, w) if side == "A" else (w, z)
            m = dict(base)
            if pair[0] in m:
                cand = base if m[pair[0]] == pair[1] else None
            else:
                cand = base | {pair}
            if cand is not None and cand in alive:
                return pair
        return None

    def survives(S, alive):
        for drop in options(S):
            for side, z in sides:
                if respond(S, drop, side, z, alive) is None:
                    return False
        return True

    alive = set(W)
    if rounds is None:
        changed = True
        while changed:
            changed = False
            for S in sorted(alive, key=len, reverse=True):
                if S in alive and not survives(S, alive):
                    alive.discard(S)
                    changed = True
        return alive, lambda S, drop, side, z: respond(S, drop, side, z, alive)
    layers = [set(W)]
    for _ in range(rounds):
        prev = layers[-1]
        layers.append({S for S in W if survives(S, prev)})
    return layers, lambda S, drop, side, z, r: respond(S, drop, side, z, layers[r])


def exists_ckm_pebble(a: Structure, b: Structure, k: int, want_strategy=True):
    """Existential k-pebble game, decided on current windows."""
    alive, respond = pebble_fixpoint(a, b, k)
    result = frozenset() in alive
    if not result or not want_strategy:
        return result, None
    strat = ExistentialStrategy("pebble", k)
    todo, seen = [frozenset()], set()
    while todo:
        S = todo.pop()
        if S in seen:
            continue
        seen.add(S)
        for drop in list(S) + ([None] if len(S) < k else []):
            base = S - {drop} if drop is not None else S
            for x in a.universe:
                _, y = respond(S, drop, "A", x)
                strat.table[(S, drop, x)] = y
                todo.append(base | {(x, y)})
    return result, strat


def verify_existential_strategy(strat: ExistentialStrategy, a: Structure, b: Structure) -> bool:
    """Every position reachable by following the table is a partial homomorphism."""
    from .structures import is_partial_hom
    if strat.kind == "ef":
        def walk(m, r):
            if not is_partial_hom(m.items(), a, b):
                return False
            if r == 0:
                return True
            for x in a.universe:
                y = strat.table.get((_key(m), x))
                if y is None or (x in m and m[x] != y):
                    return False
                m2 = dict(m)
                m2[x] = y
                if not walk(m2, r - 1):
                    return False
            return True
        return walk({}, strat.k)
    if strat.kind == "pebble":
        todo, seen = [frozenset()], set()
        while todo:
            S = todo.pop()
            if S in seen:
                continue
            seen.add(S)
            if not is_partial_hom(S, a, b):
                return False
            for drop in list(S) + ([None] if len(S) < strat.k else []):
                base = S - {drop} if drop is not None else S
                for x in a.universe:
                    y = strat.table.get((S, drop, x))
                    if y is None:
                        return False
                    todo.append(base | {(x, y)})
        return True
    raise StructureError(f"unknown strategy kind {strat.kind}")


def exists_ckm_modal(a: Structure, b: Structure, k: int) -> bool:
    from .modal import simulation_preorder
    return simulation_preorder(a, b, k)


def rossman_preorder(a: Structure, b: Structure, k: int, tag: str) -> bool:
    if tag == "ef":
        return exists_ckm_ef(a, b, k, want_strategy=False)[0]
    if tag == "pebble":
        return exists_ckm_pebble(a, b, k, want_strategy=False)[0]
    if tag == "modal":
        return exists_ckm_modal(a, b, k)
    raise StructureError(f"unknown comonad tag {tag!r}")


def equiv_existential(a: Structure, b: Structure, k: int, tag: str) -> bool:
    return rossman_preorder(a, b, k, tag) and rossman_preorder(b, a, k, tag)
