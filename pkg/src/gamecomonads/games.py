"""Back-and-forth, counting and modal comparison games, and spans of open pathwise embeddings."""
from __future__ import annotations

from dataclasses import dataclass, field
from itertools import product as _cartesian
from typing import Callable

from .comonad import DEFAULT_BUDGET
from .ef import EF
from .homs import _PartialHomCheck, _key, pebble_fixpoint
from .modal import Modal, check_modal_vocabulary, successors, unary_profile
from .pebble import Pebble
from .structures import (
    IDENTITY, Forest, ResourceLimit, Structure, StructureError, TreeStructure, add_identity_relation,
    is_homomorphism, is_partial_iso,
)

DEFAULT_MAX_POSITIONS = 2_000_000


@dataclass
class BfStrategy:
    """Duplicator's responses in a back-and-forth game.

    EF keys are (position, side, element); pebble keys are (window, pebble dropped or None, side, element).
    The response is the element played on the other side.
    """

    kind: str
    k: int
    table: dict = field(default_factory=dict)
    respond: Callable | None = None
    rounds: int | None = None

    def to_json(self, a: Structure, b: Structure) -> dict:
        def pos(p):
            return [[a.name(x), b.name(y)] for x, y in sorted(p)]
        rows = []
        for key, resp in sorted(self.table.items(), key=lambda kv: repr(kv[0])):
            side, z = key[-2], key[-1]
            row = {"position": pos(key[0]), "side": side,
                   "move": (a if side == "A" else b).name(z),
                   "response": (b if side == "A" else a).name(resp)}
            if self.kind == "pebble":
                row["drop"] = None if key[1] is None else [a.name(key[1][0]), b.name(key[1][1])]
            rows.append(row)
        return {"kind": self.kind, "k": self.k, "rounds": self.rounds, "table": rows}


def ef_bf_game(a: Structure, b: Structure, k: int, want_strategy=True, max_positions=DEFAULT_MAX_POSITIONS):
    """k-round Ehrenfeucht-Fraisse game; Duplicator keeps the induced relation a partial isomorphism."""
    chk = _PartialHomCheck(a, b, iso=True)
    memo: dict = {}

    def responses(m, inv, side, z):
        for w in (b.universe if side == "A" else a.universe):
            x, y = (z, w) if side == "A" else (w, z)
            if chk.extend(m, x, y, inv):
                yield x, y

    def win(m, inv, r):
        if r == 0:
            return True
        key = (_key(m), r)
        if key in memo:
            return memo[key]
        if len(memo) > max_positions:
            raise ResourceLimit(f"back-and-forth game exceeded {max_positions} positions")
        ok = True
        for side, zs in (("A", a.universe), ("B", b.universe)):
            for z in zs:
                if not any(win(*_ext(m, inv, x, y), r - 1) for x, y in responses(m, inv, side, z)):
                    ok = False
                    break
            if not ok:
                break
        memo[key] = ok
        return ok

    result = win({}, {}, k)
    if not result or not want_strategy:
        return result, None
    strat = BfStrategy("ef", k)
    frontier, seen = [({}, {}, k)], set()
    while frontier:
        nxt = []
        for m, inv, r in frontier:
            key = _key(m)
            if r == 0 or key in seen:
                continue
            seen.add(key)
            for side, zs in (("A", a.universe), ("B", b.universe)):
                for z in zs:
                    for x, y in responses(m, inv, side, z):
                        m2, i2 = _ext(m, inv, x, y)
                        if win(m2, i2, r - 1):
                            strat.table[(key, side, z)] = y if side == "A" else x
                            nxt.append((m2, i2, r - 1))
                            break
        frontier = nxt
    return result, strat


def _ext(m, inv, x, y):
    m2, i2 = dict(m), dict(inv)
    m2[x] = y
    i2[y] = x
    return m2, i2


def pebble_bf_game(a: Structure, b: Structure, k: int, rounds: int | None = None, want_strategy=True):
    """k-pebble game. Without `rounds` Duplicator must survive forever (greatest fixpoint)."""
    res, respond = pebble_fixpoint(a, b, k, iso=True, rounds=rounds)
    result = frozenset() in (res if rounds is None else res[rounds])
    if not result or not want_strategy:
        return result, None
    strat = BfStrategy("pebble", k, rounds=rounds)
    if rounds is None:
        strat.respond = lambda S, drop, side, z, r=None: respond(S, drop, side, z)
    else:
        strat.respond = lambda S, drop, side, z, r: respond(S, drop, side, z, r)
    # tabulate over reachable windows
    todo, seen = [(frozenset(), rounds)], set()
    while todo:
        S, r = todo.pop()
        if (S, r) in seen or (r is not None and r == 0):
            continue
        seen.add((S, r))
        for drop in list(S) + ([None] if len(S) < k else []):
            base = S - {drop} if drop is not None else S
            for side, zs in (("A", a.universe), ("B", b.universe)):
                for z in zs:
                    pair = strat.respond(S, drop, side, z, None if r is None else r - 1)
                    if (S, drop, side, z) not in strat.table:
                        strat.table[(S, drop, side, z)] = pair[1] if side == "A" else pair[0]
                    todo.append((base | {pair}, None if r is None else r - 1))
    return result, strat


def bisim_game(a: Structure, b: Structure, k: int, x=None, y=None) -> bool:
    """Bounded bisimilarity of the two points."""
    return _Bisim(a, b).bisim(a.point if x is None else x, b.point if y is None else y, k)


class _Bisim:
    def __init__(self, a: Structure, b: Structure):
        check_modal_vocabulary(a)
        check_modal_vocabulary(b)
        if a.vocab != b.vocab:
            raise StructureError("vocabulary mismatch")
        self.a, self.b = a, b
        self.sa, self.sb = successors(a), successors(b)
        self.pa = [unary_profile(a, u) for u in a.universe]
        self.pb = [unary_profile(b, v) for v in b.universe]
        self.memo: dict = {}
        self.gmemo: dict = {}

    def bisim(self, u, v, d) -> bool:
        key = (u, v, d)
        if key in self.memo:
            return self.memo[key]
        ok = self.pa[u] == self.pb[v]
        if ok and d > 0:
            for lab in self.sa:
                su, sv = self.sa[lab][u], self.sb[lab][v]
                if not all(any(self.bisim(u2, v2, d - 1) for v2 in sv) for u2 in su):
                    ok = False
                    break
                if not all(any(self.bisim(u2, v2, d - 1) for u2 in su) for v2 in sv):
                    ok = False
                    break
        self.memo[key] = ok
        return ok

    def graded(self, u, v, d) -> bool:
        key = (u, v, d)
        if key in self.gmemo:
            return self.gmemo[key]
        ok = self.pa[u] == self.pb[v]
        if ok and d > 0:
            for lab in self.sa:
                su, sv = self.sa[lab][u], self.sb[lab][v]
                if len(su) != len(sv):
                    ok = False
                    break
                adj = [[j for j, v2 in enumerate(sv) if self.graded(u2, v2, d - 1)] for u2 in su]
                if maximum_matching(adj, len(sv)) < len(su):
                    ok = False
                    break
        self.gmemo[key] = ok
        return ok


def graded_bisim_game(a: Structure, b: Structure, k: int, x=None, y=None) -> bool:
    return _Bisim(a, b).graded(a.point if x is None else x, b.point if y is None else y, k)


def maximum_matching(adj: list[list[int]], n_right: int) -> int:
    """Size of a maximum matching in a bipartite graph given by left adjacency lists (augmenting paths)."""
    match_r = [-1] * n_right

    def augment(u, seen):
        for v in adj[u]:
            if v not in seen:
                seen.add(v)
                if match_r[v] < 0 or augment(match_r[v], seen):
                    match_r[v] = u
                    return True
        return False

    return sum(1 for u in range(len(adj)) if augment(u, set()))


def bijection_game(a: Structure, b: Structure, k: int, max_positions=DEFAULT_MAX_POSITIONS) -> bool:
    """k-round bijection game. Duplicator's bijection is found by bipartite matching, not enumeration."""
    if a.size != b.size:
        return False
    chk = _PartialHomCheck(a, b, iso=True)
    memo: dict = {}
    n = a.size

    def win(m, inv, r):
        if r == 0:
            return True
        key = (_key(m), r)
        if key in memo:
            return memo[key]
        if len(memo) > max_positions:
            raise ResourceLimit(f"bijection game exceeded {max_positions} positions")
        adj = []
        for x in a.universe:
            adj.append([y for y in b.universe if chk.extend(m, x, y, inv) and win(*_ext(m, inv, x, y), r - 1)])
        ok = maximum_matching(adj, n) == n
        memo[key] = ok
        return ok

    return win({}, {}, k)


def pebble_bijection_game(a: Structure, b: Structure, k: int, rounds: int | None = None) -> bool:
    """k-pebble bijection game on windows; survive forever unless `rounds` is given."""
    if a.size != b.size:
        return False
    from .homs import _windows
    chk = _PartialHomCheck(a, b, iso=True)
    W = _windows(a, b, k, chk)
    n = a.size

    def survives(S, alive):
        for drop in list(S) + ([None] if len(S) < k else []):
            base = S - {drop} if drop is not None else S
            m = dict(base)
            adj = []
            for x in a.universe:
                if x in m:
                    adj.append([m[x]] if base in alive else [])
                else:
                    adj.append([y for y in b.universe if (base | {(x, y)}) in alive])
            if maximum_matching(adj, n) < n:
                return False
        return True

    if rounds is None:
        alive = set(W)
        changed = True
        while changed:
            changed = False
            for S in sorted(alive, key=len, reverse=True):
                if S in alive and not survives(S, alive):
                    alive.discard(S)
                    changed = True
        return frozenset() in alive
    layer = set(W)
    for _ in range(rounds):
        layer = {S for S in W if survives(S, layer)}
    return frozenset() in layer


# tree-ordered structures and open pathwise embeddings

def _clean(s: Structure, chain) -> bool:
    """A chain is the image of a path embedding only if the identity relation is trivial on it."""
    if IDENTITY not in s.vocab:
        return True
    rel = s.relations[IDENTITY]
    for i, x in enumerate(chain):
        for y in chain[i + 1:]:
            if (x, y) in rel or (y, x) in rel:
                return False
    return True


def _strong_injective_on(f, chain, X: Structure, Y: Structure) -> bool:
    img = [f[x] for x in chain]
    if len(set(img)) != len(img):
        return False
    for name, m in X.vocab.relations:
        rx, ry = X.relations[name], Y.relations[name]
        for idx in _cartesian(range(len(chain)), repeat=m):
            src = tuple(chain[i] for i in idx)
            tgt = tuple(img[i] for i in idx)
            if (src in rx) != (tgt in ry):
                return False
    return True


def open_pathwise_embedding_failure(f, X: TreeStructure, Y: TreeStructure) -> str | None:
    """Reason f is not an open pathwise embedding, or None."""
    sx, sy = X.structure, Y.structure
    fx, fy = X.forest, Y.forest
    if not is_homomorphism(f, sx, sy):
        return "not a homomorphism"
    for x in sx.universe:
        p = fx.parent[x]
        if p is None and fy.parent[f[x]] is not None:
            return f"root {sx.name(x)} not sent to a root"
        if p is not None and fy.parent[f[x]] != f[p]:
            return f"covering pair {sx.name(p)} < {sx.name(x)} not preserved"
        if X.labels is not None and Y.labels is not None and X.labels[x] != Y.labels[f[x]]:
            return f"label of {sx.name(x)} not preserved"
    chx, chy = fx.children(), fy.children()
    # pathwise embedding on every chain that is a path
    chains = {}
    for x in sx.universe:
        c = fx.chain(x)
        if _clean(sx, c):
            chains[x] = c
            if not _strong_injective_on(f, c, sx, sy):
                return f"branch to {sx.name(x)} is not embedded"
    # path lifting, including from the empty path
    starts = [(None, [])] + [(x, c) for x, c in chains.items()]
    for x, c in starts:
        img = [f[z] for z in c]
        above = fy.roots() if x is None else chy[f[x]]
        below = fx.roots() if x is None else chx[x]
        for y2 in above:
            if not _clean(sy, img + [y2]):
                continue
            if not any(f[x2] == y2 and _clean(sx, c + [x2]) for x2 in below):
                where = "the root" if x is None else sx.name(x)
                return f"extension by {sy.name(y2)} at {where} cannot be lifted"
    return None


def is_open_pathwise_embedding(f, X: TreeStructure, Y: TreeStructure) -> bool:
    return open_pathwise_embedding_failure(f, X, Y) is None


def play_tree(realized, labels: Callable | None = None) -> TreeStructure:
    """A realized comonad structure ordered by prefix."""
    parent = []
    for s in realized.plays:
        parent.append(realized.index[s[:-1]] if len(s) > 1 else None)
    labs = tuple(labels(s) for s in realized.plays) if labels else None
    return TreeStructure(realized.structure, Forest(tuple(parent)), labs)


@dataclass(eq=False)
class SpanCertificate:
    tag: str
    k: int
    carrier: TreeStructure
    p: list
    q: list
    left: TreeStructure
    right: TreeStructure
    left_plays: list
    right_plays: list
    rounds: int | None = None

    def check(self) -> tuple[str | None, str | None]:
        return (open_pathwise_embedding_failure(self.p, self.carrier, self.left),
                open_pathwise_embedding_failure(self.q, self.carrier, self.right))

    @property
    def valid(self) -> bool:
        return self.check() == (None, None)

    def to_json(self) -> dict:
        lp = self.left.structure
        rp = self.right.structure
        nodes = []
        for i in range(self.carrier.structure.size):
            nodes.append({"parent": self.carrier.forest.parent[i], "left": lp.name(self.p[i]),
                          "right": rp.name(self.q[i])})
        from .io import SCHEMA
        return {"schema": SCHEMA, "kind": "span", "comonad": self.tag, "k": self.k, "rounds": self.rounds, "nodes": nodes}


def _carrier(pairs: list, parent: list, X, Y, labels=None) -> TreeStructure:
    """Substructure of the product on the given node pairs of X x Y."""
    sx, sy = X.structure, Y.structure
    by_left: dict = {}
    for i, (u, _) in enumerate(pairs):
        by_left.setdefault(u, []).append(i)
    rels = {}
    for name in sx.vocab.names:
        out = set()
        ry = sy.relations[name]
        for t in sx.relations[name]:
            if all(u in by_left for u in t):
                for combo in _cartesian(*(by_left[u] for u in t)):
                    if tuple(pairs[i][1] for i in combo) in ry:
                        out.add(combo)
        rels[name] = out
    names = tuple(f"({sx.name(u)},{sy.name(v)})" for u, v in pairs)
    point = 0 if (sx.point is not None and pairs) else None
    st = Structure(sx.vocab, len(pairs), rels, point, names)
    return TreeStructure(st, Forest(tuple(parent)), labels)


def strategy_to_span(a: Structure, b: Structure, k: int, strategy, tag: str, rounds: int | None = None,
                     budget: int = DEFAULT_BUDGET) -> SpanCertificate:
    """The plays that follow a Duplicator strategy, as a span between the two play trees."""
    if strategy is None:
        raise StructureError("no winning strategy supplied")
    if tag == "ef":
        return _ef_span(a, b, k, strategy, budget)
    if tag == "pebble":
        if rounds is None:
            raise StructureError("a round cap is required for pebble spans")
        return _pebble_span(a, b, k, strategy, rounds, budget)
    if tag == "modal":
        return _modal_span(a, b, k, strategy, budget)
    raise StructureError(f"unknown comonad tag {tag!r}")


def _play_trees(a, b, k, tag, rounds, budget):
    """The two realized play structures and their trees as used by span certificates."""
    if tag == "modal":
        c = Modal(k)
        ra, rb = c.build(a, budget), c.build(b, budget)
        return ra, rb, play_tree(ra), play_tree(rb)
    a_, b_ = add_identity_relation(a), add_identity_relation(b)
    if tag == "ef":
        c = EF(k)
        ra, rb = c.build(a_, budget), c.build(b_, budget)
        return ra, rb, play_tree(ra), play_tree(rb)
    c = Pebble(k, rounds)
    ra, rb = c.build(a_, budget), c.build(b_, budget)
    lab = lambda s: s[-1][0]  # noqa: E731
    return ra, rb, play_tree(ra, lab), play_tree(rb, lab)


def span_from_json(d: dict, a: Structure, b: Structure, budget: int = DEFAULT_BUDGET) -> SpanCertificate:
    """Rebuild a serialized span against the two structures so it can be checked again."""
    tag, k, rounds = d["comonad"], d["k"], d.get("rounds")
    if tag not in ("ef", "pebble", "modal"):
        raise StructureError(f"unknown comonad tag {tag!r}")
    if tag == "pebble" and rounds is None:
        raise StructureError("pebble span without a round cap")
    ra, rb, X, Y = _play_trees(a, b, k, tag, rounds, budget)
    left = {n: i for i, n in enumerate(ra.structure.names)}
    right = {n: i for i, n in enumerate(rb.structure.names)}
    p, q, parent = [], [], []
    for i, node in enumerate(d["nodes"]):
        try:
            p.append(left[node["left"]])
            q.append(right[node["right"]])
        except KeyError:
            raise StructureError(f"span node {i} names an unknown play") from None
        parent.append(node["parent"])
    pairs = list(zip(p, q))
    labels = tuple(ra.plays[u][-1][0] for u in p) if tag == "pebble" else None
    R = _carrier(pairs, parent, X, Y, labels)
    return SpanCertificate(tag, k, R, p, q, X, Y, ra.plays, rb.plays, rounds)


def _ef_span(a, b, k, strat: BfStrategy, budget):
    ra, rb, X, Y = _play_trees(a, b, k, "ef", None, budget)
    pairs, parent = [], []
    stack = [((), (), None)]
    while stack:
        s, t, par = stack.pop()
        if s:
            idx = len(pairs)
            pairs.append((ra.index[s], rb.index[t]))
            parent.append(par)
        else:
            idx = None
        if len(s) == k:
            continue
        m = dict(zip(s, t))
        key = _key(m)
        kids = []
        for side, zs in (("A", a.universe), ("B", b.universe)):
            for z in zs:
                w = strat.table.get((key, side, z))
                if w is None:
                    raise StructureError(f"strategy has no response at a reachable position ({side} {z})")
                x, y = (z, w) if side == "A" else (w, z)
                kids.append((s + (x,), t + (y,)))
        for s2, t2 in sorted(set(kids), reverse=True):
            stack.append((s2, t2, idx))
    R = _carrier(pairs, parent, X, Y)
    return SpanCertificate("ef", k, R, [u for u, _ in pairs], [v for _, v in pairs], X, Y, ra.plays, rb.plays)


def _current(s) -> dict:
    cur = {}
    for p, x in s:
        cur[p] = x
    return cur


def _window(s, t) -> frozenset:
    cs, ct = _current(s), _current(t)
    return frozenset((cs[p], ct[p]) for p in cs)


def _pebble_span(a, b, k, strat: BfStrategy, rounds, budget):
    ra, rb, X, Y = _play_trees(a, b, k, "pebble", rounds, budget)
    pairs, parent, labels = [], [], []
    stack = [((), (), None)]
    while stack:
        s, t, par = stack.pop()
        if s:
            idx = len(pairs)
            pairs.append((ra.index[s], rb.index[t]))
            parent.append(par)
            labels.append(s[-1][0])
        else:
            idx = None
        if len(s) == rounds:
            continue
        S = _window(s, t)
        cs, ct = _current(s), _current(t)
        kids = []
        for p in range(1, k + 1):
            if p in cs:
                pair = (cs[p], ct[p])
                others = [q for q in cs if q != p and (cs[q], ct[q]) == pair]
                drop = None if others else pair
            else:
                drop = None
            for side, zs in (("A", a.universe), ("B", b.universe)):
                for z in zs:
                    left = None if strat.rounds is None else strat.rounds - len(s) - 1
                    got = strat.respond(S, drop, side, z, left)
                    if got is None:
                        raise StructureError("strategy has no response at a reachable position")
                    x, y = got
                    kids.append((s + ((p, x),), t + ((p, y),)))
        for s2, t2 in sorted(set(kids), reverse=True):
            stack.append((s2, t2, idx))
    R = _carrier(pairs, parent, X, Y, tuple(labels))
    return SpanCertificate("pebble", k, R, [u for u, _ in pairs], [v for _, v in pairs], X, Y, ra.plays, rb.plays,
                           rounds)


def bisim_strategy(a: Structure, b: Structure, k: int):
    """Responses for the bisimulation game as a callable, or None when Spoiler wins."""
    bis = _Bisim(a, b)
    if not bis.bisim(a.point, b.point, k):
        return None

    def respond(u, v, d, side, lab, z):
        if side == "A":
            for v2 in bis.sb[lab][v]:
                if bis.bisim(z, v2, d):
                    return v2
        else:
            for u2 in bis.sa[lab][u]:
                if bis.bisim(u2, z, d):
                    return u2
        return None
    return respond


def _modal_span(a, b, k, respond, budget):
    ra, rb, X, Y = _play_trees(a, b, k, "modal", None, budget)
    sa, sb = successors(a), successors(b)
    pairs, parent = [], []
    stack = [(((None, a.point),), ((None, b.point),), None)]
    while stack:
        s, t, par = stack.pop()
        idx = len(pairs)
        pairs.append((ra.index[s], rb.index[t]))
        parent.append(par)
        depth = len(s) - 1
        if depth == k:
            continue
        u, v = s[-1][1], t[-1][1]
        kids = []
        for lab in sorted(sa):
            for u2 in sa[lab][u]:
                v2 = respond(u, v, k - depth - 1, "A", lab, u2)
                kids.append((s + ((lab, u2),), t + ((lab, v2),)))
            for v2 in sb[lab][v]:
                u2 = respond(u, v, k - depth - 1, "B", lab, v2)
                kids.append((s + ((lab, u2),), t + ((lab, v2),)))
        for s2, t2 in sorted(set(kids), reverse=True):
            stack.append((s2, t2, idx))
    R = _carrier(pairs, parent, X, Y)
    return SpanCertificate("modal", k, R, [u for u, _ in pairs], [v for _, v in pairs], X, Y, ra.plays, rb.plays)


def replay_span(span: SpanCertificate, a: Structure, b: Structure) -> bool:
    """Read a Duplicator strategy off the span and confirm it wins against every Spoiler line."""
    R = span.carrier
    kids = R.forest.children()
    lp, rp = span.left_plays, span.right_plays
    if span.tag == "modal":
        return _replay_modal(span, a, b, kids)
    horizon = span.k if span.tag == "ef" else span.rounds

    def moves_of(node_list):
        out = {}
        for i in node_list:
            s, t = lp[span.p[i]], rp[span.q[i]]
            out.setdefault(("A", s[-1]), i)
            out.setdefault(("B", t[-1]), i)
        return out

    def ok_pos(s, t):
        if span.tag == "ef":
            return is_partial_iso(list(zip(s, t)), a, b)
        return is_partial_iso(_window(s, t), a, b)

    def walk(i, depth):
        siblings = R.forest.roots() if i is None else kids[i]
        if i is not None:
            s, t = lp[span.p[i]], rp[span.q[i]]
            if not ok_pos(s, t):
                return False
        if depth == horizon:
            return True
        avail = moves_of(siblings)
        if span.tag == "ef":
            wanted = [("A", x) for x in a.universe] + [("B", y) for y in b.universe]
        else:
            wanted = [("A", (p, x)) for p in range(1, span.k + 1) for x in a.universe] + \
                     [("B", (p, y)) for p in range(1, span.k + 1) for y in b.universe]
        for w in wanted:
            if w not in avail:
                return False
            if not walk(avail[w], depth + 1):
                return False
        return True

    return walk(None, 0)


def _replay_modal(span, a, b, kids):
    lp, rp = span.left_plays, span.right_plays
    sa, sb = successors(a), successors(b)
    R = span.carrier

    def walk(i):
        s, t = lp[span.p[i]], rp[span.q[i]]
        if [x[0] for x in s] != [y[0] for y in t]:
            return False
        if unary_profile(a, s[-1][1]) != unary_profile(b, t[-1][1]):
            return False
        if len(s) - 1 == span.k:
            return True
        avail_a = {(lp[span.p[j]][-1]) for j in kids[i]}
        avail_b = {(rp[span.q[j]][-1]) for j in kids[i]}
        for lab in sa:
            if any((lab, u2) not in avail_a for u2 in sa[lab][s[-1][1]]):
                return False
            if any((lab, v2) not in avail_b for v2 in sb[lab][t[-1][1]]):
                return False
        return all(walk(j) for j in kids[i])

    roots = R.forest.roots()
    return len(roots) == 1 and walk(roots[0])
