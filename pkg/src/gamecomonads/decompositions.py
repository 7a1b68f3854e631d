"""Tree-depth, tree-width, synchronization trees and the coalgebras that certify them."""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

from .ef import EF
from .modal import Modal, check_modal_vocabulary, successors
from .pebble import Pebble
from .structures import (
    Forest, Graph, ResourceLimit, Structure, StructureError, gaifman, induced_substructure,
)

TREEWIDTH_CAP = 20


class CertificateError(StructureError):
    def __init__(self, message, witness=None):
        super().__init__(message)
        self.witness = witness


# forest covers

def cover_problems(g: Graph, f: Forest) -> list[str]:
    if f.size != g.n:
        return [f"forest has {f.size} nodes, graph has {g.n} vertices"]
    return [f"edge {u}-{v} joins incomparable vertices" for u, v in sorted(g.edges) if not f.comparable(u, v)]


def is_forest_cover(g: Graph, f: Forest) -> bool:
    return not cover_problems(g, f)


def _components(mask: int, nb: list[int]) -> list[int]:
    out = []
    rest = mask
    while rest:
        low = rest & -rest
        comp, frontier = low, low
        while frontier:
            v = frontier.bit_length() - 1
            frontier &= ~(1 << v)
            new = nb[v] & mask & ~comp
            comp |= new
            frontier |= new
        out.append(comp)
        rest &= ~comp
    return out


def _bits(mask: int):
    while mask:
        low = mask & -mask
        yield low.bit_length() - 1
        mask ^= low


def tree_depth(g: Graph) -> tuple[int, Forest]:
    """Exact tree-depth with an optimal forest cover (roots chosen by least id on ties)."""
    nb = g.masks()

    @lru_cache(maxsize=None)
    def td(mask: int) -> tuple[int, int]:
        """(depth, best root) for a connected mask."""
        if mask & (mask - 1) == 0:
            return 1, mask.bit_length() - 1
        best, root = None, None
        for v in _bits(mask):
            rest = mask & ~(1 << v)
            d = 1 + max(td(c)[0] for c in _components(rest, nb))
            if best is None or d < best:
                best, root = d, v
        return best, root

    parent = [None] * g.n

    def build(mask, par):
        for c in _components(mask, nb):
            _, r = td(c)
            parent[r] = par
            build(c & ~(1 << r), r)

    full = (1 << g.n) - 1
    build(full, None)
    depth = max((td(c)[0] for c in _components(full, nb)), default=0)
    f = Forest(tuple(parent))
    assert f.height() == depth and is_forest_cover(g, f)
    return depth, f


# pebble forest covers

@dataclass(frozen=True)
class PebbleForestCover:
    forest: Forest
    pebbles: tuple
    k: int

    def __post_init__(self):
        object.__setattr__(self, "pebbles", tuple(self.pebbles))

    def active(self, v: int, w: int) -> bool:
        """v is an ancestor of w (or w itself) and its pebble is not reused on the way down to w."""
        chain = self.forest.chain(w)
        if v not in chain:
            return False
        i = chain.index(v)
        return all(self.pebbles[u] != self.pebbles[v] for u in chain[i + 1:])

    def problems(self, g: Graph) -> list[str]:
        out = cover_problems(g, self.forest)
        if len(self.pebbles) != g.n:
            return out + ["pebbling has the wrong length"]
        for x, p in enumerate(self.pebbles):
            if not (isinstance(p, int) and 1 <= p <= self.k):
                out.append(f"pebble {p} of {x} outside 1..{self.k}")
        if out:
            return out
        for u, v in sorted(g.edges):
            lo, hi = (u, v) if self.forest.leq(u, v) else (v, u)
            if not self.active(lo, hi):
                out.append(f"edge {lo}-{hi}: pebble {self.pebbles[lo]} reused between them")
        return out


# tree decompositions

@dataclass(frozen=True)
class TreeDecomposition:
    parent: tuple
    bags: tuple

    def __post_init__(self):
        object.__setattr__(self, "parent", tuple(self.parent))
        object.__setattr__(self, "bags", tuple(frozenset(b) for b in self.bags))
        Forest(self.parent)

    @property
    def tree(self) -> Forest:
        return Forest(self.parent)

    @property
    def width(self) -> int:
        return max((len(b) for b in self.bags), default=0) - 1

    def problems(self, g: Graph) -> list[str]:
        out = []
        t = self.tree
        if len(t.roots()) != 1:
            out.append(f"tree has {len(t.roots())} roots")
        covered = set().union(*self.bags) if self.bags else set()
        for v in g.vertices:
            if v not in covered:
                out.append(f"vertex {v} in no bag")
        for u, v in sorted(g.edges):
            if not any(u in b and v in b for b in self.bags):
                out.append(f"edge {u}-{v} in no bag")
        for v in covered:
            tops = [x for x, b in enumerate(self.bags) if v in b and (t.parent[x] is None or v not in self.bags[t.parent[x]])]
            if len(tops) != 1:
                out.append(f"bags containing {v} are not connected")
        return out

    def is_orderly(self) -> bool:
        for x, b in enumerate(self.bags):
            p = self.parent[x]
            new = b if p is None else b - self.bags[p]
            if len(new) > 1:
                return False
        return True


def tree_width(g: Graph, cap: int = TREEWIDTH_CAP) -> tuple[int, TreeDecomposition]:
    """Exact tree-width by dynamic programming over sets of eliminated vertices."""
    n = g.n
    if n > cap:
        raise ResourceLimit(f"tree-width solver is capped at {cap} vertices, graph has {n}", n)
    if n == 0:
        return -1, TreeDecomposition((None,), (frozenset(),))
    nb = g.masks()

    def q_size(S: int, v: int) -> int:
        """Vertices outside S+v reachable from v through S."""
        seen = 1 << v
        frontier = 1 << v
        out = 0
        while frontier:
            u = frontier.bit_length() - 1
            frontier &= ~(1 << u)
            new = nb[u] & ~seen
            seen |= new
            out |= new & ~S
            frontier |= new & S
        return bin(out).count("1")

    @lru_cache(maxsize=None)
    def tw(S: int) -> tuple[int, int]:
        if S == 0:
            return -1, -1
        best, pick = None, None
        for v in _bits(S):
            rest = S & ~(1 << v)
            val = max(tw(rest)[0], q_size(rest, v))
            if best is None or val < best:
                best, pick = val, v
        return best, pick

    full = (1 << n) - 1
    width = tw(full)[0]
    order = []
    S = full
    while S:
        v = tw(S)[1]
        order.append(v)
        S &= ~(1 << v)
    order.reverse()  # elimination order, first eliminated first
    t = decomposition_from_order(g, order)
    assert t.width == max(width, 0) and not t.problems(g)
    tw.cache_clear()
    return max(width, 0), t


def decomposition_from_order(g: Graph, order: list[int]) -> TreeDecomposition:
    pos = {v: i for i, v in enumerate(order)}
    adj = [set(s) for s in g.neighbours()]
    bags = {}
    for v in order:
        higher = {u for u in adj[v] if pos[u] > pos[v]}
        bags[v] = frozenset(higher | {v})
        for u in higher:
            adj[u] |= higher - {u}
    node = {v: i for i, v in enumerate(order)}
    parent = [None] * len(order)
    last = order[-1]
    for v in order:
        higher = bags[v] - {v}
        if higher:
            parent[node[v]] = node[min(higher, key=pos.get)]
        elif v != last:
            parent[node[v]] = node[last]
    return TreeDecomposition(tuple(parent), tuple(bags[v] for v in order))


def elimination_width(g: Graph, order) -> int:
    """Width of the decomposition induced by an elimination order."""
    return decomposition_from_order(g, list(order)).width


def make_orderly(t: TreeDecomposition) -> TreeDecomposition:
    """Split each node that introduces several vertices into a chain introducing one at a time."""
    tree = t.tree
    kids = tree.children()
    parent, bags = [], []

    def emit(bag, par):
        parent.append(par)
        bags.append(frozenset(bag))
        return len(bags) - 1

    stack = [(r, None, frozenset()) for r in reversed(tree.roots())]
    while stack:
        x, par, pbag = stack.pop()
        bag = t.bags[x]
        new = sorted(bag - pbag)
        if len(new) <= 1:
            nid = emit(bag, par)
        else:
            cur = set(bag & pbag)
            nid = par
            for v in new:
                cur.add(v)
                nid = emit(cur, nid)
        for c in reversed(kids[x]):
            stack.append((c, nid, bag))
    return TreeDecomposition(tuple(parent), tuple(bags))


def decomposition_to_pebble_cover(t: TreeDecomposition, k: int) -> PebbleForestCover:
    if t.width >= k:
        raise CertificateError(f"decomposition has width {t.width}, needs width below {k}")
    if not t.is_orderly():
        raise CertificateError("decomposition is not orderly; apply make_orderly first")
    tree = t.tree
    tau = {}
    for x, b in enumerate(t.bags):
        p = tree.parent[x]
        for v in b - (t.bags[p] if p is not None else frozenset()):
            tau[v] = x
    owner = {x: v for v, x in tau.items()}
    n = max(tau, default=-1) + 1
    parent = [None] * n
    for v, x in tau.items():
        y = tree.parent[x]
        while y is not None and y not in owner:
            y = tree.parent[y]
        parent[v] = owner.get(y) if y is not None else None
    pebbles = [0] * n
    for x in tree.preorder():
        if x in owner:
            v = owner[x]
            used = {pebbles[u] for u in t.bags[x] if u != v}
            pebbles[v] = min(set(range(1, k + 1)) - used)
    return PebbleForestCover(Forest(tuple(parent)), tuple(pebbles), k)


def pebble_cover_to_decomposition(c: PebbleForestCover, k: int | None = None) -> TreeDecomposition:
    """Node 0 is an added root with an empty bag; node v+1 holds the active predecessors of v."""
    f = c.forest
    parent = [None] + [0 if f.parent[v] is None else f.parent[v] + 1 for v in range(f.size)]
    bags = [frozenset()] + [frozenset(u for u in f.chain(v) if c.active(u, v)) for v in range(f.size)]
    return TreeDecomposition(tuple(parent), tuple(bags))


# coalgebras

@dataclass(frozen=True, eq=False)
class Coalgebra:
    tag: str
    k: int
    structure: Structure
    alpha: tuple
    n: int | None = None

    @property
    def comonad(self):
        if self.tag == "ef":
            return EF(self.k)
        if self.tag == "pebble":
            return Pebble(self.k, self.n or max((len(s) for s in self.alpha), default=1))
        if self.tag == "modal":
            return Modal(self.k)
        raise StructureError(f"unknown comonad tag {self.tag!r}")

    def __call__(self, x):
        return self.alpha[x]

    def problems(self) -> list[tuple[str, object]]:
        """Violations as (message, witness) pairs."""
        c, a = self.comonad, self.structure
        out = []
        if len(self.alpha) != a.size:
            return [("structure map is not total", len(self.alpha))]
        for x, s in enumerate(self.alpha):
            if not c.is_play(a, s):
                out.append((f"image of {a.name(x)} is not a play", x))
        if out:
            return out
        for x, s in enumerate(self.alpha):
            if c.counit(s) != x:
                out.append((f"counit law fails at {a.name(x)}", x))
        for x, s in enumerate(self.alpha):
            if c.comultiply(s) != c.fmap(lambda y: self.alpha[y], s):
                out.append((f"comultiplication law fails at {a.name(x)}", x))
        for name, ts in a.relations.items():
            for t in sorted(ts):
                if not c.holds(a, name, [self.alpha[x] for x in t]):
                    out.append((f"not a homomorphism: {name}{tuple(a.name(x) for x in t)}", t))
        if self.tag == "modal" and a.point is not None and self.alpha[a.point] != c.root_point(a):
            out.append(("point not sent to the root play", a.point))
        return out

    def check(self) -> "Coalgebra":
        probs = self.problems()
        if probs:
            raise CertificateError(probs[0][0], probs[0][1])
        return self

    @property
    def valid(self) -> bool:
        return not self.problems()


def _need_positive(k):
    if not isinstance(k, int) or k < 1:
        raise StructureError(f"k must be a positive integer, got {k!r}")


def forest_cover_to_coalgebra(a: Structure, f: Forest, k: int | None = None) -> Coalgebra:
    probs = cover_problems(gaifman(a), f)
    if probs:
        raise CertificateError("invalid forest cover: " + probs[0])
    k = f.height() if k is None else k
    _need_positive(k)
    if f.height() > k:
        raise CertificateError(f"cover has height {f.height()} > {k}")
    return Coalgebra("ef", k, a, tuple(tuple(f.chain(x)) for x in a.universe)).check()


def _order_from_coalgebra(alpha: Coalgebra) -> Forest:
    probs = alpha.problems()
    if probs:
        raise CertificateError(probs[0][0], probs[0][1])
    c = alpha.comonad
    return Forest(tuple(c.counit(s[:-1]) if len(s) > 1 else None for s in alpha.alpha))


def coalgebra_to_forest_cover(alpha: Coalgebra) -> Forest:
    if alpha.tag != "ef":
        raise StructureError("expected an EF coalgebra")
    return _order_from_coalgebra(alpha)


def pebble_cover_to_coalgebra(a: Structure, c: PebbleForestCover, k: int | None = None) -> Coalgebra:
    k = c.k if k is None else k
    _need_positive(k)
    probs = PebbleForestCover(c.forest, c.pebbles, k).problems(gaifman(a))
    if probs:
        raise CertificateError("invalid pebble forest cover: " + probs[0])
    alpha = tuple(tuple((c.pebbles[y], y) for y in c.forest.chain(x)) for x in a.universe)
    return Coalgebra("pebble", k, a, alpha, max((len(s) for s in alpha), default=1)).check()


def coalgebra_to_pebble_cover(alpha: Coalgebra) -> PebbleForestCover:
    if alpha.tag != "pebble":
        raise StructureError("expected a pebble coalgebra")
    f = _order_from_coalgebra(alpha)
    return PebbleForestCover(f, tuple(s[-1][0] for s in alpha.alpha), alpha.k)


def ef_coalgebra_to_pebble(alpha: Coalgebra) -> Coalgebra:
    """Compose an EF coalgebra with the comonad morphism into the pebbling comonad."""
    from .pebble import ef_to_pebble
    if alpha.tag != "ef":
        raise StructureError("expected an EF coalgebra")
    return Coalgebra("pebble", alpha.k, alpha.structure, tuple(ef_to_pebble(s) for s in alpha.alpha), alpha.k)


# synchronization trees

def generated_submodel(a: Structure) -> tuple[Structure, list[int]]:
    check_modal_vocabulary(a)
    if a.point is None:
        raise StructureError("need a pointed structure")
    succ = successors(a)
    seen = [a.point]
    known = {a.point}
    i = 0
    while i < len(seen):
        x = seen[i]
        i += 1
        for lab in sorted(succ):
            for y in succ[lab][x]:
                if y not in known:
                    known.add(y)
                    seen.append(y)
    return induced_substructure(a, seen)


def sync_tree_check(a: Structure) -> int | None:
    """Height of the generated submodel when every element has exactly one path from the point."""
    sub, _ = generated_submodel(a)
    indeg = [0] * sub.size
    for n, m in sub.vocab.relations:
        if m == 2:
            for _, y in sub.relations[n]:
                indeg[y] += 1
    if indeg[sub.point] != 0 or any(d != 1 for i, d in enumerate(indeg) if i != sub.point):
        return None
    return max(len(p) - 1 for p in _paths(sub))


def _paths(sub: Structure) -> list[tuple]:
    """The unique path play of each element of a synchronization tree, indexed by element."""
    succ = successors(sub)
    paths: list = [None] * sub.size
    paths[sub.point] = ((None, sub.point),)
    todo = [sub.point]
    while todo:
        x = todo.pop()
        for lab in sorted(succ):
            for y in succ[lab][x]:
                paths[y] = paths[x] + ((lab, y),)
                todo.append(y)
    return paths


def modal_coalgebra(a: Structure, k: int) -> Coalgebra | None:
    """Coalgebra on the generated submodel when it is a synchronization tree of height at most k."""
    h = sync_tree_check(a)
    if h is None or h > k:
        return None
    sub, _ = generated_submodel(a)
    return Coalgebra("modal", k, sub, tuple(_paths(sub))).check()


def coalgebra_number(a: Structure, tag: str, cap: int = TREEWIDTH_CAP) -> int | None:
    if tag == "ef":
        return tree_depth(gaifman(a))[0]
    if tag == "pebble":
        return tree_width(gaifman(a), cap)[0] + 1
    if tag == "modal":
        return sync_tree_check(a)
    raise StructureError(f"unknown comonad tag {tag!r}")


# coalgebra morphisms

def _tree_view(alpha: Coalgebra):
    c = alpha.comonad
    parent = tuple(c.counit(s[:-1]) if len(s) > 1 else None for s in alpha.alpha)
    if alpha.tag == "ef":
        labels = None
    else:
        labels = tuple(s[-1][0] for s in alpha.alpha)
    return parent, labels


def coalgebra_morphism_verdicts(h, alpha: Coalgebra, beta: Coalgebra) -> tuple[bool, bool]:
    """(commuting square, root/covering/label preservation) for a map h between the carriers."""
    if alpha.tag != beta.tag:
        raise StructureError("coalgebras have different comonads")
    c = alpha.comonad
    square = all(c.fmap(lambda y: h[y], alpha.alpha[x]) == beta.alpha[h[x]] for x in alpha.structure.universe)
    pa, la = _tree_view(alpha)
    pb, lb = _tree_view(beta)
    cover = True
    for x in alpha.structure.universe:
        if pa[x] is None:
            cover &= pb[h[x]] is None
        else:
            cover &= pb[h[x]] == h[pa[x]]
        if la is not None:
            cover &= la[x] == lb[h[x]]
    return square, cover


def is_coalgebra_morphism(h, alpha: Coalgebra, beta: Coalgebra) -> bool:
    square, cover = coalgebra_morphism_verdicts(h, alpha, beta)
    if square != cover:
        raise AssertionError(f"coalgebra morphism checks disagree: square={square}, cover={cover}")
    return square
