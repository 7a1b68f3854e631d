"""Small standard structures and exhaustive families used by tests and examples."""
from __future__ import annotations

import random
from itertools import combinations, permutations, product

from .structures import Graph, Structure, Vocabulary, graph_structure

E2 = Vocabulary((("E", 2),))


def complete(n: int) -> Structure:
    return graph_structure(Graph(n, list(combinations(range(n), 2))))


def path(n: int) -> Structure:
    return graph_structure(Graph(n, [(i, i + 1) for i in range(n - 1)]))


def cycle(n: int) -> Structure:
    return graph_structure(Graph(n, [(i, (i + 1) % n) for i in range(n)] if n > 2 else []))


def edgeless(n: int) -> Structure:
    return graph_structure(Graph(n, []))


def star(leaves: int) -> Structure:
    return graph_structure(Graph(leaves + 1, [(0, i) for i in range(1, leaves + 1)]))


def grid(r: int, c: int) -> Structure:
    idx = lambda i, j: i * c + j  # noqa: E731
    edges = [(idx(i, j), idx(i, j + 1)) for i in range(r) for j in range(c - 1)]
    edges += [(idx(i, j), idx(i + 1, j)) for i in range(r - 1) for j in range(c)]
    return graph_structure(Graph(r * c, edges))


def chain(n: int, rel: str = "E") -> Structure:
    """Pointed directed path 0 -> 1 -> ... -> n."""
    return Structure(Vocabulary(((rel, 2),)), n + 1, {rel: {(i, i + 1) for i in range(n)}}, 0)


def self_loop(rel: str = "E") -> Structure:
    return Structure(Vocabulary(((rel, 2),)), 1, {rel: {(0, 0)}}, 0)


def _canon(n, edges) -> tuple:
    return min(tuple(sorted((p[u], p[v]) for u, v in edges)) for p in permutations(range(n)))


def digraphs(n: int) -> list[Structure]:
    """One binary relation (loops allowed) on n elements, one per isomorphism class."""
    pairs = list(product(range(n), repeat=2))
    seen = set()
    out = []
    for mask in range(1 << len(pairs)):
        edges = [pairs[i] for i in range(len(pairs)) if mask >> i & 1]
        key = _canon(n, edges)
        if key not in seen:
            seen.add(key)
            out.append(Structure(E2, n, {"E": set(key)}))
    return out


def digraphs_up_to(n: int) -> list[Structure]:
    return [s for m in range(1, n + 1) for s in digraphs(m)]


def all_structures(vocab: Vocabulary, n: int):
    """Every structure on exactly n elements (not up to isomorphism)."""
    slots = [(name, t) for name, m in vocab.relations for t in product(range(n), repeat=m)]
    for mask in range(1 << len(slots)):
        rels: dict = {name: set() for name in vocab.names}
        for i, (name, t) in enumerate(slots):
            if mask >> i & 1:
                rels[name].add(t)
        yield Structure(vocab, n, rels)


def random_structure(rng: random.Random, n: int, vocab: Vocabulary, density: float = 0.4,
                     pointed: bool = False) -> Structure:
    rels = {name: {t for t in product(range(n), repeat=m) if rng.random() < density} for name, m in vocab.relations}
    return Structure(vocab, n, rels, rng.randrange(n) if pointed and n else None)


def random_graph(rng: random.Random, n: int, density: float = 0.5) -> Graph:
    return Graph(n, [e for e in combinations(range(n), 2) if rng.random() < density])
