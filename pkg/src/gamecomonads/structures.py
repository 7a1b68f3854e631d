"""Finite relational structures, maps between them and tree orders."""
from __future__ import annotations

from dataclasses import dataclass, field
from itertools import product as _cartesian
from typing import Iterable, Mapping, Sequence

IDENTITY = "I"


class StructureError(ValueError):
    pass


class VocabularyMismatch(StructureError):
    pass


class ResourceLimit(Exception):
    """A capped search or materialization would exceed its budget; the answer is undecided."""

    def __init__(self, message, required=None):
        super().__init__(message)
        self.required = required


@dataclass(frozen=True)
class Vocabulary:
    relations: tuple[tuple[str, int], ...]

    def __post_init__(self):
        object.__setattr__(self, "relations", tuple(sorted((str(n), int(m)) for n, m in self.relations)))
        names = [n for n, _ in self.relations]
        if len(set(names)) != len(names):
            raise StructureError("duplicate relation name")
        for n, m in self.relations:
            if m < 1:
                raise StructureError(f"relation {n} has arity {m}; arities must be at least 1")

    @classmethod
    def of(cls, **arities: int) -> "Vocabulary":
        return cls(tuple(arities.items()))

    def arity(self, name: str) -> int:
        for n, m in self.relations:
            if n == name:
                return m
        raise KeyError(name)

    @property
    def names(self) -> tuple[str, ...]:
        return tuple(n for n, _ in self.relations)

    def __contains__(self, name) -> bool:
        return name in self.names

    def max_arity(self) -> int:
        return max((m for _, m in self.relations), default=0)


@dataclass(frozen=True, eq=False)
class Structure:
    """A finite structure on the elements 0..size-1.

    `relations` maps each symbol of the vocabulary to a frozenset of tuples.
    Construction does not validate; use validate_structure or check().
    """

    vocab: Vocabulary
    size: int
    relations: Mapping[str, frozenset] = field(default_factory=dict)
    point: int | None = None
    names: tuple[str, ...] | None = None

    def __post_init__(self):
        rels = {n: frozenset(tuple(t) for t in self.relations.get(n, ())) for n in self.vocab.names}
        object.__setattr__(self, "relations", rels)
        if self.names is not None:
            object.__setattr__(self, "names", tuple(str(x) for x in self.names))

    @property
    def universe(self) -> range:
        return range(self.size)

    def rel(self, name: str) -> frozenset:
        return self.relations[name]

    def holds(self, name: str, tup) -> bool:
        return tuple(tup) in self.relations[name]

    def name(self, x: int) -> str:
        if self.names is not None and 0 <= x < len(self.names):
            return self.names[x]
        return str(x)

    def index(self, name) -> int:
        if self.names is not None:
            try:
                return self.names.index(str(name))
            except ValueError:
                pass
        try:
            x = int(name)
        except (TypeError, ValueError):
            raise StructureError(f"unknown element {name!r}") from None
        if not 0 <= x < self.size:
            raise StructureError(f"unknown element {name!r}")
        return x

    def with_point(self, point: int | None) -> "Structure":
        return Structure(self.vocab, self.size, self.relations, point, self.names)

    def unpointed(self) -> "Structure":
        return self.with_point(None)

    def check(self) -> "Structure":
        problems = validate_structure(self)
        if problems:
            raise StructureError("; ".join(problems))
        return self

    def key(self):
        return (self.vocab, self.size, tuple(sorted((n, tuple(sorted(ts))) for n, ts in self.relations.items())), self.point)

    def __eq__(self, other):
        return isinstance(other, Structure) and self.key() == other.key()

    def __hash__(self):
        return hash(self.key())

    def __repr__(self):
        rels = ", ".join(f"{n}={sorted(ts)}" for n, ts in self.relations.items())
        pt = f", point={self.point}" if self.point is not None else ""
        return f"Structure(size={self.size}, {rels}{pt})"


def structure(universe: int | Sequence, relations: Mapping[str, Iterable], arities: Mapping[str, int] | None = None,
              point=None) -> Structure:
    """Convenience builder. `universe` is a size or a list of names; tuples may use names."""
    if isinstance(universe, int):
        size, names = universe, None
        lookup = lambda x: int(x)  # noqa: E731
    else:
        names = tuple(str(u) for u in universe)
        size = len(names)
        pos = {n: i for i, n in enumerate(names)}
        lookup = lambda x: pos[str(x)]  # noqa: E731
    rels = {n: [tuple(t) for t in ts] for n, ts in relations.items()}
    if arities is None:
        arities = {}
        for n, ts in rels.items():
            if not ts:
                raise StructureError(f"cannot infer arity of empty relation {n}")
            arities[n] = len(ts[0])
    vocab = Vocabulary(tuple(arities.items()))
    interp = {n: [tuple(lookup(x) for x in t) for t in ts] for n, ts in rels.items()}
    pt = None if point is None else lookup(point)
    return Structure(vocab, size, interp, pt, names).check()


def validate_structure(s: Structure) -> list[str]:
    problems = []
    if s.size < 0:
        problems.append("negative universe size")
    extra = set(s.relations) - set(s.vocab.names)
    for n in sorted(extra):
        problems.append(f"relation {n} not in vocabulary")
    for n, m in s.vocab.relations:
        for t in sorted(s.relations.get(n, ())):
            if len(t) != m:
                problems.append(f"arity mismatch: {n}{t} has length {len(t)}, expected {m}")
            for x in t:
                if not (isinstance(x, int) and 0 <= x < s.size):
                    problems.append(f"element {x} not in universe")
    if s.point is not None and not (isinstance(s.point, int) and 0 <= s.point < s.size):
        problems.append(f"point {s.point} not in universe")
    if s.names is not None and len(s.names) != s.size:
        problems.append("name table length differs from universe size")
    if s.names is not None and len(set(s.names)) != len(s.names):
        problems.append("duplicate element names")
    return problems


def _same_vocab(a: Structure, b: Structure):
    if a.vocab != b.vocab:
        raise VocabularyMismatch(f"vocabulary mismatch: {a.vocab.relations} vs {b.vocab.relations}")


def is_homomorphism(f, a: Structure, b: Structure, *, respect_point: bool = True) -> bool:
    """f is indexable by the elements of a (a list, tuple or dict)."""
    _same_vocab(a, b)
    try:
        img = [f[x] for x in a.universe]
    except (KeyError, IndexError):
        return False
    if any(not (isinstance(y, int) and 0 <= y < b.size) for y in img):
        return False
    if respect_point and a.point is not None and b.point is not None and img[a.point] != b.point:
        return False
    for n, ts in a.relations.items():
        target = b.relations[n]
        for t in ts:
            if tuple(img[x] for x in t) not in target:
                return False
    return True


def is_strong_homomorphism(f, a: Structure, b: Structure) -> bool:
    """Homomorphism that also reflects every relation over its image."""
    if not is_homomorphism(f, a, b):
        return False
    pre: dict[int, list[int]] = {}
    for x in a.universe:
        pre.setdefault(f[x], []).append(x)
    for n, ts in b.relations.items():
        src = a.relations[n]
        for t in ts:
            if all(y in pre for y in t):
                if not any(s in src for s in _cartesian(*(pre[y] for y in t))):
                    return False
    return True


def is_embedding(f, a: Structure, b: Structure) -> bool:
    img = [f[x] for x in a.universe]
    return len(set(img)) == len(img) and is_strong_homomorphism(f, a, b)


def compose(g, f, domain: Iterable[int]) -> list:
    return [g[f[x]] for x in domain]


# partial maps

NOT_FUNCTION = "not_function"
PARTIAL_HOM = "partial_hom"
PARTIAL_ISO = "partial_iso"
NEITHER = "neither"


def _single_valued(pairs) -> dict | None:
    out = {}
    for x, y in pairs:
        if out.setdefault(x, y) != y:
            return None
    return out


def _preserves(m: dict, a: Structure, b: Structure) -> bool:
    for n, ts in a.relations.items():
        target = b.relations[n]
        for t in ts:
            if all(x in m for x in t) and tuple(m[x] for x in t) not in target:
                return False
    return True


def is_partial_hom(pairs, a: Structure, b: Structure) -> bool:
    m = _single_valued(pairs)
    return m is not None and _preserves(m, a, b)


def is_partial_iso(pairs, a: Structure, b: Structure) -> bool:
    pairs = list(pairs)
    m = _single_valued(pairs)
    if m is None or not _preserves(m, a, b):
        return False
    inv = _single_valued((y, x) for x, y in pairs)
    return inv is not None and _preserves(inv, b, a)


def classify_partial_map(pairs, a: Structure, b: Structure) -> str:
    _same_vocab(a, b)
    pairs = list(pairs)
    m = _single_valued(pairs)
    if m is None:
        return NOT_FUNCTION
    if not _preserves(m, a, b):
        return NEITHER
    inv = _single_valued((y, x) for x, y in pairs)
    if inv is not None and _preserves(inv, b, a):
        return PARTIAL_ISO
    return PARTIAL_HOM


# graphs

@dataclass(frozen=True)
class Graph:
    n: int
    edges: frozenset = frozenset()

    def __post_init__(self):
        es = set()
        for u, v in self.edges:
            if u == v:
                raise StructureError(f"self-loop at {u}")
            if not (0 <= u < self.n and 0 <= v < self.n):
                raise StructureError(f"edge {u}-{v} outside vertex range")
            es.add((min(u, v), max(u, v)))
        object.__setattr__(self, "edges", frozenset(es))

    @property
    def vertices(self) -> range:
        return range(self.n)

    def adjacent(self, u, v) -> bool:
        return (min(u, v), max(u, v)) in self.edges

    def neighbours(self) -> list[set]:
        nb = [set() for _ in range(self.n)]
        for u, v in self.edges:
            nb[u].add(v)
            nb[v].add(u)
        return nb

    def masks(self) -> list[int]:
        return [sum(1 << v for v in nb) for nb in self.neighbours()]


def gaifman(s: Structure) -> Graph:
    edges = set()
    for ts in s.relations.values():
        for t in ts:
            for i, x in enumerate(t):
                for y in t[i + 1:]:
                    if x != y:
                        edges.add((x, y))
    return Graph(s.size, frozenset(edges))


def graph_structure(g: Graph, names=None) -> Structure:
    """The symmetric binary relation E of a graph."""
    e = set()
    for u, v in g.edges:
        e.add((u, v))
        e.add((v, u))
    return Structure(Vocabulary.of(E=2), g.n, {"E": e}, None, names)


def add_identity_relation(s: Structure) -> Structure:
    if IDENTITY in s.vocab:
        raise StructureError(f"symbol collision: {IDENTITY} already in vocabulary")
    vocab = Vocabulary(s.vocab.relations + ((IDENTITY, 2),))
    rels = dict(s.relations)
    rels[IDENTITY] = frozenset((x, x) for x in s.universe)
    return Structure(vocab, s.size, rels, s.point, s.names)


def product(a: Structure, b: Structure) -> tuple[Structure, list[int], list[int]]:
    """Categorical product with its two projections. Element (x, y) has id x*|b|+y."""
    _same_vocab(a, b)
    nb = b.size
    rels = {}
    for n, ts in a.relations.items():
        out = set()
        for t in ts:
            for u in b.relations[n]:
                out.add(tuple(x * nb + y for x, y in zip(t, u)))
        rels[n] = out
    point = None
    if a.point is not None and b.point is not None:
        point = a.point * nb + b.point
    names = None
    if a.names is not None or b.names is not None:
        names = tuple(f"({a.name(x)},{b.name(y)})" for x in a.universe for y in b.universe)
    p = [i // nb for i in range(a.size * nb)] if nb else []
    q = [i % nb for i in range(a.size * nb)] if nb else []
    return Structure(a.vocab, a.size * nb, rels, point, names), p, q


def pairing(f, g, c: Structure, nb: int) -> list[int]:
    """The map into a product induced by f: c -> a and g: c -> b."""
    return [f[x] * nb + g[x] for x in c.universe]


def induced_substructure(s: Structure, elements: Sequence[int]) -> tuple[Structure, list[int]]:
    """Substructure on `elements`, renumbered in the given order; returns it and the inclusion."""
    pos = {x: i for i, x in enumerate(elements)}
    rels = {n: {tuple(pos[x] for x in t) for t in ts if all(x in pos for x in t)} for n, ts in s.relations.items()}
    point = pos.get(s.point) if s.point is not None else None
    names = tuple(s.name(x) for x in elements)
    return Structure(s.vocab, len(elements), rels, point, names), list(elements)


# forests

@dataclass(frozen=True)
class Forest:
    """A forest order given by parent pointers; roots have parent None."""

    parent: tuple

    def __post_init__(self):
        object.__setattr__(self, "parent", tuple(self.parent))
        n = len(self.parent)
        for x, p in enumerate(self.parent):
            if p is not None and not (isinstance(p, int) and 0 <= p < n):
                raise StructureError(f"parent of {x} out of range")
        for x in range(n):
            seen = 0
            y = x
            while y is not None:
                seen += 1
                if seen > n:
                    raise StructureError(f"cycle through {x} in parent map")
                y = self.parent[y]

    @property
    def size(self) -> int:
        return len(self.parent)

    def roots(self) -> list[int]:
        return [x for x, p in enumerate(self.parent) if p is None]

    def children(self) -> list[list[int]]:
        ch = [[] for _ in self.parent]
        for x, p in enumerate(self.parent):
            if p is not None:
                ch[p].append(x)
        return ch

    def chain(self, x: int) -> list[int]:
        """Root-to-x path, x included."""
        out = []
        while x is not None:
            out.append(x)
            x = self.parent[x]
        return out[::-1]

    def depth(self, x: int) -> int:
        return len(self.chain(x))

    def height(self) -> int:
        return max((self.depth(x) for x in range(self.size)), default=0)

    def leq(self, x: int, y: int) -> bool:
        while y is not None:
            if y == x:
                return True
            y = self.parent[y]
        return False

    def comparable(self, x: int, y: int) -> bool:
        return self.leq(x, y) or self.leq(y, x)

    def preorder(self) -> list[int]:
        ch = self.children()
        out = []
        stack = sorted(self.roots(), reverse=True)
        while stack:
            x = stack.pop()
            out.append(x)
            stack.extend(sorted(ch[x], reverse=True))
        return out


@dataclass(frozen=True, eq=False)
class TreeStructure:
    """A structure with a forest order on its elements and optional node labels (e.g. pebbles)."""

    structure: Structure
    forest: Forest
    labels: tuple | None = None

    def __post_init__(self):
        if self.forest.size != self.structure.size:
            raise StructureError("forest and structure sizes differ")
