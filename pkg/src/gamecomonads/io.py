"""Structure and certificate files.

Structures are JSON objects with vocab, universe, relations and an optional point,
or edge lists (one `u v` pair per line) read as a symmetric relation E.
"""
from __future__ import annotations

import json
from pathlib import Path

from .decompositions import (
    CertificateError, Coalgebra, PebbleForestCover, TreeDecomposition, cover_problems, generated_submodel,
)
from .structures import Forest, Structure, StructureError, Vocabulary, gaifman

SCHEMA = "gamecomonads/1"


class FormatError(StructureError):
    def __init__(self, message, line=None, col=None):
        where = f"line {line}, column {col}: " if line is not None else ""
        super().__init__(where + message)
        self.line, self.col = line, col


# structures

def structure_to_json(a: Structure) -> dict:
    out = {
        "vocab": [{"name": n, "arity": m} for n, m in a.vocab.relations],
        "universe": [a.name(x) for x in a.universe],
        "relations": {n: [[a.name(x) for x in t] for t in sorted(a.relations[n])] for n in a.vocab.names},
    }
    if a.point is not None:
        out["point"] = a.name(a.point)
    return out


def structure_from_json(d) -> Structure:
    if not isinstance(d, dict):
        raise FormatError("structure must be a JSON object")
    for key in ("vocab", "universe", "relations"):
        if key not in d:
            raise FormatError(f"missing field {key!r}")
    try:
        arities = {}
        for entry in d["vocab"]:
            name, ar = entry["name"], entry["arity"]
            if not isinstance(ar, int) or ar < 0:
                raise FormatError(f"bad arity for {name!r}")
            if name in arities:
                raise FormatError(f"duplicate symbol {name!r}")
            arities[str(name)] = ar
    except (TypeError, KeyError):
        raise FormatError("vocab must be a list of {name, arity} objects") from None
    names = [str(u) for u in d["universe"]]
    if len(set(names)) != len(names):
        raise FormatError("duplicate element names in universe")
    pos = {n: i for i, n in enumerate(names)}
    rels = {}
    for n, ts in d["relations"].items():
        if n not in arities:
            raise StructureError(f"relation {n!r} not in vocabulary")
        out = []
        for t in ts:
            if len(t) != arities[n]:
                raise StructureError(f"arity mismatch: {n} has arity {arities[n]}, tuple {t} has {len(t)} entries")
            for x in t:
                if str(x) not in pos:
                    raise StructureError(f"element {x} not in universe")
            out.append(tuple(pos[str(x)] for x in t))
        rels[n] = out
    point = d.get("point")
    if point is not None and str(point) not in pos:
        raise StructureError(f"point {point} not in universe")
    vocab = Vocabulary(tuple(arities.items()))
    return Structure(vocab, len(names), rels, None if point is None else pos[str(point)], tuple(names)).check()


def parse_edge_list(text: str) -> Structure:
    """Vertices in order of first appearance; a line with one name adds an isolated vertex; # starts a comment."""
    names: list = []
    pos: dict = {}
    edges = set()

    def vertex(v):
        if v not in pos:
            pos[v] = len(names)
            names.append(v)
        return pos[v]

    for ln, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0]
        toks = line.split()
        if not toks:
            continue
        if len(toks) > 2:
            col = raw.index(toks[2]) + 1
            raise FormatError("expected at most two vertices per line", ln, col)
        if len(toks) == 1:
            vertex(toks[0])
        else:
            u, v = vertex(toks[0]), vertex(toks[1])
            edges.add((u, v))
            edges.add((v, u))
    return Structure(Vocabulary((("E", 2),)), len(names), {"E": edges}, None, tuple(names))


def load_structure(path, point=None) -> Structure:
    p = Path(path)
    text = p.read_text()
    if p.suffix == ".json" or text.lstrip().startswith("{"):
        try:
            d = json.loads(text)
        except json.JSONDecodeError as e:
            raise FormatError(e.msg, e.lineno, e.colno) from None
        a = structure_from_json(d)
    else:
        a = parse_edge_list(text)
    if point is not None:
        a = a.with_point(a.index(point))
    return a


def dump_structure(a: Structure) -> str:
    return json.dumps(structure_to_json(a), indent=2)


# certificates

def _names(a, xs):
    return [a.name(x) for x in xs]


def forest_to_json(a: Structure, f: Forest) -> dict:
    return {"schema": SCHEMA, "kind": "forest_cover", "height": f.height(),
            "parent": {a.name(x): (None if p is None else a.name(p)) for x, p in enumerate(f.parent)}}


def pebble_cover_to_json(a: Structure, c: PebbleForestCover) -> dict:
    d = forest_to_json(a, c.forest)
    d.update(kind="pebble_cover", k=c.k, pebbles={a.name(x): p for x, p in enumerate(c.pebbles)})
    return d


def decomposition_to_json(a: Structure, t: TreeDecomposition) -> dict:
    return {"schema": SCHEMA, "kind": "tree_decomposition", "width": t.width,
            "nodes": [{"parent": p, "bag": sorted(_names(a, b))} for p, b in zip(t.parent, t.bags)]}


def _move_to_json(tag, a, m):
    if tag == "ef":
        return a.name(m)
    return [m[0], a.name(m[1])]


def coalgebra_to_json(alpha: Coalgebra) -> dict:
    a = alpha.structure
    return {"schema": SCHEMA, "kind": "coalgebra", "comonad": alpha.tag, "k": alpha.k,
            "alpha": {a.name(x): [_move_to_json(alpha.tag, a, m) for m in s] for x, s in enumerate(alpha.alpha)}}


def _parent_map(a: Structure, d) -> Forest:
    par = [None] * a.size
    seen = set()
    for name, p in d["parent"].items():
        x = a.index(name)
        seen.add(x)
        par[x] = None if p is None else a.index(p)
    if len(seen) != a.size:
        raise CertificateError("forest does not cover every element")
    return Forest(tuple(par))


def certificate_from_json(d: dict, a: Structure, b: Structure | None = None):
    """Parse a certificate against the structure (and, for spans, the second structure)."""
    kind = d.get("kind")
    if d.get("schema") not in (None, SCHEMA):
        raise FormatError(f"unsupported schema {d.get('schema')!r}")
    if kind == "forest_cover":
        return _parent_map(a, d)
    if kind == "pebble_cover":
        f = _parent_map(a, d)
        peb = [0] * a.size
        for name, p in d["pebbles"].items():
            peb[a.index(name)] = p
        return PebbleForestCover(f, tuple(peb), d["k"])
    if kind == "tree_decomposition":
        return TreeDecomposition(tuple(n["parent"] for n in d["nodes"]),
                                 tuple(frozenset(a.index(v) for v in n["bag"]) for n in d["nodes"]))
    if kind == "coalgebra":
        tag = d["comonad"]
        carrier = generated_submodel(a)[0] if tag == "modal" else a
        alpha = [None] * carrier.size
        for name, moves in d["alpha"].items():
            x = carrier.index(name)
            if tag == "ef":
                alpha[x] = tuple(carrier.index(m) for m in moves)
            else:
                alpha[x] = tuple((m[0], carrier.index(m[1])) for m in moves)
        if any(s is None for s in alpha):
            raise CertificateError("structure map is not total")
        n = max((len(s) for s in alpha), default=1) if tag == "pebble" else None
        return Coalgebra(tag, d["k"], carrier, tuple(alpha), n)
    if kind == "span":
        if b is None:
            raise FormatError("a span certificate needs both structures")
        from .games import span_from_json
        return span_from_json(d, a, b)
    raise FormatError(f"unknown certificate kind {kind!r}")


def verify_certificate(d: dict, a: Structure, b: Structure | None = None) -> tuple[bool, str]:
    """Re-check a serialized certificate. Returns (valid, message)."""
    try:
        cert = certificate_from_json(d, a, b)
    except (StructureError, KeyError, TypeError, ValueError) as e:
        return False, f"malformed certificate: {e}"
    g = gaifman(a)
    kind = d["kind"]
    if kind == "forest_cover":
        probs = cover_problems(g, cert)
        if not probs and "height" in d and d["height"] != cert.height():
            probs = [f"declared height {d['height']} but the forest has height {cert.height()}"]
        return (not probs, probs[0] if probs else f"forest cover of height {cert.height()}")
    if kind == "pebble_cover":
        probs = cert.problems(g)
        return (not probs, probs[0] if probs else f"{cert.k}-pebble forest cover")
    if kind == "tree_decomposition":
        probs = cert.problems(g)
        if not probs and "width" in d and d["width"] != cert.width:
            probs = [f"declared width {d['width']} but bags give width {cert.width}"]
        return (not probs, probs[0] if probs else f"tree decomposition of width {cert.width}")
    if kind == "coalgebra":
        probs = cert.problems()
        return (not probs, probs[0][0] if probs else f"{cert.tag} coalgebra with k={cert.k}")
    if kind == "span":
        from .games import replay_span
        lf, rf = cert.check()
        if lf or rf:
            return False, f"left leg: {lf}" if lf else f"right leg: {rf}"
        if not replay_span(cert, a, b):
            return False, "span does not replay as a winning strategy"
        return True, f"{cert.tag} span with {cert.carrier.structure.size} nodes"
    return False, f"unknown certificate kind {kind!r}"
