"""Pointwise law checks for a play comonad on a given structure.

Set-level equations are checked on every play with random maps; homomorphism
preservation is checked on homomorphisms found by search.
"""
from __future__ import annotations

import random
from dataclasses import dataclass, field
from itertools import islice

from .comonad import DEFAULT_BUDGET, Comonad
from .structures import Structure, Vocabulary


@dataclass
class LawCheck:
    name: str
    ok: bool
    witness: object = None
    detail: str = ""
    skipped: bool = False

    def line(self) -> str:
        s = f"{'SKIP' if self.skipped else 'PASS' if self.ok else 'FAIL'} {self.name}"
        if not self.ok and self.witness is not None:
            s += f" (witness {self.witness!r})"
        if self.detail:
            s += f" [{self.detail}]"
        return s


@dataclass
class LawReport:
    title: str
    checks: list = field(default_factory=list)

    def add(self, c: LawCheck):
        self.checks.append(c)

    @property
    def ok(self) -> bool:
        return all(c.ok for c in self.checks)

    @property
    def complete(self) -> bool:
        return not any(c.skipped for c in self.checks)

    def failures(self) -> list:
        return [c for c in self.checks if not c.ok]

    def get(self, name) -> LawCheck:
        for c in self.checks:
            if c.name == name:
                return c
        raise KeyError(name)

    def __str__(self):
        return "\n".join([self.title] + ["  " + c.line() for c in self.checks])

    def to_json(self) -> dict:
        return {"title": self.title, "ok": self.ok,
                "checks": [{"name": c.name, "ok": c.ok, "witness": repr(c.witness) if c.witness is not None else None}
                           for c in self.checks]}


class RandomMap:
    """A lazily tabulated random function into range(size)."""

    def __init__(self, size: int, rng: random.Random):
        self.size, self.rng, self.table = size, rng, {}

    def __call__(self, x):
        if x not in self.table:
            self.table[x] = self.rng.randrange(self.size)
        return self.table[x]


def terminal(vocab: Vocabulary) -> Structure:
    """One element, every relation full."""
    return Structure(vocab, 1, {n: {(0,) * m} for n, m in vocab.relations}, None)


def _first(plays, pred):
    for s in plays:
        if not pred(s):
            return s
    return None


def check_laws(c: Comonad, a: Structure, *, samples: int = 6, hom_samples: int = 40, seed: int = 0,
               targets=None, budget: int = DEFAULT_BUDGET, nested: bool = True) -> LawReport:
    from .homs import iter_homomorphisms
    rng = random.Random(seed)
    report = LawReport(f"{c!r} on {a!r}")
    r = c.build(a, budget)
    plays = r.plays
    ga = r.structure

    def check(name, pred, detail=""):
        w = _first(plays, pred)
        report.add(LawCheck(name, w is None, None if w is None else c.render(w, a) if _renderable(w) else w, detail))

    def _renderable(w):
        return isinstance(w, tuple)

    def check_all(name, items):
        """items yields (ok, witness) pairs."""
        for ok, w in items:
            if not ok:
                report.add(LawCheck(name, False, w))
                return
        report.add(LawCheck(name, True))

    # the counit is a homomorphism GA -> A (pointed when a is pointed)
    eps = [c.counit(s) for s in plays]
    report.add(LawCheck("counit is a homomorphism", _is_hom(eps, ga, a)))

    # Kleisli form
    check("coextension of counit is identity", lambda s: c.coextend(c.counit, s) == s)
    n = max(a.size, 1)
    fs = [RandomMap(n, rng) for _ in range(samples)]
    gs = [RandomMap(n, rng) for _ in range(samples)]
    if a.size:
        check_all("counit after coextension", (
            (c.counit(c.coextend(f, s)) == f(s), c.render(s, a)) for f in fs for s in plays))
        check_all("coextension is associative", (
            (c.coextend(lambda t: g(c.coextend(f, t)), s) == c.coextend(g, c.coextend(f, s)), c.render(s, a))
            for f, g in zip(fs, gs) for s in plays))

    # coextension of a homomorphism is a homomorphism GA -> GB
    if targets is None:
        targets = [a, terminal(a.vocab).with_point(0) if a.point is not None else terminal(a.vocab)]
    bad = None
    for b in targets:
        if bad:
            break
        for f in islice(iter_homomorphisms(ga, b), hom_samples):
            fn = lambda s, f=f: f[r.index[s]]  # noqa: E731
            for name, ts in ga.relations.items():
                for tup in ts:
                    img = [c.coextend(fn, plays[i]) for i in tup]
                    if not c.holds(b, name, img):
                        bad = (name, tuple(c.render(plays[i], a) for i in tup))
                        break
                if bad:
                    break
            if not bad and a.point is not None:
                root = c.coextend(fn, plays[ga.point])
                if b.point is not None and root != c.root_point(b):
                    bad = ("point", c.render(plays[ga.point], a))
            if bad:
                break
    report.add(LawCheck("coextension preserves homomorphisms", bad is None, bad))

    # comonad form
    check("counit after comultiplication", lambda s: c.counit(c.comultiply(s)) == s)
    check("functor of counit after comultiplication", lambda s: c.fmap(c.counit, c.comultiply(s)) == s)
    check("coassociativity", lambda s: c.fmap(c.comultiply, c.comultiply(s)) == c.comultiply(c.comultiply(s)))
    check("functor preserves identity", lambda s: c.fmap(lambda x: x, s) == s)
    if a.size:
        h1, h2 = RandomMap(n, rng), RandomMap(n, rng)
        check("functor preserves composition", lambda s: c.fmap(lambda x: h2(h1(x)), s) == c.fmap(h2, c.fmap(h1, s)))

    # comultiplication is a homomorphism GA -> GGA, checked through the lifted relation over GA
    bad = None
    for name, ts in ga.relations.items():
        for tup in ts:
            if not c.holds(ga, name, [r.lift_play(c.comultiply(plays[i])) for i in tup]):
                bad = (name, tuple(c.render(plays[i], a) for i in tup))
                break
        if bad:
            break
    report.add(LawCheck("comultiplication is a homomorphism", bad is None, bad))
    report.add(LawCheck("comultiplication is injective", len({c.comultiply(s) for s in plays}) == len(plays)))

    # eps . G(eps) = eps . eps_G on the plays of GGA
    if nested:
        need = c.count(ga)
        if need <= budget:
            w = None
            for S in c.plays(ga):
                S2 = r.lower_play(S)
                if c.counit(c.fmap(c.counit, S2)) != c.counit(c.counit(S2)):
                    w = S
                    break
            report.add(LawCheck("coequalizer identity", w is None, w, f"{need} nested plays"))
        else:
            report.add(LawCheck("coequalizer identity", True, None, f"{need} nested plays exceed budget", skipped=True))
    return report


def _is_hom(f, a, b):
    from .structures import is_homomorphism
    return is_homomorphism(f, a, b)
