"""Command line interface.

Exit codes: 0 decided true or success, 1 decided false, 2 error, 3 resource limit reached (undecided).
"""
from __future__ import annotations

import argparse
import json
import sys

from . import __version__
from .structures import ResourceLimit, StructureError

OK, FALSE, ERROR, UNDECIDED = 0, 1, 2, 3

LOGICS = ("ep", "full", "counting")
COMONADS = ("ef", "pebble", "modal")


class _Out:
    def __init__(self, args):
        self.json = args.json
        self.data = {"schema": "gamecomonads/1", "command": args.verb}
        self.lines: list = []

    def say(self, line):
        self.lines.append(line)

    def put(self, **kw):
        self.data.update(kw)

    def flush(self, stream):
        if self.json:
            stream.write(json.dumps(self.data, indent=2, sort_keys=True) + "\n")
        else:
            for line in self.lines:
                stream.write(line + "\n")


def _load(path, point=None):
    from .io import load_structure
    return load_structure(path, point)


def _verdict(out, value: bool, what: str):
    out.put(verdict=value)
    out.say(f"{what}: {'yes' if value else 'no'}")
    return OK if value else FALSE


def cmd_hom(args, out):
    from .homs import find_homomorphism
    a, b = _load(args.a), _load(args.b)
    w = find_homomorphism(a, b)
    code = _verdict(out, w is not None, "homomorphism")
    if w is not None:
        m = {a.name(x): b.name(w[x]) for x in a.universe}
        out.put(map=m)
        out.say("  " + ", ".join(f"{x} -> {y}" for x, y in m.items()))
    return code


def _need_k(args):
    if args.k is None:
        raise StructureError("-k is required")
    return args.k


def cmd_equiv(args, out):
    from . import games, homs
    a, b = _load(args.a, args.point_a), _load(args.b, args.point_b)
    k, c, logic = _need_k(args), args.comonad, args.logic
    rounds = args.rounds_cap
    out.put(comonad=c, logic=logic, k=k)
    span = None
    if logic == "ep":
        value = homs.equiv_existential(a, b, k, c)
        game = "existential games in both directions"
    elif logic == "full":
        if c == "ef":
            value, strat = games.ef_bf_game(a, b, k, want_strategy=args.certificate)
            game = "Ehrenfeucht-Fraisse game"
            if value and args.certificate:
                span = games.strategy_to_span(a, b, k, strat, "ef", budget=args.budget)
        elif c == "pebble":
            value, strat = games.pebble_bf_game(a, b, k, rounds=rounds, want_strategy=args.certificate)
            game = "pebble game" + ("" if rounds is None else f" ({rounds} rounds)")
            if value and args.certificate:
                if rounds is None:
                    raise StructureError("--certificate for pebble games needs --rounds-cap")
                span = games.strategy_to_span(a, b, k, strat, "pebble", rounds=rounds, budget=args.budget)
        else:
            value = games.bisim_game(a, b, k)
            game = "bisimulation game"
            if value and args.certificate:
                span = games.strategy_to_span(a, b, k, games.bisim_strategy(a, b, k), "modal", budget=args.budget)
    else:
        if c == "ef":
            value = games.bijection_game(a, b, k)
            game = "bijection game"
        elif c == "pebble":
            value = games.pebble_bijection_game(a, b, k, rounds=rounds)
            game = "pebble bijection game"
        else:
            value = games.graded_bisim_game(a, b, k)
            game = "graded bisimulation game"
    out.put(game=game)
    code = _verdict(out, value, f"{game}, k={k}, Duplicator wins")
    if span is not None:
        out.put(certificate=span.to_json())
        out.say(f"  span certificate with {span.carrier.structure.size} nodes")
    return code


def cmd_game(args, out):
    from . import homs
    a, b = _load(args.a, args.point_a), _load(args.b, args.point_b)
    k, c = _need_k(args), args.comonad
    out.put(comonad=c, k=k)
    if c == "ef":
        value, strat = homs.exists_ckm_ef(a, b, k)
    elif c == "pebble":
        value, strat = homs.exists_ckm_pebble(a, b, k)
    else:
        value, strat = homs.exists_ckm_modal(a, b, k), None
    code = _verdict(out, value, f"existential {c} game from A to B, k={k}, Duplicator wins")
    if strat is not None:
        out.put(strategy=strat.to_json(a, b))
        out.say(f"  strategy with {len(strat.table)} responses")
    return code


def cmd_treedepth(args, out):
    from .decompositions import forest_cover_to_coalgebra, tree_depth
    from .io import coalgebra_to_json, forest_to_json
    from .structures import gaifman
    a = _load(args.a)
    td, f = tree_depth(gaifman(a))
    out.put(treedepth=td)
    out.say(f"tree-depth: {td}")
    if args.certificate:
        out.put(cover=forest_to_json(a, f))
        if a.size:
            out.put(coalgebra=coalgebra_to_json(forest_cover_to_coalgebra(a, f)))
        out.say("  parent: " + ", ".join(f"{a.name(x)}<-{'root' if p is None else a.name(p)}"
                                         for x, p in enumerate(f.parent)))
    return OK


def cmd_treewidth(args, out):
    from .decompositions import decomposition_to_pebble_cover, make_orderly, pebble_cover_to_coalgebra, tree_width
    from .io import coalgebra_to_json, decomposition_to_json, pebble_cover_to_json
    from .structures import gaifman
    a = _load(args.a)
    tw, t = tree_width(gaifman(a), args.cap)
    out.put(treewidth=tw)
    out.say(f"tree-width: {tw}")
    if args.certificate:
        out.put(decomposition=decomposition_to_json(a, t))
        if a.size:
            pc = decomposition_to_pebble_cover(make_orderly(t), tw + 1)
            out.put(cover=pebble_cover_to_json(a, pc), coalgebra=coalgebra_to_json(pebble_cover_to_coalgebra(a, pc)))
        out.say("  bags: " + " ".join("{" + ",".join(sorted(a.name(v) for v in bag)) + "}" for bag in t.bags))
    return OK


def cmd_coalgebra(args, out):
    from .decompositions import (
        decomposition_to_pebble_cover, forest_cover_to_coalgebra, make_orderly, modal_coalgebra,
        pebble_cover_to_coalgebra, sync_tree_check, tree_depth, tree_width,
    )
    from .io import coalgebra_to_json
    from .structures import gaifman
    a = _load(args.a, args.point_a)
    k, c = _need_k(args), args.comonad
    if k < 1 and c != "modal":
        raise StructureError("k must be at least 1")
    alpha = None
    if c == "ef":
        n, f = tree_depth(gaifman(a))
        if n <= k and a.size:
            alpha = forest_cover_to_coalgebra(a, f, k)
    elif c == "pebble":
        w, t = tree_width(gaifman(a), args.cap)
        n = w + 1
        if n <= k and a.size:
            alpha = pebble_cover_to_coalgebra(a, decomposition_to_pebble_cover(make_orderly(t), k), k)
    else:
        n = sync_tree_check(a)
        alpha = modal_coalgebra(a, k)
    out.put(comonad=c, k=k, coalgebra_number=n)
    code = _verdict(out, n is not None and n <= k, f"{c} coalgebra with k={k}")
    out.say(f"  coalgebra number: {'none' if n is None else n}")
    if alpha is not None and args.certificate:
        out.put(certificate=coalgebra_to_json(alpha))
    return code


def cmd_cq(args, out):
    from . import cq
    from .decompositions import decomposition_to_pebble_cover, make_orderly, tree_depth, tree_width
    from .formulas import model_check, modal_depth, parse_formula, quantifier_rank, to_text, variable_count
    from .structures import gaifman
    trace = None
    if args.formula is not None:
        phi = parse_formula(args.formula)
    else:
        if args.a is None:
            raise StructureError("give a structure or --formula")
        a = _load(args.a, args.point_a)
        if args.minimize == "none":
            phi = cq.canonical_cq(a)
        elif args.minimize == "rank":
            phi, trace = cq.minimize_quantifier_rank(a, tree_depth(gaifman(a))[1], trace=True)
        elif args.minimize == "variables":
            w, t = tree_width(gaifman(a), args.cap)
            phi, trace = cq.minimize_variables(a, decomposition_to_pebble_cover(make_orderly(t), w + 1), trace=True)
        else:
            phi = cq.modal_cq(a)
            if phi is None:
                out.put(formula=None)
                out.say("no modal query: a transition cycle is reachable")
                return FALSE
    text = to_text(phi)
    out.put(formula=text, quantifier_rank=quantifier_rank(phi), variables=variable_count(phi),
            modal_depth=modal_depth(phi))
    out.say(text)
    out.say(f"  rank {quantifier_rank(phi)}, {variable_count(phi)} variables, modal depth {modal_depth(phi)}")
    if trace is not None and args.trace:
        cq.replay_trace(trace)
        out.put(trace=trace.to_json())
        for rule, pos, arg, res in trace.steps:
            out.say(f"  {rule} at {list(pos)}: {to_text(res)}")
    if args.eval is not None:
        b = _load(args.eval, args.point_b)
        value = model_check(b, phi)
        return _verdict(out, value, f"{args.eval} satisfies the formula")
    return OK


def cmd_verify(args, out):
    from .io import verify_certificate
    with open(args.cert) as fh:
        d = json.load(fh)
    if "kind" in d:
        certs = [d]
    else:
        # output of another command: check every certificate it carries
        certs = [d[key] for key in ("certificate", "cover", "decomposition", "coalgebra") if isinstance(d.get(key), dict)]
        if not certs:
            raise StructureError("no certificate found in file")
    a = _load(args.a, args.point_a)
    b = _load(args.b, args.point_b) if args.b else None
    results = []
    for c in certs:
        ok, msg = verify_certificate(c, a, b)
        results.append({"kind": c.get("kind"), "valid": ok, "message": msg})
        out.say(f"{c.get('kind')}: {msg}")
    out.put(results=results)
    return _verdict(out, all(r["valid"] for r in results), "certificate valid")


def cmd_laws(args, out):
    from .ef import EF
    from .laws import check_laws
    from .modal import Modal
    from .pebble import Pebble
    a = _load(args.a, args.point_a)
    k, c = _need_k(args), args.comonad
    com = EF(k) if c == "ef" else Pebble(k, args.rounds_cap) if c == "pebble" else Modal(k)
    report = check_laws(com, a, seed=args.seed, budget=args.budget)
    out.put(report=report.to_json())
    out.say(str(report))
    return _verdict(out, report.ok, "all laws hold")


COMMANDS = {
    "hom": cmd_hom, "equiv": cmd_equiv, "game": cmd_game, "treedepth": cmd_treedepth,
    "treewidth": cmd_treewidth, "coalgebra": cmd_coalgebra, "cq": cmd_cq, "verify": cmd_verify, "laws": cmd_laws,
}


def build_parser() -> argparse.ArgumentParser:
    from .comonad import DEFAULT_BUDGET
    from .decompositions import TREEWIDTH_CAP
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--json", action="store_true", help="machine-readable output")
    common.add_argument("--budget", type=int, default=DEFAULT_BUDGET, help="largest comonad image to build")
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--point-a", help="element to use as the point of the first structure")
    common.add_argument("--point-b", help="element to use as the point of the second structure")

    game = argparse.ArgumentParser(add_help=False)
    game.add_argument("--comonad", choices=COMONADS, default="ef")
    game.add_argument("-k", type=int)
    game.add_argument("--rounds-cap", type=int, help="round bound for pebble games")

    p = argparse.ArgumentParser(prog="gamecomonads", description="Game comonads on finite structures.")
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="verb", required=True)

    s = sub.add_parser("hom", parents=[common], help="search for a homomorphism A -> B")
    s.add_argument("a")
    s.add_argument("b")

    s = sub.add_parser("equiv", parents=[common, game], help="decide a resource-bounded equivalence")
    s.add_argument("--logic", choices=LOGICS, default="full")
    s.add_argument("--certificate", action="store_true", help="emit a span certificate on a Duplicator win")
    s.add_argument("a")
    s.add_argument("b")

    s = sub.add_parser("game", parents=[common, game], help="existential game from A to B with a strategy")
    s.add_argument("a")
    s.add_argument("b")

    for verb, text in (("treedepth", "exact tree-depth"), ("treewidth", "exact tree-width")):
        s = sub.add_parser(verb, parents=[common], help=text)
        s.add_argument("--certificate", action="store_true")
        s.add_argument("--cap", type=int, default=TREEWIDTH_CAP, help="vertex cap for the exact solver")
        s.add_argument("a")

    s = sub.add_parser("coalgebra", parents=[common, game], help="does A carry a coalgebra for the comonad at k")
    s.add_argument("--certificate", action="store_true")
    s.add_argument("--cap", type=int, default=TREEWIDTH_CAP)
    s.add_argument("a")

    s = sub.add_parser("cq", parents=[common], help="canonical and minimized conjunctive queries")
    s.add_argument("--minimize", choices=("none", "rank", "variables", "modal"), default="none")
    s.add_argument("--trace", action="store_true", help="print the rewrite trace")
    s.add_argument("--formula", help="use this formula instead of a canonical query")
    s.add_argument("--eval", metavar="B", help="model check the formula on structure B")
    s.add_argument("--cap", type=int, default=TREEWIDTH_CAP)
    s.add_argument("a", nargs="?")

    s = sub.add_parser("verify", parents=[common], help="re-check a certificate file offline")
    s.add_argument("cert")
    s.add_argument("a")
    s.add_argument("b", nargs="?")

    s = sub.add_parser("laws", parents=[common, game], help="check the comonad laws on a structure")
    s.add_argument("a")
    return p


def run(argv=None, stdout=None, stderr=None) -> int:
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return OK if e.code == 0 else ERROR
    out = _Out(args)
    try:
        code = COMMANDS[args.verb](args, out)
    except ResourceLimit as e:
        out.put(verdict=None, undecided=str(e))
        out.say(f"undecided: {e}")
        code = UNDECIDED
    except (StructureError, ValueError, OSError, json.JSONDecodeError) as e:
        if args.json:
            out.put(error=str(e))
            out.flush(stdout)
        else:
            stderr.write(f"error: {e}\n")
        return ERROR
    out.flush(stdout)
    return code


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
