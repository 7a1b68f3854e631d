"""One test per acceptance criterion. Each prints a single PASS/FAIL line."""
import random
import time

import pytest

from gamecomonads.cq import canonical_cq, minimize_quantifier_rank, minimize_variables, replay_trace
from gamecomonads.decompositions import (
    CertificateError, coalgebra_to_forest_cover, coalgebra_to_pebble_cover, decomposition_to_pebble_cover,
    ef_coalgebra_to_pebble, forest_cover_to_coalgebra, make_orderly, modal_coalgebra, pebble_cover_to_coalgebra,
    pebble_cover_to_decomposition, tree_depth, tree_width,
)
from gamecomonads.ef import EF
from gamecomonads.formulas import model_check, quantifier_rank, variable_count
from gamecomonads.games import bijection_game, bisim_game, ef_bf_game, graded_bisim_game, replay_span, \
    strategy_to_span
from gamecomonads.homs import equiv_existential, exists_ckm_ef, find_homomorphism
from gamecomonads.laws import check_laws
from gamecomonads.modal import Modal, modal_hom_equiv_check, unravel
from gamecomonads.pebble import Pebble, check_ef_to_pebble
from gamecomonads.samples import E2, all_structures, complete, random_structure
from gamecomonads.structures import Vocabulary, add_identity_relation, graph_structure

from conftest import atlas_graphs
from oracles import elimination_min_width, forest_cover_min_height
from test_ef import FirstElementCounit
from test_laws import DroppedComultiply, ForgetfulModal, PebbleRenumbers, ShiftedCoextension
from test_pebble import LooseRelation

EP = Vocabulary((("E", 2), ("P", 1)))


@pytest.fixture
def report(capsys):
    def emit(n, ok, detail, elapsed=None, limit=None):
        within = limit is None or elapsed < limit
        status = "PASS" if ok and within else "FAIL"
        timing = "" if elapsed is None else f" ({elapsed:.1f}s" + ("" if limit is None else f", limit {limit}s") + ")"
        with capsys.disabled():
            print(f"\ncriterion {n}: {status} {detail}{timing}")
        assert ok, detail
        assert within, f"criterion {n} took {elapsed:.1f}s, limit {limit}s"
    return emit


@pytest.fixture(scope="module")
def sample():
    from gamecomonads.samples import digraphs_up_to
    return digraphs_up_to(3)


@pytest.fixture(scope="module")
def bf_results(sample):
    """Back-and-forth verdicts and strategies on every pair of the sample, k = 1..3."""
    t0 = time.time()
    out = {}
    for k in (1, 2, 3):
        for i, a in enumerate(sample):
            for j, b in enumerate(sample):
                out[i, j, k] = ef_bf_game(a, b, k)
    out["elapsed"] = time.time() - t0
    return out


def test_criterion_1_comonad_laws(report):
    t0 = time.time()
    failures, runs, skipped = [], 0, 0
    small = [s for n in (1, 2) for s in all_structures(E2, n)] + [s for n in (1, 2) for s in all_structures(EP, n)]
    jobs = [(EF(k), a) for a in small for k in (1, 2, 3)]
    jobs += [(Pebble(k, n), a) for a in small for k in (1, 2) for n in (1, 2)]
    modal_bases = [s for n in (1, 2, 3) for s in all_structures(E2, n)] + [s for n in (1, 2) for s in all_structures(EP, n)]
    jobs += [(Modal(k), a.with_point(x)) for a in modal_bases for x in a.universe for k in (0, 1, 2)]
    for c, a in jobs:
        rep = check_laws(c, a)
        runs += 1
        skipped += not rep.complete
        if not rep.ok:
            failures.append((c, a, rep.failures()))
    mutants = [
        (FirstElementCounit(2), complete(2)), (ShiftedCoextension(2), complete(2)), (DroppedComultiply(2), complete(2)),
        (PebbleRenumbers(2, 2), complete(2)), (LooseRelation(2, 2), complete(2)),
    ]
    from gamecomonads.samples import chain
    mutants.append((ForgetfulModal(2), chain(2)))
    missed = [type(c).__name__ for c, a in mutants if check_laws(c, a).ok]
    ok = not failures and not skipped and not missed
    report(1, ok, f"{runs} law reports, {len(failures)} failing, {skipped} incomplete; "
                  f"{len(mutants) - len(missed)}/{len(mutants)} mutants caught", time.time() - t0, 60)


def test_criterion_2_tree_depth_is_ef_coalgebra_number(report, graphs6):
    t0 = time.time()
    bad = []
    for g in graphs6:
        a = graph_structure(g)
        td, f = tree_depth(g)
        alpha = forest_cover_to_coalgebra(a, f, td)
        if not alpha.valid or coalgebra_to_forest_cover(alpha).height() > td:
            bad.append((g, "coalgebra at optimum"))
        # no forest cover of height td-1 exists, hence no E_{td-1} coalgebra
        if forest_cover_min_height(g.n, g.edges) != td:
            bad.append((g, "oracle height"))
        if td > 1:
            try:
                forest_cover_to_coalgebra(a, f, td - 1)
                bad.append((g, "accepted k-1"))
            except CertificateError:
                pass
    report(2, not bad, f"{len(graphs6)} graphs, {len(bad)} mismatches", time.time() - t0, 300)


def test_criterion_3_tree_width_plus_one_is_pebble_coalgebra_number(report, graphs6):
    t0 = time.time()
    bad = []
    for g in graphs6:
        a = graph_structure(g)
        tw, t = tree_width(g)
        k = tw + 1
        cover = decomposition_to_pebble_cover(make_orderly(t), k)
        alpha = pebble_cover_to_coalgebra(a, cover, k)
        if not alpha.valid:
            bad.append((g, "coalgebra"))
            continue
        # and back: coalgebra -> cover -> decomposition of width < k
        back = pebble_cover_to_decomposition(coalgebra_to_pebble_cover(alpha), k)
        if back.problems(g) or back.width != tw:
            bad.append((g, "round trip"))
        # no decomposition of width tw-1, hence no P_tw coalgebra
        if elimination_min_width(g.n, g.edges) != tw:
            bad.append((g, "oracle width"))
        if tw > 0:
            try:
                decomposition_to_pebble_cover(make_orderly(t), tw)
                bad.append((g, "accepted k-1"))
            except CertificateError:
                pass
    report(3, not bad, f"{len(graphs6)} graphs, {len(bad)} mismatches", time.time() - t0, 600)


def test_criterion_4_existential_game_matches_I_morphism_search(report, sample):
    t0 = time.time()
    disagree, total, positives = 0, 0, 0
    targets = [add_identity_relation(b) for b in sample]
    for k in (1, 2, 3):
        for i, a in enumerate(sample):
            ga = EF(k).build(add_identity_relation(a)).structure
            for j, b in enumerate(sample):
                game = exists_ckm_ef(a, b, k, want_strategy=False)[0]
                search = find_homomorphism(ga, targets[j]) is not None
                disagree += game != search
                positives += game
                total += 1
    report(4, disagree == 0, f"{total} (A, B, k) triples, {positives} Duplicator wins, {disagree} disagreements",
           time.time() - t0, 600)


def test_criterion_5_equivalence_ladder(report, sample, bf_results):
    t0 = time.time()
    broken = []
    gap_bf_not_bij = gap_ex_not_bf = None
    games = {key: v for key, v in bf_results.items() if key != "elapsed"}
    for (i, j, k), (bf, _) in games.items():
        a, b = sample[i], sample[j]
        bij = bijection_game(a, b, k)
        ex = equiv_existential(a, b, k, "ef")
        if (bij and not bf) or (bf and not ex):
            broken.append((i, j, k))
        if bf and not bij and gap_bf_not_bij is None:
            gap_bf_not_bij = (i, j, k)
        if ex and not bf and gap_ex_not_bf is None:
            gap_ex_not_bf = (i, j, k)
    k3, k4 = complete(3), complete(4)
    named = (ef_bf_game(k3, k4, 3)[0] and not ef_bf_game(k3, k4, 4)[0]
             and not any(bijection_game(k3, k4, k) for k in (1, 2, 3, 4)))
    ok = not broken and gap_bf_not_bij and gap_ex_not_bf and named
    report(5, bool(ok), f"{len(games)} verdict triples, {len(broken)} non-monotone; "
                        f"gaps witnessed bf>bij at {gap_bf_not_bij}, ex>bf at {gap_ex_not_bf}; K3/K4 {named}",
           time.time() - t0 + bf_results["elapsed"])


def test_criterion_6_rewrites(report):
    t0 = time.time()
    structures = [s for n in (1, 2, 3) for s in all_structures(E2, n)]
    bad = []
    graphs = atlas_graphs(5, connected_only=True)
    for g in graphs:
        a = graph_structure(g)
        q = canonical_cq(a)
        truth = [model_check(b, q) for b in structures]
        td, forest = tree_depth(g)
        f1, t1 = minimize_quantifier_rank(a, forest, trace=True)
        tw, dec = tree_width(g)
        f2, t2 = minimize_variables(a, decomposition_to_pebble_cover(make_orderly(dec), tw + 1), trace=True)
        if quantifier_rank(f1) != td:
            bad.append((g, "rank"))
        if variable_count(f2) != tw + 1:
            bad.append((g, "variables"))
        replay_trace(t1, allowed=("R1", "R2", "R3"))
        replay_trace(t2, allowed=("R1", "R2", "R4"))
        for f in (f1, f2):
            if [model_check(b, f) for b in structures] != truth:
                bad.append((g, "semantics"))
    report(6, not bad, f"{len(graphs)} connected graphs, {len(bad)} failures, checked on {len(structures)} structures",
           time.time() - t0, 600)


def test_criterion_7_spans(report, sample, bf_results):
    t0 = time.time()
    wins = bad = 0
    for key, value in bf_results.items():
        if key == "elapsed" or not value[0]:
            continue
        wins += 1
        (i, j, k), strat = key, value[1]
        a, b = sample[i], sample[j]
        span = strategy_to_span(a, b, k, strat, "ef")
        if not span.valid or not replay_span(span, a, b):
            bad += 1
    report(7, wins > 0 and bad == 0, f"{wins} Duplicator wins, {bad} bad certificates", time.time() - t0)


def test_criterion_8_modal_battery(report):
    t0 = time.time()
    rng = random.Random(8)
    disagree = graded_only = coalg_fail = sims = 0
    for _ in range(200):
        a = random_structure(rng, rng.randint(1, 3), EP, 0.4, pointed=True)
        b = random_structure(rng, rng.randint(1, 3), EP, 0.4, pointed=True)
        for k in (0, 1, 2):
            m = modal_hom_equiv_check(a, b, k)
            disagree += not m.agree
            sims += m.simulation
            graded_only += graded_bisim_game(a, b, k) and not bisim_game(a, b, k)
            alpha = modal_coalgebra(unravel(a, k).structure, k)
            coalg_fail += alpha is None or not alpha.valid
    ok = disagree == graded_only == coalg_fail == 0
    report(8, ok, f"200 pairs x k=0..2: {sims} simulations, {disagree} sim/hom disagreements, {graded_only} graded-not-plain, "
                  f"{coalg_fail} unravellings without a coalgebra", time.time() - t0, 120)


def test_criterion_9_ef_to_pebble(report, graphs6, sample):
    t0 = time.time()
    law_bad = 0
    rng = random.Random(9)
    law_sample = [graph_structure(g) for g in atlas_graphs(4)] + rng.sample(sample, 30)
    for a in law_sample:
        for k in (1, 2, 3):
            law_bad += not check_ef_to_pebble(a, k).ok
    coalg_bad = 0
    for g in graphs6:
        a = graph_structure(g)
        td, f = tree_depth(g)
        beta = ef_coalgebra_to_pebble(forest_cover_to_coalgebra(a, f))
        ok = beta.valid
        if ok:
            dec = pebble_cover_to_decomposition(coalgebra_to_pebble_cover(beta), td)
            ok = not dec.problems(g) and dec.width + 1 <= td and tree_width(g)[0] <= dec.width
        coalg_bad += not ok
    ok = law_bad == 0 and coalg_bad == 0
    report(9, ok, f"{len(law_sample) * 3} morphism reports, {law_bad} failing; "
                  f"{len(graphs6)} EF coalgebras through t, {coalg_bad} invalid", time.time() - t0)
