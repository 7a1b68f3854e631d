import random

import pytest

from gamecomonads.decompositions import sync_tree_check
from gamecomonads.homs import find_isomorphism
from gamecomonads.modal import (
    Modal, check_modal_comonad_laws, m_omega_approx, modal_coextension, modal_counit, modal_hom_equiv_check,
    modal_to_pebble2, simulation_preorder, unravel,
)
from gamecomonads.pebble import Pebble
from gamecomonads.samples import chain, random_structure, self_loop
from gamecomonads.structures import Structure, StructureError, Vocabulary, is_homomorphism

from oracles import simulation_oracle

EP = Vocabulary((("E", 2), ("P", 1)))


def test_self_loop_unravels_to_a_chain():
    r = unravel(self_loop(), 2)
    assert r.structure.size == 3
    assert r.plays == [((None, 0),), ((None, 0), ("E", 0)), ((None, 0), ("E", 0), ("E", 0))]
    assert r.structure.relations["E"] == frozenset({(0, 1), (1, 2)})
    assert r.structure.name(2) == "[0|E|0|E|0]"


def test_depth_zero_keeps_unary_profile():
    a = Structure(EP, 2, {"E": {(0, 1)}, "P": {(1,)}}, point=1)
    r = unravel(a, 0)
    assert r.structure.size == 1 and r.structure.relations["P"] == frozenset({(0,)})
    assert not r.structure.relations["E"]


def test_depth_cutoff():
    r = unravel(chain(2), 1)
    assert r.plays == [((None, 0),), ((None, 0), ("E", 1))]


def test_rejects_ternary_and_unpointed():
    with pytest.raises(StructureError):
        unravel(Structure(Vocabulary.of(T=3), 1, {}, point=0), 1)
    with pytest.raises(StructureError):
        unravel(chain(1).unpointed(), 1)


def test_structure_maps():
    assert modal_counit(((None, 0), ("E", 1))) == 1
    plays = list(Modal(2).plays(self_loop()))
    assert len(plays) == 3
    assert all(modal_coextension(modal_counit)(s) == s for s in plays)
    # f* preserves the transitions of the unravelling
    r = unravel(self_loop(), 2)
    f = {s: 0 for s in plays}
    ext = modal_coextension(f)
    for i, j in r.structure.relations["E"]:
        assert Modal(2).holds(self_loop(), "E", [ext(r.plays[i]), ext(r.plays[j])])


def test_laws():
    a = Structure(EP, 3, {"E": {(0, 1), (1, 2), (0, 2)}, "P": {(2,)}}, point=0)
    for k in (0, 1, 2):
        rep = check_modal_comonad_laws(a, k)
        assert rep.ok, str(rep)


def test_simulation_examples():
    a, b = chain(1), chain(2)
    assert simulation_preorder(a, b, 2)
    assert not simulation_preorder(b, a, 2)
    x = Structure(EP, 2, {"E": {(0, 1)}}, point=0)
    y = Structure(EP, 1, {}, point=0)
    assert simulation_preorder(x, y, 0)


def test_hom_equivalence_examples():
    r = modal_hom_equiv_check(self_loop(), self_loop(), 3)
    assert r.homomorphism and r.simulation
    r = modal_hom_equiv_check(chain(2), chain(1), 2)
    assert not r.homomorphism and not r.simulation


def _random_pointed(rng, n):
    return random_structure(rng, n, EP, density=0.35, pointed=True)


def test_random_pairs_agree_with_oracle():
    rng = random.Random(11)
    for _ in range(100):
        a, b = _random_pointed(rng, rng.randint(1, 3)), _random_pointed(rng, rng.randint(1, 3))
        k = rng.randint(0, 2)
        verdict = modal_hom_equiv_check(a, b, k)
        assert verdict.agree
        assert verdict.simulation == simulation_oracle(a, b, k, a.point, b.point)


def test_simulation_reflexive_transitive_monotone():
    rng = random.Random(12)
    for _ in range(60):
        a, b, c = (_random_pointed(rng, rng.randint(1, 3)) for _ in range(3))
        for k in range(3):
            assert simulation_preorder(a, a, k)
            if simulation_preorder(a, b, k) and simulation_preorder(b, c, k):
                assert simulation_preorder(a, c, k)
            if simulation_preorder(a, b, k + 1):
                assert simulation_preorder(a, b, k)


def test_unravelling_is_a_sync_tree():
    rng = random.Random(13)
    for _ in range(40):
        a = _random_pointed(rng, rng.randint(1, 3))
        for k in range(3):
            h = sync_tree_check(unravel(a, k).structure)
            assert h is not None and h <= k


def test_m_omega_stabilizes_on_acyclic_base():
    a = chain(2)
    approx = m_omega_approx(a, 2)
    assert approx.stabilizes()
    assert find_isomorphism(unravel(a, 2).structure, unravel(a, 3).structure) is not None
    assert not m_omega_approx(a, 1).stabilizes()


def test_m_omega_self_loop_grows():
    approx = m_omega_approx(self_loop(), 4)
    assert [s.structure.size for s in approx.stages] == [1, 2, 3, 4, 5]
    assert not approx.stabilizes()
    for d in range(4):
        inc = approx.inclusion(d, d + 1)
        lo, hi = approx.stages[d], approx.stages[d + 1]
        assert inc[lo.structure.point] == hi.structure.point
        assert all(modal_counit(hi.plays[inc[i]]) == modal_counit(s) for i, s in enumerate(lo.plays))
        assert is_homomorphism(inc, lo.structure, hi.structure)


def test_modal_to_pebble2():
    assert modal_to_pebble2(((None, 0),)) == ((1, 0),)
    assert modal_to_pebble2(((None, 0), ("E", 1), ("E", 2))) == ((1, 0), (2, 1), (1, 2))


def test_modal_to_pebble2_is_a_homomorphism_on_the_chain():
    a = chain(3)
    r = unravel(a, 3)
    p = Pebble(2, 4)
    base = a.unpointed()
    for name, ts in r.structure.relations.items():
        for tup in ts:
            img = [modal_to_pebble2(r.plays[i]) for i in tup]
            assert p.holds(base, name, img)
    assert modal_to_pebble2(r.plays[r.structure.point]) == ((1, a.point),)
    # the tuples used are exactly the E-steps, so every one was checked
    assert len(r.structure.relations["E"]) == 3


def test_unary_predicates_follow_the_counit():
    a = Structure(EP, 2, {"E": {(0, 1)}, "P": {(1,)}}, point=0)
    r = unravel(a, 1)
    assert [r.plays[i] for (i,) in r.structure.relations["P"]] == [((None, 0), ("E", 1))]
