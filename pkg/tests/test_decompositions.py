from itertools import product

import pytest

from gamecomonads.decompositions import (
    CertificateError, Coalgebra, PebbleForestCover, TreeDecomposition, coalgebra_morphism_verdicts,
    coalgebra_number, coalgebra_to_forest_cover, coalgebra_to_pebble_cover, decomposition_from_order,
    decomposition_to_pebble_cover, ef_coalgebra_to_pebble, elimination_width, forest_cover_to_coalgebra,
    generated_submodel, is_coalgebra_morphism, is_forest_cover, make_orderly, modal_coalgebra,
    pebble_cover_to_coalgebra, pebble_cover_to_decomposition, sync_tree_check, tree_depth, tree_width,
)
from gamecomonads.modal import unravel
from gamecomonads.samples import E2, chain, complete, cycle, edgeless, grid, path, self_loop, star
from gamecomonads.structures import (
    Forest, Graph, ResourceLimit, Structure, StructureError, Vocabulary, gaifman, graph_structure,
)

from conftest import atlas_graphs
from oracles import elimination_min_width, forest_cover_min_height


def forests(n):
    for par in product([None, *range(n)], repeat=n):
        try:
            yield Forest(par)
        except StructureError:
            pass


def test_tree_depth_examples():
    assert tree_depth(Graph(1, []))[0] == 1
    d, f = tree_depth(gaifman(path(3)))
    assert d == 2 and f.parent == (1, None, 1)
    for n in range(1, 6):
        assert tree_depth(gaifman(complete(n)))[0] == n == forest_cover_min_height(n, gaifman(complete(n)).edges)


def test_tree_depth_and_width_match_oracles(graphs6):
    for g in graphs6:
        d, f = tree_depth(g)
        assert is_forest_cover(g, f) and f.height() == d
        assert d == forest_cover_min_height(g.n, g.edges), g
        w, t = tree_width(g)
        assert not t.problems(g) and t.width == w
        assert w == elimination_min_width(g.n, g.edges), g


def test_tree_width_examples():
    assert tree_width(gaifman(star(4)))[0] == 1
    assert tree_width(gaifman(cycle(4)))[0] == 2
    assert tree_width(gaifman(complete(4)))[0] == 3
    assert tree_width(gaifman(grid(3, 3)))[0] == 3
    with pytest.raises(ResourceLimit):
        tree_width(Graph(21, []))


def test_decomposition_from_order():
    g = gaifman(cycle(5))
    t = decomposition_from_order(g, [0, 1, 2, 3, 4])
    assert not t.problems(g) and t.width == elimination_width(g, range(5)) == 2


def test_decomposition_validator_reports():
    g = gaifman(path(3))
    bad = TreeDecomposition((None, 0, 1), ({0, 1}, {2}, {1, 2}))
    assert any("not connected" in p for p in bad.problems(g))
    assert any("no bag" in p for p in TreeDecomposition((None,), ({0, 1},)).problems(g))


def test_forest_cover_to_coalgebra_examples():
    p3 = path(3)
    alpha = forest_cover_to_coalgebra(p3, Forest((1, None, 1)))
    assert alpha.alpha == ((1, 0), (1,), (1, 2)) and alpha.valid
    e = edgeless(3)
    alpha = forest_cover_to_coalgebra(e, Forest((None, None, None)))
    assert alpha.alpha == ((0,), (1,), (2,))
    assert coalgebra_to_forest_cover(alpha).parent == (None, None, None)


def test_forest_cover_round_trips_on_small_graphs():
    for g in atlas_graphs(4):
        a = graph_structure(g)
        for f in forests(g.n):
            if is_forest_cover(g, f):
                assert coalgebra_to_forest_cover(forest_cover_to_coalgebra(a, f)) == f


def test_invalid_cover_rejected():
    with pytest.raises(CertificateError):
        forest_cover_to_coalgebra(path(3), Forest((None, None, None)))
    with pytest.raises(CertificateError):
        forest_cover_to_coalgebra(path(3), Forest((1, None, 1)), k=1)
    with pytest.raises(StructureError):
        forest_cover_to_coalgebra(complete(1), Forest((None,)), k=0)


def test_counit_fault_reports_witness():
    a = path(3)
    bad = Coalgebra("ef", 2, a, ((1, 0), (1,), (1, 0)))
    with pytest.raises(CertificateError) as e:
        coalgebra_to_forest_cover(bad)
    assert e.value.witness == 2


def test_make_orderly():
    single = TreeDecomposition((None,), ({0, 1, 2},))
    t = make_orderly(single)
    assert t.parent == (None, 0, 1) and [sorted(b) for b in t.bags] == [[0], [0, 1], [0, 1, 2]]
    assert t.width == 2 and t.is_orderly()
    already = TreeDecomposition((None, 0), ({0}, {0, 1}))
    assert make_orderly(already) == already
    for g in atlas_graphs(5):
        _, d = tree_width(g)
        o = make_orderly(d)
        assert o.width == d.width and o.is_orderly() and not o.problems(g)


def test_decomposition_to_pebble_cover_examples():
    k3 = gaifman(complete(3))
    _, t = tree_width(k3)
    c = decomposition_to_pebble_cover(make_orderly(t), 3)
    assert c.forest.height() == 3 and sorted(c.pebbles) == [1, 2, 3] and not c.problems(k3)
    p3 = gaifman(path(3))
    _, t = tree_width(p3)
    c = decomposition_to_pebble_cover(make_orderly(t), 2)
    assert not c.problems(p3)
    with pytest.raises(CertificateError):
        decomposition_to_pebble_cover(make_orderly(tree_width(k3)[1]), 2)
    with pytest.raises(CertificateError):
        decomposition_to_pebble_cover(TreeDecomposition((None,), ({0, 1, 2},)), 3)


def test_pebble_cover_to_decomposition_examples():
    k3 = gaifman(complete(3))
    c = PebbleForestCover(Forest((None, 0, 1)), (1, 2, 3), 3)
    t = pebble_cover_to_decomposition(c)
    assert t.width == 2 and not t.problems(k3)
    e = gaifman(edgeless(3))
    t = pebble_cover_to_decomposition(PebbleForestCover(Forest((None, None, None)), (1, 1, 1), 1))
    assert t.width == 0 and not t.problems(e)


def test_pebble_cover_validator():
    p3 = gaifman(path(3))
    # chain 0 < 1 < 2 reusing pebble 1 on 2: harmless for P3, fatal once 0-2 is an edge
    ok = PebbleForestCover(Forest((None, 0, 1)), (1, 2, 1), 2)
    assert not ok.problems(p3)
    k3 = gaifman(complete(3))
    bad = PebbleForestCover(Forest((None, 0, 1)), (1, 2, 1), 2)
    assert any("reused" in p for p in bad.problems(k3))


def test_all_decomposition_cover_round_trips_small(graphs6):
    for g in graphs6:
        if g.n > 5:
            continue
        w, t = tree_width(g)
        k = w + 1
        c = decomposition_to_pebble_cover(make_orderly(t), k)
        assert not c.problems(g)
        t2 = pebble_cover_to_decomposition(c, k)
        assert t2.width < k and not t2.problems(g)
        c2 = decomposition_to_pebble_cover(make_orderly(t2), k)
        assert not c2.problems(g)


def test_pebble_coalgebra_round_trip_on_all_covers():
    for g in atlas_graphs(4):
        a = graph_structure(g)
        for f in forests(g.n):
            if not is_forest_cover(g, f):
                continue
            for peb in product(range(1, 3), repeat=g.n):
                c = PebbleForestCover(f, peb, 2)
                if c.problems(g):
                    continue
                alpha = pebble_cover_to_coalgebra(a, c)
                assert alpha.valid
                assert coalgebra_to_pebble_cover(alpha) == c


def test_pebble_coalgebra_examples():
    e = edgeless(2)
    alpha = pebble_cover_to_coalgebra(e, PebbleForestCover(Forest((None, None)), (1, 1), 1))
    assert alpha.alpha == (((1, 0),), ((1, 1),))
    c = PebbleForestCover(Forest((1, None, 1)), (2, 1, 2), 2)
    assert pebble_cover_to_coalgebra(path(3), c).valid


def test_coalgebra_numbers():
    assert coalgebra_number(complete(3), "ef") == 3
    assert coalgebra_number(complete(3), "pebble") == 3
    assert coalgebra_number(self_loop(), "modal") is None
    assert coalgebra_number(chain(2), "modal") == 2
    with pytest.raises(StructureError):
        coalgebra_number(complete(3), "other")


def test_sync_tree_check():
    assert sync_tree_check(chain(2)) == 2
    assert sync_tree_check(self_loop()) is None
    diamond = Structure(E2, 4, {"E": {(0, 1), (0, 2), (1, 3), (2, 3)}}, 0)
    assert sync_tree_check(diamond) is None
    # unreachable junk does not matter
    junk = Structure(E2, 4, {"E": {(0, 1), (2, 2), (3, 1)}}, 0)
    assert sync_tree_check(junk) == 1
    assert generated_submodel(junk)[1] == [0, 1]


def test_modal_coalgebra():
    alpha = modal_coalgebra(chain(2), 2)
    assert alpha.valid and alpha.alpha[2] == ((None, 0), ("E", 1), ("E", 2))
    assert modal_coalgebra(chain(2), 1) is None
    a = Structure(Vocabulary((("E", 2), ("P", 1))), 3, {"E": {(0, 1), (1, 0), (1, 2)}, "P": {(2,)}}, 0)
    for k in range(3):
        u = unravel(a, k).structure
        alpha = modal_coalgebra(u, k)
        assert alpha is not None and alpha.valid


def test_ef_coalgebra_into_pebbles():
    for g in atlas_graphs(5):
        a = graph_structure(g)
        d, f = tree_depth(g)
        beta = ef_coalgebra_to_pebble(forest_cover_to_coalgebra(a, f))
        assert beta.valid
        assert tree_width(g)[0] + 1 <= d


def _ef_coalgebras(max_n=3):
    out = []
    for g in atlas_graphs(max_n):
        a = graph_structure(g)
        for f in forests(g.n):
            if is_forest_cover(g, f):
                out.append(forest_cover_to_coalgebra(a, f, 3))
    return out


def _pebble_coalgebras(max_n=3):
    out = []
    for g in atlas_graphs(max_n):
        a = graph_structure(g)
        for f in forests(g.n):
            if not is_forest_cover(g, f):
                continue
            for peb in product((1, 2), repeat=g.n):
                c = PebbleForestCover(f, peb, 2)
                if not c.problems(g):
                    out.append(pebble_cover_to_coalgebra(a, c))
    return out


def test_coalgebra_morphism_examples():
    alpha = forest_cover_to_coalgebra(path(3), Forest((1, None, 1)))
    assert is_coalgebra_morphism([0, 1, 2], alpha, alpha)
    assert is_coalgebra_morphism([2, 1, 0], alpha, alpha)
    # the root moves
    assert not is_coalgebra_morphism([1, 0, 1], alpha, alpha)


@pytest.mark.parametrize("family", [_ef_coalgebras, _pebble_coalgebras])
def test_coalgebra_morphism_routes_agree_exhaustively(family):
    coalgebras = family()
    positives = 0
    for alpha in coalgebras:
        n = alpha.structure.size
        for beta in coalgebras:
            m = beta.structure.size
            for h in product(range(m), repeat=n):
                square, cover = coalgebra_morphism_verdicts(h, alpha, beta)
                assert square == cover
                positives += square
    assert positives


def test_morphism_needs_same_tag():
    alpha = forest_cover_to_coalgebra(path(2), Forest((None, 0)))
    beta = pebble_cover_to_coalgebra(path(2), PebbleForestCover(Forest((None, 0)), (1, 2), 2))
    with pytest.raises(StructureError):
        is_coalgebra_morphism([0, 1], alpha, beta)
