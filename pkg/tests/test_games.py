import random
from itertools import combinations

import pytest

from gamecomonads.games import (
    BfStrategy, bijection_game, bisim_game, bisim_strategy, ef_bf_game, graded_bisim_game,
    is_open_pathwise_embedding, open_pathwise_embedding_failure, pebble_bf_game, pebble_bijection_game,
    replay_span, strategy_to_span,
)
from gamecomonads.homs import equiv_existential
from gamecomonads.modal import simulation_preorder
from gamecomonads.samples import chain, complete, cycle, path, random_structure
from gamecomonads.structures import Forest, Structure, StructureError, TreeStructure, Vocabulary

from oracles import ef_iso_game

K3, K4 = complete(3), complete(4)
EP = Vocabulary((("E", 2), ("P", 1)))


def test_ef_bf_examples():
    assert ef_bf_game(K3, K4, 3)[0]
    assert not ef_bf_game(K3, K4, 4)[0]
    for k in (1, 2, 3):
        assert ef_bf_game(cycle(4), cycle(4), k)[0]


def test_ef_bf_matches_raw_history_recursion(digraphs3):
    rng = random.Random(0)
    for _ in range(120):
        a, b = rng.choice(digraphs3), rng.choice(digraphs3)
        k = rng.randint(1, 3)
        assert ef_bf_game(a, b, k, want_strategy=False)[0] == ef_iso_game(a, b, k)


def test_pebble_bf_examples():
    assert pebble_bf_game(K3, K4, 3)[0]
    assert not pebble_bf_game(K3, K4, 4)[0]
    assert pebble_bf_game(path(4), path(4), 2)[0]
    # two pebbles cannot tell long cycles apart; three can count a triangle
    assert pebble_bf_game(cycle(6), cycle(7), 2)[0]
    assert not pebble_bf_game(K3, cycle(6), 3)[0]


def test_pebble_rounds_option():
    # with unbounded rounds two pebbles walk along P4 and expose the endpoint degree
    assert not pebble_bf_game(path(3), path(4), 2)[0]
    assert pebble_bf_game(path(3), path(4), 2, rounds=1)[0]


def test_bisim_examples():
    a, b = chain(1), chain(2)
    assert bisim_game(a, b, 1)
    assert not bisim_game(a, b, 2)
    x = Structure(EP, 2, {"E": {(0, 1)}}, point=0)
    y = Structure(EP, 1, {}, point=0)
    assert bisim_game(x, y, 0)


def test_bijection_examples():
    for k in (1, 2, 3):
        assert not bijection_game(K3, K4, k)
        assert not pebble_bijection_game(K3, K4, k)
        assert bijection_game(cycle(4), cycle(4), k)
        assert pebble_bijection_game(cycle(4), cycle(4), k)
    assert bijection_game(path(3), K3, 1)
    assert not bijection_game(path(3), K3, 2)
    assert not pebble_bijection_game(path(3), K3, 2)


def test_graded_examples():
    two = Structure(EP, 3, {"E": {(0, 1), (0, 2)}}, point=0)
    one = Structure(EP, 2, {"E": {(0, 1)}}, point=0)
    assert not graded_bisim_game(two, one, 1)
    assert bisim_game(two, one, 1)
    for k in range(3):
        assert graded_bisim_game(two, two, k)


def _pointed(rng):
    return random_structure(rng, rng.randint(1, 3), EP, density=0.4, pointed=True)


def test_graded_implies_plain_and_bisim_implies_simulations():
    rng = random.Random(1)
    for _ in range(300):
        a, b = _pointed(rng), _pointed(rng)
        for k in range(3):
            g, s = graded_bisim_game(a, b, k), bisim_game(a, b, k)
            assert s or not g
            if s:
                assert simulation_preorder(a, b, k) and simulation_preorder(b, a, k)


def test_ladder_on_sample(digraphs3):
    rng = random.Random(2)
    for _ in range(150):
        a, b = rng.choice(digraphs3), rng.choice(digraphs3)
        for k in (1, 2):
            bij = bijection_game(a, b, k)
            bf = ef_bf_game(a, b, k, want_strategy=False)[0]
            ex = equiv_existential(a, b, k, "ef")
            assert (not bij or bf) and (not bf or ex)


def _copycat(a, k):
    strat = BfStrategy("ef", k)
    for r in range(k):
        for S in combinations(a.universe, r):
            key = frozenset((x, x) for x in S)
            for side in ("A", "B"):
                for z in a.universe:
                    strat.table[(key, side, z)] = z
    return strat


def test_copycat_span_is_the_diagonal():
    a = path(3)
    span = strategy_to_span(a, a, 2, _copycat(a, 2), "ef")
    assert span.valid
    assert all(span.left_plays[i] == span.right_plays[j] for i, j in zip(span.p, span.q))
    # every play appears exactly once
    assert sorted(span.left_plays[i] for i in span.p) == sorted(span.left_plays)
    assert is_open_pathwise_embedding(span.p, span.carrier, span.left)
    assert replay_span(span, a, a)


def test_k3_k4_span():
    win, strat = ef_bf_game(K3, K4, 3)
    span = strategy_to_span(K3, K4, 3, strat, "ef")
    assert span.check() == (None, None)
    assert replay_span(span, K3, K4)


def test_losing_configuration_has_no_span():
    win, strat = ef_bf_game(K3, K4, 4)
    assert not win
    with pytest.raises(StructureError):
        strategy_to_span(K3, K4, 4, strat, "ef")


def test_pebble_span_needs_rounds():
    win, strat = pebble_bf_game(K3, K4, 2, rounds=2)
    assert win
    with pytest.raises(StructureError):
        strategy_to_span(K3, K4, 2, strat, "pebble")
    span = strategy_to_span(K3, K4, 2, strat, "pebble", rounds=2)
    assert span.valid and replay_span(span, K3, K4)


def test_modal_span():
    a = Structure(EP, 3, {"E": {(0, 1), (0, 2)}, "P": {(1,), (2,)}}, point=0)
    b = Structure(EP, 2, {"E": {(0, 1)}, "P": {(1,)}}, point=0)
    span = strategy_to_span(a, b, 2, bisim_strategy(a, b, 2), "modal")
    assert span.valid and replay_span(span, a, b)
    assert bisim_strategy(chain(1), chain(2), 2) is None


def test_identity_on_a_tree_is_open():
    s = Structure(Vocabulary.of(P=1), 3, {"P": {(1,)}})
    t = TreeStructure(s, Forest((None, 0, 0)))
    assert is_open_pathwise_embedding([0, 1, 2], t, t)


def test_collapsing_siblings_with_different_profiles_fails():
    s = Structure(Vocabulary.of(P=1), 3, {"P": {(1,)}})
    x = TreeStructure(s, Forest((None, 0, 0)))
    y = TreeStructure(Structure(Vocabulary.of(P=1), 2, {"P": {(1,)}}), Forest((None, 0)))
    assert "not embedded" in open_pathwise_embedding_failure([0, 1, 1], x, y)


def test_missing_branch_breaks_path_lifting():
    s = Structure(Vocabulary.of(P=1), 2, {})
    x = TreeStructure(s, Forest((None, 0)))
    y = TreeStructure(Structure(Vocabulary.of(P=1), 3, {}), Forest((None, 0, 0)))
    assert "cannot be lifted" in open_pathwise_embedding_failure([0, 1], x, y)
