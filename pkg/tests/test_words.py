import itertools
import random

import pytest
from hypothesis import given, settings, strategies as st

from graphprod.errors import NotEquivalentError
from graphprod.words import (
    EMPTY,
    IDENTITY,
    FiniteGroup,
    GroupElement,
    SimplicialGraph,
    enumerate_minimal,
    generators,
    gp_inverse,
    gp_multiply,
    group_element,
    is_reduced,
    left_compatible,
    normalize,
    pentagon,
    reduce,
    right_compatible,
    sigma,
    split_left,
    split_right,
)

from oracles import brute_sigma, cayley_bfs, closure_reduced, definition_reduced, moves


def adjset(g):
    return set(g.edges)


AB_EDGE = SimplicialGraph(["a", "b"], [("a", "b")])
AB_FREE = SimplicialGraph.edgeless(["a", "b"])


class TestGraph:
    def test_link_pentagon(self):
        assert pentagon().link(1) == {2, 5}

    def test_link_edgeless_and_complete(self):
        assert SimplicialGraph.edgeless("abc").link("a") == frozenset()
        assert SimplicialGraph.complete("abc").link("a") == {"b", "c"}

    def test_star(self):
        assert pentagon().star(3) == {2, 3, 4}

    @pytest.mark.parametrize("s, expected", [(0, 1), (1, 5), (2, 5), (3, 0)])
    def test_pentagon_cliques(self, s, expected):
        cl = pentagon().cliques(s)
        assert len(cl) == expected
        if s == 0:
            assert cl == [frozenset()]

    def test_triangle_clique(self):
        assert SimplicialGraph.complete("abc").cliques(3) == [frozenset("abc")]

    @pytest.mark.parametrize("edges", [[("a", "a")], [("a", "b"), ("b", "a")], [("a", "z")], [("a",)]])
    def test_validation(self, edges):
        with pytest.raises(ValueError):
            SimplicialGraph(["a", "b"], edges)

    def test_unknown_vertex(self):
        with pytest.raises(ValueError):
            pentagon().link(9)


class TestReduction:
    def test_is_reduced_examples(self):
        assert is_reduced(AB_FREE, "aba")
        assert not is_reduced(AB_EDGE, "aba")
        assert not is_reduced(AB_FREE, "aa")

    def test_reduce_examples(self):
        assert reduce(AB_EDGE, "aba") == ("a", "b")
        assert reduce(AB_FREE, "aba") == ("a", "b", "a")
        assert reduce(AB_FREE, "aab") == ("a", "b")
        assert reduce(AB_EDGE, "aab") == ("a", "b")

    def test_normalize_examples(self):
        assert normalize(AB_EDGE, "ba") == ("a", "b")
        assert normalize(AB_FREE, "ba") == ("b", "a")
        assert normalize(pentagon(), (3, 1)) == (3, 1)
        assert normalize(pentagon(), (3, 2)) == (2, 3)

    def test_matches_definition_on_all_short_words(self):
        g = pentagon()
        for n in range(6):
            for w in itertools.product(g.vertices, repeat=n):
                assert is_reduced(g, w) == definition_reduced(adjset(g), w)


def random_graph(rng, n):
    verts = "abcde"[:n]
    edges = [e for e in itertools.combinations(verts, 2) if rng.random() < 0.5]
    return SimplicialGraph(verts, edges)


@st.composite
def graph_and_word(draw, max_vertices=5, max_len=8):
    n = draw(st.integers(1, max_vertices))
    verts = "abcde"[:n]
    pairs = list(itertools.combinations(verts, 2))
    mask = draw(st.lists(st.booleans(), min_size=len(pairs), max_size=len(pairs)))
    g = SimplicialGraph(verts, [p for p, m in zip(pairs, mask) if m])
    w = tuple(draw(st.lists(st.sampled_from(verts), max_size=max_len)))
    return g, w


class TestNormalizeProperties:
    @settings(max_examples=300, deadline=None)
    @given(graph_and_word())
    def test_idempotent_and_constant_under_single_moves(self, gw):
        g, w = gw
        nf = normalize(g, w)
        assert normalize(g, nf) == nf
        assert is_reduced(g, nf)
        for u in moves(adjset(g), w):
            assert normalize(g, u) == nf

    @settings(max_examples=150, deadline=None)
    @given(graph_and_word(max_len=7))
    def test_reduced_words_in_closure_have_normal_length(self, gw):
        g, w = gw
        shortest, closure = closure_reduced(adjset(g), w)
        reduced_reachable = {u for u in closure if definition_reduced(adjset(g), u)}
        assert reduced_reachable == shortest
        assert {len(u) for u in reduced_reachable} == {len(normalize(g, w))}
        assert normalize(g, w) == min(shortest, key=g.word_key)


class TestSigma:
    def test_transposition(self):
        assert sigma(AB_EDGE, "ab", "ba").mapping == (1, 0)

    def test_identity(self):
        w = (1, 3, 5, 2)
        assert sigma(pentagon(), w, w).mapping == (0, 1, 2, 3)

    def test_not_equivalent(self):
        path = SimplicialGraph.path("abc")
        with pytest.raises(NotEquivalentError):
            sigma(path, "acb", "cab")

    def test_length_mismatch(self):
        with pytest.raises(NotEquivalentError):
            sigma(AB_FREE, "ab", "aba")

    def test_unique_and_admissible_by_brute_force(self):
        rng = random.Random(7)
        checked = 0
        while checked < 60:
            g = random_graph(rng, rng.randint(2, 5))
            w = normalize(g, [rng.choice(g.vertices) for _ in range(rng.randint(1, 9))])
            if not 1 <= len(w) <= 7:
                continue
            from oracles import swap_class
            others = sorted(swap_class(adjset(g), w))
            w2 = rng.choice(others)
            found = brute_sigma(w, w2)
            assert found == [sigma(g, w, w2).mapping]
            checked += 1

    def test_inverse_and_composition(self):
        g = SimplicialGraph.complete("abc")
        s1 = sigma(g, "abc", "bca")
        s2 = sigma(g, "bca", "cab")
        assert s1.then(s2) == sigma(g, "abc", "cab")
        assert s1.inverse() == sigma(g, "bca", "abc")


class TestEnumeration:
    def test_edge_pair(self):
        assert enumerate_minimal(AB_EDGE, 2) == [EMPTY, ("a",), ("b",), ("a", "b")]

    def test_free_pair(self):
        assert enumerate_minimal(AB_FREE, 2) == [EMPTY, ("a",), ("b",), ("a", "b"), ("b", "a")]

    def test_pentagon_count(self):
        # frozen from the brute-force count below
        assert len(enumerate_minimal(pentagon(), 2)) == 21

    @pytest.mark.parametrize("n", [1, 2, 3, 4])
    def test_matches_brute_force_count(self, n):
        rng = random.Random(n)
        for _ in range(4):
            g = random_graph(rng, n)
            for L in range(6):
                classes = {normalize(g, w) for k in range(L + 1)
                           for w in itertools.product(g.vertices, repeat=k)}
                words = enumerate_minimal(g, L)
                assert len(words) == len(classes)
                assert set(words) == classes

    def test_sorted_and_deterministic(self):
        g = pentagon()
        words = enumerate_minimal(g, 3)
        assert words == sorted(words, key=lambda w: (len(w), g.word_key(w)))
        assert words == enumerate_minimal(pentagon(), 3)


class TestCompatibility:
    def test_examples(self):
        assert left_compatible(AB_FREE, "a", EMPTY)
        assert not left_compatible(AB_FREE, "a", ("a",))
        assert not left_compatible(AB_EDGE, "a", normalize(AB_EDGE, "ba"))
        assert right_compatible(AB_FREE, "a", ("a", "b"))
        assert not right_compatible(AB_EDGE, "a", ("a", "b"))

    def test_split_examples(self):
        assert split_left(AB_FREE, "a", ("a", "b")) == ("b",)
        g = SimplicialGraph(["a", "b", "c"], [("a", "b")])
        g2 = SimplicialGraph(["a", "b", "c"], [("a", "c")])
        assert split_left(g2, "c", ("a", "c")) == ("a",)
        assert split_left(AB_FREE, "a", ("a",)) == EMPTY
        with pytest.raises(ValueError):
            split_left(AB_FREE, "b", ("a", "b"))
        assert split_right(g, "b", ("a", "b")) == ("a",)

    def test_split_inverts_concatenation(self):
        g = pentagon()
        for w in enumerate_minimal(g, 4):
            for v in g.vertices:
                assert left_compatible(g, v, w) == is_reduced(g, (v,) + w)
                assert right_compatible(g, v, w) == is_reduced(g, w + (v,))
                if not left_compatible(g, v, w):
                    u = split_left(g, v, w)
                    assert left_compatible(g, v, u)
                    assert normalize(g, (v,) + u) == w
                if not right_compatible(g, v, w):
                    u = split_right(g, v, w)
                    assert normalize(g, u + (v,)) == w


Z2 = FiniteGroup.cyclic(2)


class TestGroupProducts:
    def test_cancellation(self):
        g = AB_FREE
        groups = {"a": Z2, "b": Z2}
        x = GroupElement((("a", 1), ("b", 1)))
        assert gp_multiply(g, groups, x, GroupElement((("b", 1),))) == GroupElement((("a", 1),))

    def test_commuting_normal_form(self):
        groups = {"a": Z2, "b": Z2}
        out = gp_multiply(AB_EDGE, groups, GroupElement((("b", 1),)), GroupElement((("a", 1),)))
        assert out == GroupElement((("a", 1), ("b", 1)))

    def test_bad_label(self):
        with pytest.raises(ValueError):
            gp_multiply(AB_FREE, {"a": Z2, "b": Z2}, IDENTITY, GroupElement((("a", 5),)))

    def test_pentagon_ball_matches_relation_oracle(self):
        g = pentagon()
        groups = {v: Z2 for v in g.vertices}
        shells = [{IDENTITY}]
        seen = {IDENTITY}
        for n in range(3):
            nxt = {gp_multiply(g, groups, x, s) for x in shells[-1] for s in generators(g, groups)}
            nxt = {x for x in nxt if x not in seen}
            seen |= nxt
            shells.append(nxt)
        sizes = [len(s) for s in shells]
        assert sizes[:3] == [1, 5, 15]
        table = {v: [[0, 1], [1, 0]] for v in g.vertices}
        oracle = cayley_bfs(table, set(g.edges), {v: i for i, v in enumerate(g.vertices)}, 3)
        assert sizes == [len(s) for s in oracle]
        assert {x.letters for x in shells[3]} == oracle[3]

    def test_mixed_groups_relation_oracle(self):
        g = SimplicialGraph.path("abc")
        groups = {"a": FiniteGroup.cyclic(3), "b": Z2, "c": FiniteGroup.cyclic(3)}
        tables = {v: groups[v].table.tolist() for v in "abc"}
        oracle = cayley_bfs(tables, set(g.edges), {v: i for i, v in enumerate("abc")}, 3)
        ball = {IDENTITY}
        frontier = {IDENTITY}
        for _ in range(3):
            frontier = {gp_multiply(g, groups, x, s) for x in frontier for s in generators(g, groups)} - ball
            ball |= frontier
        for n in range(4):
            assert {x.letters for x in ball if len(x) == n} == oracle[n]

    @pytest.mark.parametrize("seed", range(5))
    def test_associative_with_inverses(self, seed):
        rng = random.Random(seed)
        g = random_graph(rng, 4)
        groups = {v: rng.choice([Z2, FiniteGroup.cyclic(3), FiniteGroup.cyclic(4)]) for v in g.vertices}
        if seed == 4:
            groups = {v: FiniteGroup.symmetric3() for v in g.vertices}

        def rand_elem():
            return group_element(g, groups, [(v := rng.choice(g.vertices), rng.randrange(groups[v].order))
                                             for _ in range(rng.randint(0, 6))])

        for _ in range(100):
            x, y, z = rand_elem(), rand_elem(), rand_elem()
            xy = gp_multiply(g, groups, x, y)
            assert gp_multiply(g, groups, xy, z) == gp_multiply(g, groups, x, gp_multiply(g, groups, y, z))
            assert gp_multiply(g, groups, x, gp_inverse(g, groups, x)) == IDENTITY
            assert gp_multiply(g, groups, IDENTITY, x) == x == gp_multiply(g, groups, x, IDENTITY)
            assert len(xy) <= len(x) + len(y)
            assert normalize(g, xy.word) == xy.word

    def test_group_validation(self):
        with pytest.raises(ValueError):
            FiniteGroup([[0, 1], [0, 1]])
        s3 = FiniteGroup.symmetric3()
        assert s3.order == 6
        assert all(s3.mul(x, s3.inv(x)) == s3.identity for x in range(6))
