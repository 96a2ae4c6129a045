import math
import random

import numpy as np
import pytest
import scipy.sparse as sp

from graphprod.errors import BudgetError
from graphprod.fusion import FusionData, bump_length, graph_length
from graphprod.rd import (
    RdEstimate,
    build_ball,
    convolution,
    full_norm,
    growth_series,
    power_norm,
    preset,
    qk_compress,
    random_coefficients,
    rd_fit,
    rd_norm,
    run_experiment,
    spectral_norm,
)
from graphprod.words import (
    FiniteGroup,
    GroupElement,
    SimplicialGraph,
    gp_inverse,
    gp_multiply,
    pentagon,
)

from oracles import brute_convolution_column, cayley_bfs, tree_radial_norm

Z2 = FiniteGroup.cyclic(2)
Z3 = FiniteGroup.cyclic(3)


def racg(g):
    return {v: Z2 for v in g.vertices}


DINF = SimplicialGraph.edgeless(["s", "t"])
FREE3 = SimplicialGraph.edgeless(["a", "b", "c"])
EDGE = SimplicialGraph(["a", "b"], [("a", "b")])


class TestBall:
    def test_dinfty_shells(self):
        assert build_ball(DINF, racg(DINF), 5).shell_sizes == [1, 2, 2, 2, 2, 2]

    @pytest.mark.parametrize("R", [2, 3, 5])
    def test_klein_group(self, R):
        b = build_ball(EDGE, racg(EDGE), R)
        assert len(b) == 4
        assert b.shell_sizes[:3] == [1, 2, 1]

    def test_pentagon(self):
        b = build_ball(pentagon(), racg(pentagon()), 2)
        assert len(b) == 21

    def test_free_product_closed_form(self):
        b = build_ball(FREE3, racg(FREE3), 8)
        assert b.shell_sizes == [1] + [3 * 2 ** (n - 1) for n in range(1, 9)]

    @pytest.mark.parametrize("g, groups", [
        (pentagon(), racg(pentagon())),
        (SimplicialGraph.path("abc"), {"a": Z3, "b": Z2, "c": Z3}),
    ])
    def test_matches_relation_oracle(self, g, groups):
        b = build_ball(g, groups, 3)
        tables = {v: groups[v].table.tolist() for v in g.vertices}
        oracle = cayley_bfs(tables, set(g.edges), {v: i for i, v in enumerate(g.vertices)}, 3)
        for n in range(4):
            assert {b.elements[i].letters for i in b.shell(n)} == oracle[n]

    def test_sorted_and_indexed(self):
        g = pentagon()
        b = build_ball(g, racg(g), 4)
        keys = [(len(x), [(g.index(v), s) for v, s in x.letters]) for x in b.elements]
        assert keys == sorted(keys)
        assert all(b.index[x.letters] == i for i, x in enumerate(b.elements))

    def test_generator_tables(self):
        g = SimplicialGraph.path("abc")
        groups = {"a": Z3, "b": Z2, "c": Z3}
        b = build_ball(g, groups, 4)
        for (v, s), table in b.left.items():
            for i, x in enumerate(b.elements):
                y = gp_multiply(g, groups, GroupElement(((v, s),)), x)
                assert table[i] == b.index.get(y.letters, -1)

    def test_budget(self):
        with pytest.raises(BudgetError):
            build_ball(FREE3, racg(FREE3), 12, max_size=1000)

    def test_missing_group(self):
        with pytest.raises(ValueError):
            build_ball(DINF, {"s": Z2}, 2)


class TestConvolution:
    def test_unit_is_identity_on_zone(self):
        b = build_ball(FREE3, racg(FREE3), 4)
        F = convolution(b, {(): 1.0})
        assert F.support_length == 0
        assert (F.matrix != sp.identity(len(b), format="csr")).nnz == 0

    def test_single_z2_swap(self):
        g = SimplicialGraph(["v"])
        b = build_ball(g, racg(g), 1)
        F = convolution(b, {(("v", 1),): 1.0})
        # column zone is length <= 0, so only the identity's column is filled
        assert F.matrix.toarray()[:, 0].tolist() == [0, 1]
        b2 = build_ball(g, racg(g), 3)
        F2 = convolution(b2, {(("v", 1),): 1.0})
        assert np.array_equal(F2.matrix.toarray(), np.array([[0, 1], [1, 0]]))
        assert np.isclose(full_norm(b2, {(("v", 1),): 1.0})[0], 1)

    @pytest.mark.parametrize("seed", range(3))
    def test_exact_on_validity_zone(self, seed):
        g = SimplicialGraph.path("abc")
        groups = {"a": Z3, "b": Z2, "c": Z3}
        b = build_ball(g, groups, 5)
        rng = random.Random(seed)
        supp = [b.elements[i].letters for i in b.ball_upto(2)]
        a = {x: complex(rng.gauss(0, 1), rng.gauss(0, 1)) for x in rng.sample(supp, 6)}
        F = convolution(b, a)
        dense = F.matrix.toarray()
        for j in F.zone:
            expected = np.zeros(len(b), complex)
            for y, c in brute_convolution_column(g, groups, a, b.elements[j]).items():
                expected[b.index[y]] += c
            assert np.array_equal(dense[:, j], expected)
        assert not dense[:, F.zone.stop:].any()
        assert math.isclose(F.l2_norm, math.sqrt(sum(abs(c) ** 2 for c in a.values())))

    def test_support_outside_ball(self):
        b = build_ball(DINF, racg(DINF), 2)
        with pytest.raises(ValueError):
            convolution(b, {(("s", 1), ("t", 1), ("s", 1)): 1.0})
        with pytest.raises(ValueError):
            convolution(b, {(("t", 1), ("t", 1)): 1.0})


class TestCompress:
    def test_scalar_only_diagonal(self):
        b = build_ball(FREE3, racg(FREE3), 4)
        F = convolution(b, {(): 2.5})
        for m in range(5):
            for l in range(5):
                blk = qk_compress(b, F, m, l)
                assert blk.any() == (m == l and blk.size > 0)

    def test_window(self):
        g = pentagon()
        b = build_ball(g, racg(g), 6)
        rng = np.random.default_rng(0)
        a = {b.elements[i].letters: rng.standard_normal() for i in b.ball_upto(2)}
        F = convolution(b, a)
        for l in range(5):
            for m in range(7):
                if m > 2 + l or m < l - 2:
                    assert not qk_compress(b, F, m, l).any()

    def test_pentagon_first_shell_block(self):
        g = pentagon()
        groups = racg(g)
        b = build_ball(g, groups, 3)
        rng = np.random.default_rng(1)
        a = {b.elements[i].letters: complex(*rng.standard_normal(2)) for i in b.ball_upto(1)}
        blk = qk_compress(b, convolution(b, a), 1, 1)
        shell = [b.elements[i] for i in b.shell(1)]
        assert blk.shape == (5, 5)
        for i, x in enumerate(shell):
            for j, h in enumerate(shell):
                d = gp_multiply(g, groups, x, gp_inverse(g, groups, h))
                expected = a.get(d.letters, 0) if len(d) <= 1 else 0
                assert blk[i, j] == expected

    def test_refuses_inexact_window(self):
        b = build_ball(DINF, racg(DINF), 4)
        F = convolution(b, {(("s", 1),): 1.0})
        with pytest.raises(BudgetError):
            qk_compress(b, F, 2, 4)
        with pytest.raises(BudgetError):
            qk_compress(b, F, 5, 1)


class TestNormEstimation:
    @pytest.mark.parametrize("seed", range(4))
    def test_power_and_lanczos_match_svd(self, seed):
        rng = np.random.default_rng(seed)
        B = sp.random(300, 200, density=0.05, random_state=seed, dtype=complex) * (1 + 1j)
        exact = np.linalg.norm(B.toarray(), 2)
        est, it = power_norm(B, rng)
        assert est <= exact * (1 + 1e-12)
        assert abs(est - exact) <= 1e-4 * exact
        lan, ok = spectral_norm(B, rng, dense_limit=0)
        assert ok and abs(lan - exact) <= 1e-8 * exact

    def test_zero_blocks(self):
        rng = np.random.default_rng(0)
        assert power_norm(sp.csr_matrix((3, 4)), rng) == (0.0, 0)
        assert spectral_norm(sp.csr_matrix((0, 4)), rng) == (0.0, True)

    def test_k_zero_is_exact(self):
        b = build_ball(FREE3, racg(FREE3), 4)
        for l in range(4):
            e = rd_norm(b, 0, l, l, trials=5, seed=3)
            assert e.estimate == 1.0
            assert rd_norm(b, 0, l, l + 1, trials=5, seed=3).estimate == 0.0

    def test_samples_are_deterministic_and_unit(self):
        b = build_ball(FREE3, racg(FREE3), 4)
        s1, s2 = random_coefficients(b, 2, 8, 5), random_coefficients(b, 2, 8, 5)
        assert np.array_equal(s1, s2)
        assert np.allclose(np.linalg.norm(s1, axis=1), 1)
        assert s1.shape == (8 + 3 + 1, 10)

    def test_chain_dominates(self):
        g = pentagon()
        b = build_ball(g, racg(g), 6)
        for k, l, m in [(1, 2, 2), (2, 2, 3), (3, 3, 2), (2, 4, 4)]:
            e = rd_norm(b, k, l, m, trials=8, seed=0)
            assert 0 < e.estimate <= e.bound_chain + 1e-12

    def test_finite_group_bound(self):
        g = SimplicialGraph.complete(["a", "b"])
        groups = {"a": Z2, "b": Z3}
        b = build_ball(g, groups, 6)
        for k, l, m in [(1, 1, 1), (2, 2, 2), (3, 1, 2), (4, 2, 2)]:
            assert rd_norm(b, k, l, m, trials=16, seed=1).estimate <= math.sqrt(6) + 1e-12

    def test_dense_and_sparse_paths_agree(self):
        g = pentagon()
        b = build_ball(g, racg(g), 6)
        d = rd_norm(b, 2, 3, 3, trials=4, seed=2)
        s = rd_norm(b, 2, 3, 3, trials=4, seed=2, dense_limit=0)
        assert abs(d.estimate - s.estimate) <= 1e-7 * d.estimate
        assert abs(d.bound_chain - s.bound_chain) <= 1e-7 * d.bound_chain

    def test_refuses_inexact_window(self):
        b = build_ball(DINF, racg(DINF), 6)
        with pytest.raises(BudgetError):
            rd_norm(b, 3, 4, 4)

    def test_full_norm_matches_radial_oracle(self):
        for R in (4, 6, 8):
            b = build_ball(FREE3, racg(FREE3), R)
            est, _ = full_norm(b, [(s, 1.0) for s in (((v, 1),) for v in "abc")])
            assert abs(est - tree_radial_norm(R)) <= 1e-8

    def test_monotone_in_radius(self):
        vals = []
        for R in range(2, 17, 2):
            b = build_ball(DINF, racg(DINF), R)
            vals.append(full_norm(b, {(("s", 1),): 1, (("t", 1),): 1})[0])
        assert all(x <= y + 1e-12 for x, y in zip(vals, vals[1:]))
        assert all(abs(v - tree_radial_norm(R, degree=2)) <= 1e-8 for v, R in zip(vals, range(2, 17, 2)))
        assert vals[-1] < 2


class TestGrowth:
    def test_models(self):
        assert growth_series(build_ball(DINF, racg(DINF), 8)).model == "polynomial"
        rep = growth_series(build_ball(FREE3, racg(FREE3), 8))
        assert rep.model == "exponential" and abs(rep.exponential_rate - 2) <= 1e-9
        fin = growth_series(build_ball(EDGE, racg(EDGE), 4))
        assert fin.sizes == [1, 2, 1, 0, 0] and fin.model == "finite"


class TestFit:
    @staticmethod
    def rows(values):
        return [RdEstimate(k, 0, 0, 1, 0, v, v) for k, v in enumerate(values)]

    def test_constant_gives_degree_zero(self):
        fit = rd_fit(self.rows([1.0] * 6))
        assert fit.degree == 0 and fit.constant == 1.0

    @pytest.mark.parametrize("power, degree", [(0.5, 1), (1.0, 1), (1.5, 2), (2.0, 2), (3.0, 3), (7.0, 4)])
    def test_degree_is_ceiling_of_growth(self, power, degree):
        fit = rd_fit(self.rows([0.7 * (k + 1) ** power for k in range(7)]))
        assert fit.degree == degree

    def test_dominates_with_nonpositive_residuals(self):
        rng = np.random.default_rng(0)
        vals = [(k + 1) ** 1.2 * rng.uniform(0.8, 1.2) for k in range(8)]
        fit = rd_fit(self.rows(vals))
        assert all(fit.bound(k) >= v * (1 - 1e-12) for k, v in enumerate(vals))
        assert all(r <= 1e-12 for r in fit.residuals.values())
        assert max(fit.residuals.values()) == pytest.approx(0, abs=1e-12)

    def test_empty(self):
        with pytest.raises(ValueError):
            rd_fit([])


class TestPresets:
    def test_unknown(self):
        with pytest.raises(ValueError):
            preset("torus")

    @pytest.mark.parametrize("name", ["dinfty", "z2free3", "pentagon", "clique", "free"])
    def test_windows_are_exact(self, name):
        p = preset(name)
        assert p.windows()
        for k, l, m in p.windows():
            assert l + k <= p.radius and m <= p.radius
            assert max(0, l - k) <= m <= k + l
        assert p.clique_hypothesis().startswith("automatic")

    def test_finite_group_preset_has_degree_zero(self):
        e = run_experiment(preset("clique"), trials=16, seed=0)
        assert e.fit.degree == 0
        assert e.growth.model == "finite"
        assert e.full == pytest.approx(3.0, abs=1e-9)

    def test_dinfty_preset(self):
        e = run_experiment(preset("dinfty"), trials=16, seed=0)
        assert e.fit.degree <= 2
        assert max(e.fit.observations) == 6

    def test_explicit_window_refused(self):
        p = preset("dinfty", radius=6)
        with pytest.raises(BudgetError):
            run_experiment(p, ks=[3], ls=[4])
        with pytest.raises(BudgetError):
            run_experiment(p, ks=[1], ls=[1], ms=[7])

    def test_csv_is_reproducible(self):
        p = preset("free", radius=6)
        a = run_experiment(p, trials=8, seed=11).to_csv()
        b = run_experiment(p, trials=8, seed=11).to_csv()
        assert a == b
        lines = a.split("\n")
        assert lines[0] == "quantity,compressed_convolution_norm"
        assert lines[1] == "preset,R,k,l,m,trials,seed,estimate,bound_chain,fit_degree,fit_constant"
        assert "\r" not in a
        assert run_experiment(p, trials=8, seed=12).to_csv() != a


def test_block_length_is_graph_length_of_nontriviality():
    g = pentagon()
    groups = {v: (Z2 if v % 2 else Z3) for v in g.vertices}
    data = {v: FusionData.group_dual(groups[v]) for v in g.vertices}
    # per vertex: bump the zero length to the indicator of nontriviality, then sum
    zero = {v: (lambda a: 0) for v in g.vertices}
    indicator = {}
    for v, fd in data.items():
        single = {v: fd}
        f = bump_length(graph_length(single, {v: zero[v]}))
        indicator[v] = {a: f(((v, a),) if a != fd.trivial else ()) for a in fd.labels}
    f = graph_length(data, indicator)
    b = build_ball(g, groups, 5)
    rng = random.Random(0)
    for i in rng.sample(range(len(b)), 100):
        x = b.elements[i]
        assert f(x.letters) == len(x) == b.length(i)
