import numpy as np
import pytest

import seriograph as sg
from seriograph.errors import NoTriplesError, ValidationError
from seriograph.graphon import SampledGraph
from seriograph.ordering import Ranking
from seriograph.robinson import (
    IntervalTriple,
    interval_triples,
    lambda_components,
    lambda_statistic,
    population_lambda,
)

from kernels import GAMMA, LOG_SCALE, M1, planted_bump_graphon


def identity_ranking(n):
    return Ranking(np.arange(n), np.arange(1, n + 1))


def graph_from_edges(n, edges):
    adj = np.zeros((n, n), dtype=bool)
    for a, b in edges:
        adj[a, b] = adj[b, a] = True
    return SampledGraph(n=n, adjacency=adj, seed=0)


class TestIntervalTriples:
    def test_three_vertices_single_triple(self):
        triples = list(interval_triples(range(3), identity_ranking(3), 1.0))
        assert triples == [IntervalTriple(A=(1, 1), B=(2, 1), C=(3, 1), s=1)]

    def test_six_vertices_count(self):
        triples = list(interval_triples(range(6), identity_ranking(6), 1 / 3))
        assert len(triples) == 21
        assert sum(1 for t in triples if t.s == 2) == 1

    def test_stride_output_is_subset(self):
        all_triples = set(map(repr, interval_triples(range(12), identity_ranking(12), 0.5)))
        strided = list(interval_triples(range(12), identity_ranking(12), 0.5, stride=2))
        assert strided
        assert set(map(repr, strided)) <= all_triples

    def test_no_triples_error(self):
        with pytest.raises(NoTriplesError):
            list(interval_triples(range(5), identity_ranking(5), 0.1))

    def test_invalid_triple_rejected(self):
        with pytest.raises(ValidationError):
            IntervalTriple(A=(1, 2), B=(2, 2), C=(5, 2), s=2)


class TestLambdaComponents:
    def test_empty_graph(self):
        g = graph_from_edges(3, [])
        t = IntervalTriple(A=(1, 1), B=(2, 1), C=(3, 1), s=1)
        assert lambda_components(g.adjacency, t, identity_ranking(3), 3) == (0.0, 0.0)

    def test_singleton_hand_count(self):
        g = graph_from_edges(3, [(0, 2)])
        t = IntervalTriple(A=(1, 1), B=(2, 1), C=(3, 1), s=1)
        l1, l2 = lambda_components(g.adjacency, t, identity_ranking(3), 3)
        assert l1 == pytest.approx(1 / 9)
        assert l2 == pytest.approx(1 / 9)

    def test_complete_graph_cancels(self):
        n = 9
        g = graph_from_edges(n, [(i, j) for i in range(n) for j in range(i + 1, n)])
        for t in interval_triples(range(n), identity_ranking(n), 1 / 3):
            assert lambda_components(g.adjacency, t, identity_ranking(n), n) == (0.0, 0.0)

    def test_matches_double_loop_oracle_all_triples(self):
        rng = np.random.default_rng(0)
        for n2 in (6, 11, 16, 20):
            adj = np.triu(rng.random((n2, n2)) < 0.35, 1)
            adj = adj | adj.T
            sigma = Ranking(np.arange(n2), rng.permutation(n2) + 1)
            order = sigma.order()
            for t in interval_triples(range(n2), sigma, 1 / 3):
                a = order[t.A[0] - 1 : t.A[0] - 1 + t.s]
                b = order[t.B[0] - 1 : t.B[0] - 1 + t.s]
                c = order[t.C[0] - 1 : t.C[0] - 1 + t.s]
                s_ac = sum(adj[x, y] for x in a for y in c)
                s_bc = sum(adj[x, y] for x in b for y in c)
                s_ab = sum(adj[x, y] for x in a for y in b)
                l1, l2 = lambda_components(adj, t, sigma, n2)
                assert l1 == pytest.approx((s_ac - s_bc) / n2**2)
                assert l2 == pytest.approx((s_ac - s_ab) / n2**2)

    def test_relabeling_invariance(self):
        rng = np.random.default_rng(5)
        n2 = 14
        adj = np.triu(rng.random((n2, n2)) < 0.4, 1)
        adj = adj | adj.T
        sigma = Ranking(np.arange(n2), rng.permutation(n2) + 1)
        perm = rng.permutation(n2)
        adj2 = adj[np.ix_(perm, perm)]
        inv = np.argsort(perm)
        sigma2 = Ranking(np.arange(n2), sigma.ranks[perm])
        _ = inv
        for t in interval_triples(range(n2), sigma, 0.25):
            assert lambda_components(adj, t, sigma, n2) == pytest.approx(
                lambda_components(adj2, t, sigma2, n2)
            )


class TestLambdaStatistic:
    def test_empty_graph_is_zero(self):
        g = graph_from_edges(24, [])
        rep = lambda_statistic(g, 0.3, 0.0, 0.05, GAMMA, stride=1, seed=0, m1=M1,
                               log_factor_scale=LOG_SCALE)
        assert rep.lambda_hat == 0.0

    def test_complete_graph_is_zero_for_all_settings(self):
        n = 24
        g = graph_from_edges(n, [(i, j) for i in range(n) for j in range(i + 1, n)])
        for mu in (0.2, 0.4):
            for stride in (1, 2):
                for seed in (0, 3):
                    rep = lambda_statistic(g, mu, 0.0, 0.05, GAMMA, stride=stride,
                                           seed=seed, m1=M1, log_factor_scale=LOG_SCALE)
                    assert rep.lambda_hat == 0.0

    def test_report_invariant_and_structure(self):
        w = sg.make_boundary_family(sg.BoundaryFamilyParams(p=0.8, alpha=0.5, r=0.3))
        g = sg.sample_graph(w, 200, seed=1)
        rep = lambda_statistic(g, 0.2, 0.5, 0.05, GAMMA, seed=1, m1=M1,
                               log_factor_scale=LOG_SCALE)
        assert rep.lambda_hat == pytest.approx((rep.lambda1_max + rep.lambda2_max) / 2)
        assert rep.n2 == 100
        assert rep.argmax1.s <= 0.2 * rep.n2

    def test_scan_agrees_with_triple_enumeration(self):
        from seriograph.robinson import _scan_triples, _sizes_and_starts

        rng = np.random.default_rng(7)
        for n2, mu, stride in [(15, 1 / 3, 1), (18, 0.3, 2), (20, 0.25, 1)]:
            adj = np.triu(rng.random((n2, n2)) < 0.4, 1)
            adj = adj | adj.T
            sigma = Ranking(np.arange(n2), rng.permutation(n2) + 1)
            order = sigma.order()
            sub = adj[np.ix_(order, order)].astype(np.int64)
            P = np.zeros((n2 + 1, n2 + 1), dtype=np.int64)
            P[1:, 1:] = sub.cumsum(axis=0).cumsum(axis=1)
            sizes, starts = _sizes_and_starts(n2, mu, stride)
            (m1v, t1), (m2v, t2) = _scan_triples(P, n2, sizes, starts, n2)
            vals1, vals2 = [], []
            for t in interval_triples(range(n2), sigma, mu, stride=stride):
                l1, l2 = lambda_components(adj, t, sigma, n2)
                vals1.append(l1)
                vals2.append(l2)
            assert m1v == pytest.approx(max(vals1))
            assert m2v == pytest.approx(max(vals2))
            for hit, found in ((t1, m1v), (t2, m2v)):
                l1, l2 = lambda_components(adj, hit, sigma, n2)
                assert found in (pytest.approx(l1), pytest.approx(l2))

    def test_deterministic(self):
        w = sg.make_boundary_family(sg.BoundaryFamilyParams(p=0.8, alpha=0.0, r=0.3))
        g = sg.sample_graph(w, 60, seed=2)
        rep = lambda_statistic(g, 0.3, 0.0, 0.05, GAMMA, stride=1, seed=2, m1=M1,
                               log_factor_scale=LOG_SCALE)
        rep2 = lambda_statistic(g, 0.3, 0.0, 0.05, GAMMA, stride=1, seed=2, m1=M1,
                                log_factor_scale=LOG_SCALE)
        assert rep2.lambda_hat == rep.lambda_hat

    def test_mu_too_small(self):
        g = graph_from_edges(20, [])
        with pytest.raises(NoTriplesError):
            lambda_statistic(g, 0.01, 0.0, 0.05, GAMMA, seed=0)


class TestPopulationLambda:
    def test_robinson_kernels_are_zero(self):
        for spec in (
            sg.make_boundary_family(sg.BoundaryFamilyParams(p=0.8, alpha=0.5, r=0.3)),
            sg.make_boundary_family(sg.BoundaryFamilyParams(p=1.0, alpha=0.0, r=0.3)),
        ):
            assert abs(population_lambda(spec, 40)) <= 1e-12

    def test_constant_kernel_exactly_zero(self):
        w = sg.graphon_from_config({"family": "constant", "value": 0.5})
        assert population_lambda(w, 40) == 0.0

    def test_planted_bump_positive_and_matches_brute_force(self):
        w = planted_bump_graphon()
        grid = 10
        val = population_lambda(w, grid)
        assert val > 0
        # brute force over the same discretized family with the same cell means
        sub = max(1, round(320 / grid))
        fine = grid * sub
        centers = (np.arange(fine) + 0.5) / fine
        K = np.asarray(w.kernel(centers[:, None], centers[None, :]))
        Kc = K.reshape(grid, sub, grid, sub).mean(axis=(1, 3))
        best1 = best2 = -np.inf
        for s in range(1, grid // 3 + 1):
            for a in range(grid - 3 * s + 1):
                for b in range(a + s, grid - 2 * s + 1):
                    for c in range(b + s, grid - s + 1):
                        m_ac = Kc[a : a + s, c : c + s].sum() / grid**2
                        m_bc = Kc[b : b + s, c : c + s].sum() / grid**2
                        m_ab = Kc[a : a + s, b : b + s].sum() / grid**2
                        best1 = max(best1, m_ac - m_bc)
                        best2 = max(best2, m_ac - m_ab)
        assert val == pytest.approx((best1 + best2) / 2, abs=1e-12)

    def test_monotone_under_grid_refinement(self):
        w = planted_bump_graphon(alpha=0.0)
        vals = [population_lambda(w, grid) for grid in (10, 20, 40, 80)]
        assert all(b >= a - 1e-9 for a, b in zip(vals, vals[1:]))

    def test_grid_validation(self):
        w = sg.graphon_from_config({"family": "constant", "value": 0.5})
        with pytest.raises(ValidationError):
            population_lambda(w, 2)
