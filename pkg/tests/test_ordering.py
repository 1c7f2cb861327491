import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from seriograph.errors import DomainMismatchError, ValidationError
from seriograph.ordering import (
    ComparisonTable,
    Ranking,
    agrees_at_precision,
    extreme_sets,
    ordering_error,
    rank_from_comparisons,
    rank_from_embedding,
    restrict_rank,
    table_from_ranking,
)


def ranking(ids, ranks):
    return Ranking(np.asarray(ids), np.asarray(ranks))


class TestRankFromEmbedding:
    def test_sort_order(self):
        sigma = rank_from_embedding({1: 0.9, 2: 0.1, 3: 0.5})
        assert sigma.rank_map() == {1: 3, 2: 1, 3: 2}

    def test_tie_broken_by_index(self):
        sigma = rank_from_embedding({1: 0.5, 2: 0.5})
        assert sigma.rank_map() == {1: 1, 2: 2}

    def test_constant_gives_identity(self):
        sigma = rank_from_embedding({i: 7.0 for i in range(5)})
        assert sigma.rank_map() == {i: i + 1 for i in range(5)}

    def test_rejects_nan(self):
        with pytest.raises(ValidationError):
            rank_from_embedding({0: float("nan"), 1: 0.0})


def brute_force_error(sigma_ranks, true_ranks):
    """Direct evaluation of the displacement definition, both orientations."""
    n = len(true_ranks)
    fwd = max(abs(s - t) for s, t in zip(sigma_ranks, true_ranks))
    rev = max(abs(s - (n + 1 - t)) for s, t in zip(sigma_ranks, true_ranks))
    return min(fwd, rev)


class TestOrderingError:
    def test_equal_is_zero(self):
        s = ranking([0, 1, 2], [2, 1, 3])
        assert ordering_error(s, s) == 0

    def test_full_reversal_is_zero(self):
        for n in (2, 5, 9):
            s = ranking(range(n), range(1, n + 1))
            rev = ranking(range(n), range(n, 0, -1))
            assert ordering_error(rev, s) == 0

    def test_small_example(self):
        sigma = ranking([1, 2, 3], [2, 1, 3])
        truth = ranking([1, 2, 3], [1, 2, 3])
        assert ordering_error(sigma, truth) == 1

    def test_matches_exhaustive_evaluation_up_to_n6(self):
        for n in range(2, 7):
            ids = list(range(n))
            truth = ranking(ids, range(1, n + 1))
            for perm in itertools.permutations(range(1, n + 1)):
                sigma = ranking(ids, perm)
                assert ordering_error(sigma, truth) == brute_force_error(
                    perm, list(range(1, n + 1))
                )

    def test_reversal_invariance(self):
        rng = np.random.default_rng(0)
        for _ in range(20):
            n = int(rng.integers(2, 12))
            truth = ranking(range(n), rng.permutation(n) + 1)
            sigma = ranking(range(n), rng.permutation(n) + 1)
            assert ordering_error(sigma, truth) == ordering_error(sigma.reversed(), truth)

    def test_domain_mismatch(self):
        with pytest.raises(DomainMismatchError):
            ordering_error(ranking([0, 1], [1, 2]), ranking([0, 2], [1, 2]))


class TestAgreesAtPrecision:
    U = {1: 0.1, 2: 0.5, 3: 0.9}

    def test_everything_agrees_at_d_one(self):
        sigma = ranking([1, 2, 3], [3, 1, 2])
        tau = ranking([1, 2, 3], [1, 2, 3])
        assert agrees_at_precision(sigma, tau, self.U, 1.0)

    def test_near_pair_exempt(self):
        sigma = ranking([1, 2, 3], [2, 1, 3])  # swap the pair at distance 0.4
        tau = ranking([1, 2, 3], [1, 2, 3])
        assert agrees_at_precision(sigma, tau, self.U, 0.5)

    def test_far_pair_checked(self):
        sigma = ranking([1, 2, 3], [2, 1, 3])
        tau = ranking([1, 2, 3], [1, 2, 3])
        assert not agrees_at_precision(sigma, tau, self.U, 0.3)

    def test_monotone_in_d(self):
        rng = np.random.default_rng(3)
        for _ in range(20):
            n = 8
            u = rng.random(n)
            tau = rank_from_embedding((np.arange(n), u))
            sigma = ranking(range(n), rng.permutation(n) + 1)
            results = [
                agrees_at_precision(sigma, tau, u, d) for d in np.linspace(0, 1, 11)
            ]
            assert all(b or not a for a, b in zip(results, results[1:]))


class TestExtremeSets:
    def test_definition_unrolled(self):
        sigma = ranking([10, 11, 12, 13, 14], [1, 2, 3, 4, 5])
        high, low = extreme_sets([10, 11, 12, 13, 14], sigma, 2)
        assert high == {13, 14} and low == {10, 11}

    def test_c_zero(self):
        sigma = ranking([0, 1], [1, 2])
        assert extreme_sets([0, 1], sigma, 0) == (set(), set())

    def test_c_exceeds_size(self):
        sigma = ranking([0, 1, 2], [2, 3, 1])
        high, low = extreme_sets([0, 1, 2], sigma, 7)
        assert high == {0, 1, 2} and low == {0, 1, 2}


class TestRankFromComparisons:
    def test_round_trip_through_induced_table(self):
        rng = np.random.default_rng(1)
        for _ in range(10):
            ids = np.sort(rng.choice(100, size=6, replace=False))
            sigma = Ranking(ids, rng.permutation(6) + 1)
            assert (rank_from_comparisons(table_from_ranking(sigma)).ranks == sigma.ranks).all()

    def test_all_ties_fall_back_to_id_order(self):
        table = ComparisonTable(np.array([1, 2, 3]), np.zeros((3, 3), dtype=np.int8))
        assert rank_from_comparisons(table).rank_map() == {1: 1, 2: 2, 3: 3}

    def test_single_vote_orders_the_pair(self):
        # one vote that vertex 1 precedes vertex 3; vertex 2 sits between by tie-break
        vals = np.zeros((3, 3), dtype=np.int8)
        vals[0, 2], vals[2, 0] = 1, -1
        table = ComparisonTable(np.array([1, 2, 3]), vals)
        assert rank_from_comparisons(table).rank_map() == {1: 1, 2: 2, 3: 3}

    def test_antisymmetry_enforced(self):
        vals = np.zeros((2, 2), dtype=np.int8)
        vals[0, 1] = 1
        with pytest.raises(ValidationError):
            ComparisonTable(np.array([0, 1]), vals)

    @settings(max_examples=60, deadline=None)
    @given(st.integers(2, 8), st.integers(0, 2**32 - 1))
    def test_always_a_bijection(self, n, seed):
        rng = np.random.default_rng(seed)
        raw = rng.integers(-1, 2, size=(n, n)).astype(np.int8)
        vals = np.triu(raw, 1)
        vals = vals - vals.T
        table = ComparisonTable(np.arange(n), vals)
        out = rank_from_comparisons(table)
        assert sorted(out.ranks.tolist()) == list(range(1, n + 1))


class TestRestrictRank:
    def test_full_domain_unchanged(self):
        sigma = ranking([0, 1, 2], [3, 1, 2])
        out = restrict_rank(sigma, [0, 1, 2])
        assert out.rank_map() == sigma.rank_map()

    def test_identity_subset(self):
        sigma = ranking([1, 2, 3, 4, 5], [1, 2, 3, 4, 5])
        assert restrict_rank(sigma, [2, 4, 5]).rank_map() == {2: 1, 4: 2, 5: 3}

    def test_hand_example(self):
        sigma = ranking([1, 2, 3, 4], [3, 1, 4, 2])
        out = restrict_rank(sigma, [1, 4])
        assert out.rank_map() == {1: 2, 4: 1}

    def test_not_subset(self):
        sigma = ranking([1, 2], [1, 2])
        with pytest.raises(DomainMismatchError):
            restrict_rank(sigma, [1, 7])

    def test_preserves_relative_order(self):
        rng = np.random.default_rng(5)
        for _ in range(20):
            n = int(rng.integers(3, 15))
            sigma = ranking(range(n), rng.permutation(n) + 1)
            S = rng.choice(n, size=rng.integers(1, n + 1), replace=False)
            out = restrict_rank(sigma, S)
            s_sorted = sorted(S, key=sigma.rank_of)
            assert [out.rank_of(v) for v in s_sorted] == list(range(1, len(S) + 1))


class TestRankingValidation:
    def test_rank_must_be_bijection(self):
        with pytest.raises(ValidationError):
            ranking([0, 1, 2], [1, 1, 2])

    def test_file_round_trip(self, tmp_path):
        from seriograph.ordering import read_ranking, write_ranking

        sigma = ranking([3, 7, 9], [2, 3, 1])
        path = tmp_path / "ranking.txt"
        write_ranking(sigma, path)
        back = read_ranking(path)
        assert back.rank_map() == sigma.rank_map()
