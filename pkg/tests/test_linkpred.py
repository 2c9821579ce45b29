"""Tests for leave-one-out ranking and link-prediction entropy."""

import math
import time

import pytest

from src.entropy.linkpred import (
    RankRecord,
    link_prediction_entropy,
    loo_ranks,
    loo_ranks_bruteforce,
    rank_entropy,
)
from src.graph.core import Graph
from src.graph.generators import barabasi_albert, erdos_renyi_gnm, grid2d
from src.scoring.similarity import jaccard
from src.utils.errors import BudgetExceededError, EntropyUndefinedError, UsageError
from tests.graphs import complete_graph, star_graph


def _records(ranks):
    return [RankRecord(edge=(0, i + 1), rank=r, candidates=100) for i, r in enumerate(ranks)]


class TestLooRanks:
    @pytest.mark.parametrize("scorer", ["jaccard", "adamic-adar"])
    def test_complete_graph_ranks_are_all_one(self, k4, scorer):
        records = loo_ranks(k4, scorer)
        assert [r.rank for r in records] == [1] * 6
        assert all(r.candidates == 1 for r in records)

    def test_four_cycle_jaccard(self, c4):
        assert jaccard(c4, 0, 1) == 0.0
        records = loo_ranks(c4, "jaccard")
        assert [r.rank for r in records] == [3, 3, 3, 3]
        assert all(r.candidates == 3 for r in records)

    def test_star_jaccard(self):
        records = loo_ranks(star_graph(3), "jaccard")
        assert [r.rank for r in records] == [2, 2, 2]
        assert all(r.candidates == 4 for r in records)

    def test_mean_tie_mode_splits_ties(self):
        records = loo_ranks(star_graph(3), "jaccard", tie_mode="mean")
        assert [r.rank for r in records] == [3.0, 3.0, 3.0]

    def test_records_follow_edge_order(self):
        g = barabasi_albert(20, 2, seed=1)
        assert [r.edge for r in loo_ranks(g, "jaccard")] == [(u, v) for u, v, _ in g.edges]

    def test_ranks_lie_within_candidates(self):
        g = barabasi_albert(40, 2, seed=7)
        for record in loo_ranks(g):
            assert 1 <= record.rank <= record.candidates

    @pytest.mark.parametrize("scorer", ["jaccard", "adamic-adar"])
    @pytest.mark.parametrize("tie_mode", ["optimistic", "mean"])
    def test_incremental_matches_full_rescoring(self, scorer, tie_mode):
        for n in range(4, 8):
            for m_edges in range(1, n * (n - 1) // 2 + 1, 2):
                for seed in range(3):
                    g = erdos_renyi_gnm(n, m_edges, seed)
                    assert loo_ranks(g, scorer, tie_mode) == loo_ranks_bruteforce(g, scorer, tie_mode)

    @pytest.mark.parametrize("scorer", ["jaccard", "adamic-adar"])
    def test_incremental_matches_full_rescoring_on_larger_graphs(self, scorer):
        for g in (barabasi_albert(30, 2, seed=3), grid2d(5, 6), erdos_renyi_gnm(25, 50, seed=8)):
            assert loo_ranks(g, scorer) == loo_ranks_bruteforce(g, scorer)

    def test_unknown_tie_mode(self, k4):
        with pytest.raises(UsageError):
            loo_ranks(k4, tie_mode="pessimistic")

    def test_expired_deadline(self):
        with pytest.raises(BudgetExceededError):
            loo_ranks(grid2d(4, 4), deadline=time.monotonic() - 1.0)


class TestRankEntropy:
    def test_single_bin_has_zero_entropy(self):
        result = rank_entropy(_records([1, 2, 3]), n=8, avg_degree=0.0)
        assert result.h == 0.0
        assert result.bins == 4
        assert sum(result.bin_probs) == pytest.approx(1.0)

    def test_uniform_spread_is_maximal(self):
        # R_max = 28 + 1 with no edges counted; bin width 29 / 4
        result = rank_entropy(_records([1, 9, 16, 23]), n=8, avg_degree=0.0)
        assert result.r_max == 29.0
        assert result.h == pytest.approx(math.log(4))

    def test_complete_graph(self, k4):
        result = link_prediction_entropy(k4)
        assert result.r_max == 1.0
        assert result.bins == 2
        assert result.h == 0.0
        assert result.clamped == 0

    def test_ranks_past_the_range_are_clamped(self):
        result = rank_entropy(_records([1, 40]), n=8, avg_degree=0.0)
        assert result.clamped == 1
        assert result.bin_probs[-1] == 0.5

    def test_entropy_is_bounded_by_log_bins(self):
        g = barabasi_albert(60, 2, seed=2)
        result = link_prediction_entropy(g, "jaccard")
        assert 0.0 <= result.h <= math.log(result.bins) + 1e-12

    def test_merging_bins_does_not_raise_entropy(self):
        spread = rank_entropy(_records([1, 9, 16, 23]), n=8, avg_degree=0.0)
        merged = rank_entropy(_records([1, 2, 16, 17]), n=8, avg_degree=0.0)
        assert merged.h <= spread.h

    def test_summary_keys(self, k4):
        assert set(link_prediction_entropy(k4).summary()) == {"E", "B", "R_max", "clamped", "H"}

    def test_no_edges_is_undefined(self):
        with pytest.raises(EntropyUndefinedError):
            rank_entropy([], n=10, avg_degree=0.0)
        with pytest.raises(EntropyUndefinedError):
            link_prediction_entropy(Graph(10))

    def test_too_few_nodes_is_undefined(self, p3):
        with pytest.raises(EntropyUndefinedError):
            link_prediction_entropy(p3)


def test_weights_are_ignored():
    g = erdos_renyi_gnm(20, 40, seed=5)
    weighted = Graph(g.n, [(u, v, 1.0 + (u + v) % 3) for u, v, _ in g.edges])
    assert link_prediction_entropy(weighted).h == link_prediction_entropy(g).h


def test_complete_graph_is_fully_predictable():
    assert link_prediction_entropy(complete_graph(9), "jaccard").h == 0.0
