"""Tests for spectral bases, contraction levels and multilevel coarsening."""

import numpy as np
import pytest

from src.coarsening.basis import spectral_basis
from src.coarsening.contraction import (
    ContractionLevel,
    contract,
    disconnected_sets,
    edge_local_variation_costs,
    edge_variation_costs,
    neighborhood_local_variation_costs,
    neighborhood_variation_costs,
    scaled_basis,
    set_local_variation,
)
from src.coarsening.multilevel import (
    coarse_spectrum,
    coarsen_to,
    identity_sequence,
    reduce_to_scale,
    reduce_to_scales,
    rss_measure,
    target_node_count,
)
from src.graph.core import Graph, is_connected, laplacian
from src.graph.generators import barabasi_albert, grid2d
from src.utils.errors import ContractError, ParameterError
from tests.graphs import cycle_graph, path_graph


class TestSpectralBasis:
    def test_path_eigenvalues(self):
        basis = spectral_basis(laplacian(path_graph(3)), 3)
        np.testing.assert_allclose(basis.values, [0.0, 1.0, 3.0], atol=1e-12)

    def test_vectors_are_orthonormal_and_signed(self):
        basis = spectral_basis(laplacian(grid2d(4, 5)), 6)
        np.testing.assert_allclose(basis.vectors.T @ basis.vectors, np.eye(6), atol=1e-10)
        for m in range(6):
            x = basis.vectors[:, m]
            assert x[np.argmax(np.abs(x))] > 0

    @pytest.mark.parametrize("k", [0, 4])
    def test_rejects_bad_dimension(self, k):
        with pytest.raises(ParameterError):
            spectral_basis(laplacian(path_graph(3)), k)

    def test_truncate(self):
        basis = spectral_basis(laplacian(cycle_graph(6)), 4).truncate(2)
        assert basis.k == 2
        assert basis.vectors.shape == (6, 2)


class TestContractionLevel:
    def test_from_sets_fills_singletons_in_order(self):
        level = ContractionLevel.from_sets(5, [(3, 4), (1, 0)])
        assert level.membership == (0, 0, 1, 2, 2)
        assert level.n_coarse == 3
        assert level.reduction_ratio == pytest.approx(0.4)

    def test_overlapping_sets_are_rejected(self):
        with pytest.raises(ContractError):
            ContractionLevel.from_sets(4, [(0, 1), (1, 2)])

    def test_compose(self):
        first = ContractionLevel.from_sets(4, [(0, 1)])
        second = ContractionLevel.from_sets(3, [(1, 2)])
        assert first.compose(second).membership == (0, 0, 1, 1)
        with pytest.raises(ContractError):
            second.compose(first)

    def test_projection_averages_sets(self):
        level = ContractionLevel.from_sets(4, [(0, 1)])
        np.testing.assert_allclose(level.project(np.array([1.0, 3.0, 5.0, 7.0])), [2.0, 2.0, 5.0, 7.0])


class TestContract:
    def test_path_collapse_sums_nothing_internal(self):
        g = contract(path_graph(4), ContractionLevel.from_sets(4, [(1, 2)]))
        assert g.n == 3
        assert g.edges == ((0, 1, 1.0), (1, 2, 1.0))

    def test_parallel_crossings_sum(self):
        g = contract(cycle_graph(4), ContractionLevel.from_sets(4, [(0, 1), (2, 3)]))
        assert g.edges == ((0, 1, 2.0),)

    def test_disconnected_set_is_rejected(self):
        with pytest.raises(ContractError):
            contract(path_graph(4), ContractionLevel.from_sets(4, [(0, 3)]))

    def test_disconnected_sets_are_named(self):
        g = path_graph(5)
        assert disconnected_sets(g, ContractionLevel.from_sets(5, [(0, 1), (2, 4)])) == [1]
        assert disconnected_sets(g, ContractionLevel.from_sets(5, [(0, 1), (2, 3, 4)])) == []
        assert disconnected_sets(g, ContractionLevel.identity(5)) == []

    def test_lifted_signals_keep_their_energy_on_the_grid(self):
        g = grid2d(20, 20)
        seq = coarsen_to(g, 0.5, k=10)
        level = seq.composed()
        lift = level.lifting_matrix()
        fine = laplacian(g).entries
        coarse = laplacian(seq.final).entries
        signals = np.random.default_rng(1).normal(size=(level.n_coarse, 100))
        lifted = lift @ signals
        fine_energy = np.einsum("ij,ij->j", lifted, fine @ lifted)
        coarse_energy = np.einsum("ij,ij->j", signals, coarse @ signals)
        np.testing.assert_allclose(coarse_energy, fine_energy, rtol=1e-10, atol=1e-8)

    def test_size_mismatch_is_rejected(self):
        with pytest.raises(ContractError):
            contract(path_graph(4), ContractionLevel.identity(3))

    def test_coarse_energy_matches_lifted_energy(self):
        g = barabasi_albert(40, 2, seed=4)
        seq = coarsen_to(g, 0.5)
        level = seq.composed()
        coarse = laplacian(seq.final)
        rng = np.random.default_rng(0)
        for _ in range(5):
            xc = rng.normal(size=level.n_coarse)
            lifted = level.lifting_matrix() @ xc
            assert coarse.quadratic_form(xc) == pytest.approx(laplacian(g).quadratic_form(lifted))

    def test_edge_costs_are_non_negative(self):
        g = grid2d(5, 5)
        costs = edge_variation_costs(g, spectral_basis(laplacian(g), 5))
        assert costs.shape == (g.num_edges,)
        assert np.all(costs >= -1e-12)

    def test_path_center_costs_the_mean_of_its_edges(self):
        g = path_graph(3)
        basis = spectral_basis(laplacian(g), 3)
        edges = edge_variation_costs(g, basis)
        assert neighborhood_variation_costs(g, basis)[1] == pytest.approx(edges.mean())


class TestLocalVariation:
    def test_null_space_is_dropped(self):
        basis = spectral_basis(laplacian(cycle_graph(8)), 3)
        B = scaled_basis(basis)
        np.testing.assert_allclose(B[:, 0], 0.0)
        np.testing.assert_allclose(B[:, 1:], basis.vectors[:, 1:] / np.sqrt(basis.values[1:]))

    def test_edge_costs_match_the_two_node_set_cost(self):
        g = barabasi_albert(30, 2, seed=2)
        basis = spectral_basis(laplacian(g), 6)
        B = scaled_basis(basis)
        costs = edge_local_variation_costs(g, basis)
        expected = [set_local_variation(g, B, (u, v)) for u, v, _ in g.edges]
        np.testing.assert_allclose(costs, expected, rtol=1e-9, atol=1e-12)

    def test_uniform_weight_scaling_leaves_costs_unchanged(self):
        g = barabasi_albert(30, 2, seed=2)
        heavy = Graph(g.n, [(u, v, 3.0 * w) for u, v, w in g.edges])
        costs = edge_local_variation_costs(g, spectral_basis(laplacian(g), 6))
        scaled = edge_local_variation_costs(heavy, spectral_basis(laplacian(heavy), 6))
        np.testing.assert_allclose(scaled, costs, rtol=1e-6, atol=1e-12)

    def test_neighborhood_costs(self):
        g = Graph(6, [(0, 1), (1, 2), (2, 3), (3, 4)])
        costs = neighborhood_local_variation_costs(g, spectral_basis(laplacian(g), 3))
        assert np.isinf(costs[5])
        assert np.all(np.isfinite(costs[:5]))
        assert np.all(costs[:5] >= 0)

    def test_single_node_set_is_rejected(self):
        g = path_graph(3)
        with pytest.raises(ContractError):
            set_local_variation(g, scaled_basis(spectral_basis(laplacian(g), 2)), (1,))

    def test_hub_survives_the_first_level(self):
        g = barabasi_albert(200, 2, seed=7)
        level = coarsen_to(g, 0.8).levels[0]
        hub = int(np.argmax(g.degrees))
        assert len(level.sets[level.membership[hub]]) == 1


class TestCoarsenTo:
    def test_grid_halves_with_valid_laplacians(self):
        g = grid2d(20, 20)
        seq = coarsen_to(g, 0.5, k=10)
        assert seq.final.n == 200
        assert not seq.partial
        assert all(laplacian(h).validate() == [] for h in seq.graphs)
        assert is_connected(seq.final)
        assert seq.overall_ratio == pytest.approx(0.5)

    def test_grid_spectrum_is_preserved(self):
        g = grid2d(20, 20)
        seq = coarsen_to(g, 0.5, k=10)
        assert all(laplacian(h).is_valid() for h in seq.graphs)
        fine = spectral_basis(laplacian(g), 11).values[1:]
        coarse = coarse_spectrum(seq, 11)[1:]
        assert np.all(coarse >= fine - 1e-9)
        assert np.max((coarse - fine) / fine) <= 0.5

    def test_uncoarsened_spectrum_is_the_original(self):
        g = grid2d(6, 7)
        np.testing.assert_allclose(
            coarse_spectrum(identity_sequence(g), 5), spectral_basis(laplacian(g), 5).values, atol=1e-10
        )

    def test_energy_cost_is_available(self):
        g = grid2d(10, 10)
        seq = coarsen_to(g, 0.5, cost="energy")
        assert seq.final.n == 50
        assert seq.meta["cost"] == "energy"
        assert coarsen_to(g, 0.5).meta["cost"] == "local_variation"

    def test_rejects_unknown_cost(self):
        with pytest.raises(ParameterError):
            coarsen_to(path_graph(5), 0.5, cost="heavy-edge")

    def test_ring_to_two_nodes(self):
        seq = coarsen_to(cycle_graph(10), 0.2)
        assert seq.final.n == 2
        assert seq.final.num_edges == 1
        # Both crossing cycle edges land on the single superedge
        assert seq.final.edges[0][2] == pytest.approx(2.0)

    def test_neighborhood_family(self):
        seq = coarsen_to(barabasi_albert(60, 2, seed=1), 0.5, family="neighborhood")
        assert seq.final.n <= 30
        assert all(laplacian(h).is_valid() for h in seq.graphs)

    def test_components_are_coarsened_separately(self):
        g = Graph(20, [(i, (i + 1) % 10) for i in range(10)] + [(10 + i, 10 + (i + 1) % 10) for i in range(10)])
        seq = coarsen_to(g, 0.5)
        assert seq.final.n == 10
        assert seq.meta["components"] == 2
        membership = seq.composed().membership
        assert set(membership[:10]).isdisjoint(membership[10:])

    def test_level_budget_marks_partial(self):
        seq = coarsen_to(grid2d(10, 10), 0.1, max_levels=1)
        assert seq.partial
        assert seq.stop_reason == "max_levels"
        assert seq.final.n > 10

    @pytest.mark.parametrize("fraction", [0.0, 1.0, 1.5])
    def test_rejects_bad_fraction(self, fraction):
        with pytest.raises(ParameterError):
            coarsen_to(path_graph(5), fraction)

    def test_rejects_unknown_family(self):
        with pytest.raises(ParameterError):
            coarsen_to(path_graph(5), 0.5, family="triangle")

    def test_deterministic(self):
        g = barabasi_albert(80, 2, seed=3)
        assert coarsen_to(g, 0.4).final == coarsen_to(g, 0.4).final


def test_target_node_count_rounds_up():
    assert target_node_count(2500, 0.8) == 2000
    assert target_node_count(10, 0.25) == 3
    assert target_node_count(3, 0.01) == 1


def test_scale_one_is_identity():
    g = path_graph(6)
    seq = reduce_to_scale(g, 1.0)
    assert seq.levels == []
    assert seq.final == g


def test_chained_reductions_extend_the_larger_scale():
    g = grid2d(12, 12)
    results = reduce_to_scales(g, [0.5, 0.8], chained=True)
    big, small = results[0.8], results[0.5]
    assert small.graphs[0] == g
    assert small.final.n == 72
    assert small.levels[: len(big.levels)] == big.levels
    assert small.target_fraction == 0.5


def test_independent_reductions_start_from_the_original():
    g = grid2d(12, 12)
    results = reduce_to_scales(g, [1.0, 0.8, 0.5])
    assert list(results) == [1.0, 0.8, 0.5]
    assert results[0.5].final.n == 72
    assert results[0.5].summary()["n_fine"] == 144


def test_rss_measure():
    g = grid2d(10, 10)
    basis = spectral_basis(laplacian(g), 8)
    assert rss_measure(g, identity_sequence(g), basis) == 0.0
    eps = rss_measure(g, coarsen_to(g, 0.5, k=8), basis)
    assert eps > 0.0
    assert np.isfinite(eps)
