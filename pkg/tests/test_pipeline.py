"""Tests for the multiscale runner, trajectory CSVs and run manifests."""

import json
import math
from dataclasses import replace

import pytest

from src.entropy.linkpred import link_prediction_entropy
from src.entropy.normalize import build_ensemble, normalized_compression, normalized_lp_entropy
from src.entropy.szip import compression_entropy
from src.graph.core import write_edge_list
from src.graph.generators import barabasi_albert, grid2d, random_ring
from src.pipeline import runner
from src.pipeline.runner import (
    SCHEMA_LINE,
    TRAJECTORY_COLUMNS,
    format_trajectories_csv,
    run_corpus,
    run_graph,
)
from src.utils.config import stable_key
from src.utils.errors import ContractError, ParameterError
from src.utils.input_handler import CorpusEntry
from tests.graphs import cycle_graph


def _corpus(tmp_path, graphs):
    entries = []
    for graph_id, family, g in graphs:
        path = tmp_path / "graphs" / f"{graph_id}.edges"
        path.parent.mkdir(exist_ok=True)
        path.write_bytes(write_edge_list(g))
        entries.append(CorpusEntry(path, graph_id, family))
    return entries


def _three_graphs(tmp_path):
    return _corpus(
        tmp_path,
        [
            ("ba-000", "ba", barabasi_albert(30, 2, seed=1)),
            ("grid-000", "grid", grid2d(5, 6)),
            ("ring-000", "ring", random_ring(30, 4, 0.1, seed=2)),
        ],
    )


class TestRunGraph:
    def test_one_record_per_scale(self, small_config):
        g = barabasi_albert(40, 2, seed=3)
        trajectory = run_graph(g, small_config, graph_id="ba")
        assert trajectory.scales == (1.0, 0.8, 0.6, 0.4, 0.2)
        sizes = [r.n_r for r in trajectory.records]
        assert sizes[0] == 40
        assert sizes == sorted(sizes, reverse=True)
        assert sizes[-1] <= 12
        assert trajectory.complete
        assert all(r.l_norm > 0 for r in trajectory.records)
        assert trajectory.record(1.0).eps == 0.0
        assert all(r.eps is not None and r.eps >= 0 for r in trajectory.records)

    def test_full_scale_matches_direct_computation(self, small_config):
        g = barabasi_albert(40, 2, seed=3)
        trajectory = run_graph(g, small_config, graph_id="ba")
        assert trajectory.scorer == small_config.scorer
        record = trajectory.record(1.0)
        ens = build_ensemble(
            g.n,
            g.num_edges,
            count=small_config.replicas,
            seed=small_config.seed,
            scorer=small_config.scorer,
            keys=(stable_key("ba"), 0),
        )
        assert record.l_raw == compression_entropy(g)
        assert record.h_raw == link_prediction_entropy(g).h
        assert record.l_norm == normalized_compression(g, ens)
        assert record.h_norm == normalized_lp_entropy(g, ens)
        assert record.m_r == g.num_edges

    def test_deterministic(self, small_config):
        g = grid2d(6, 6)
        a = run_graph(g, small_config, graph_id="grid")
        b = run_graph(g, small_config, graph_id="grid")
        assert a.records == b.records
        assert a.seed == b.seed

    def test_graph_id_changes_baselines(self, small_config):
        g = grid2d(6, 6)
        a = run_graph(g, small_config, graph_id="one").record(1.0)
        b = run_graph(g, small_config, graph_id="two").record(1.0)
        assert a.l_raw == b.l_raw
        assert a.l_norm != b.l_norm

    def test_small_graphs_are_rejected(self, small_config):
        with pytest.raises(ParameterError):
            run_graph(cycle_graph(9), small_config)

    def test_seed_is_required(self, small_config):
        with pytest.raises(ParameterError):
            run_graph(cycle_graph(12), replace(small_config, seed=None))

    def test_tiny_scale_leaves_h_undefined(self, small_config):
        config = small_config.with_overrides(scales=(1.0, 0.2))
        trajectory = run_graph(cycle_graph(10), config)
        tiny = trajectory.record(0.2)
        assert tiny.n_r == 2
        assert tiny.status == "lp_undefined"
        assert tiny.h_norm is None
        assert tiny.l_norm is not None
        assert trajectory.complete

    def test_exhausted_budget_skips_link_prediction(self, small_config):
        config = small_config.with_overrides(budget=1e-9)
        trajectory = run_graph(grid2d(5, 5), config)
        for record in trajectory.records:
            assert record.status == "lp_skipped"
            assert record.h_norm is None
            assert record.l_norm is not None

    def test_link_prediction_can_be_disabled(self, small_config):
        config = small_config.with_overrides(link_prediction=False)
        record = run_graph(grid2d(5, 5), config).record(0.6)
        assert record.status == "ok"
        assert record.h_raw is None

    def test_failed_scale_does_not_stop_the_others(self, small_config, monkeypatch):
        original = runner.reduce_to_scale

        def flaky(g, scale, **kwargs):
            if scale == 0.4:
                raise ContractError("contraction set 0 is not connected")
            return original(g, scale, **kwargs)

        monkeypatch.setattr(runner, "reduce_to_scale", flaky)
        trajectory = run_graph(grid2d(5, 5), small_config)
        assert trajectory.record(0.4).status == "failed:ContractError"
        assert trajectory.record(0.2).status == "ok"
        assert not trajectory.complete

    def test_chained_reduction(self, small_config):
        config = small_config.with_overrides(chained=True, link_prediction=False)
        trajectory = run_graph(grid2d(6, 6), config)
        assert [r.n_r for r in trajectory.records] == [36, 29, 22, 15, 8]


class TestCsv:
    def test_empty_run_has_header_only(self):
        text = format_trajectories_csv([])
        assert text == SCHEMA_LINE + "\n" + ",".join(TRAJECTORY_COLUMNS) + "\n"

    def test_missing_values_are_empty_cells(self, small_config):
        config = small_config.with_overrides(scales=(1.0,), link_prediction=False)
        trajectory = run_graph(grid2d(4, 4), config, graph_id="g", family="grid")
        row = format_trajectories_csv([trajectory]).splitlines()[2].split(",")
        values = dict(zip(TRAJECTORY_COLUMNS, row))
        assert values["graph_id"] == "g"
        assert values["scale"] == "1"
        assert values["n_r"] == "16"
        assert values["H_raw"] == ""
        assert values["H_norm"] == ""
        assert values["scorer"] == ""
        assert values["status"] == "ok"
        assert math.isfinite(float(values["L_norm"]))


class TestRunCorpus:
    def test_empty_corpus(self, small_config):
        assert run_corpus([], small_config) == []
        out = small_config.out
        assert (out / "trajectories.csv").read_text().splitlines() == [SCHEMA_LINE, ",".join(TRAJECTORY_COLUMNS)]
        manifest = json.loads((out / "manifest.json").read_text())
        assert manifest["graphs"] == []
        assert manifest["schema"] == "msent-trajectories/2"

    def test_rows_per_graph_and_scale(self, tmp_path, small_config):
        trajectories = run_corpus(_three_graphs(tmp_path), small_config)
        assert [t.graph_id for t in trajectories] == ["ba-000", "grid-000", "ring-000"]
        lines = (small_config.out / "trajectories.csv").read_text().splitlines()
        assert len(lines) == 2 + 15
        manifest = json.loads((small_config.out / "manifest.json").read_text())
        assert [g["id"] for g in manifest["graphs"]] == ["ba-000", "grid-000", "ring-000"]
        assert manifest["config"]["seed"] == 7
        assert all(g["failed_scales"] == [] for g in manifest["graphs"])

    def test_bad_inputs_are_skipped(self, tmp_path, small_config):
        entries = _three_graphs(tmp_path)[:1]
        tiny = tmp_path / "graphs" / "tiny.edges"
        tiny.write_text("0 1\n1 2\n")
        entries.append(CorpusEntry(tiny, "tiny", "ba"))
        entries.append(CorpusEntry(tmp_path / "graphs" / "gone.edges", "gone", None))
        trajectories = run_corpus(entries, small_config)
        assert [t.graph_id for t in trajectories] == ["ba-000"]
        manifest = json.loads((small_config.out / "manifest.json").read_text())
        assert [s["id"] for s in manifest["skipped"]] == ["tiny", "gone"]
        assert "gone.edges" in manifest["skipped"][1]["reason"]

    @pytest.mark.slow
    def test_worker_count_does_not_change_results(self, tmp_path, small_config):
        entries = _three_graphs(tmp_path)
        serial = small_config.with_overrides(out=tmp_path / "serial")
        parallel = small_config.with_overrides(out=tmp_path / "parallel", workers=3)
        run_corpus(entries, serial)
        run_corpus(entries, parallel)
        assert (tmp_path / "serial" / "trajectories.csv").read_text() == (
            tmp_path / "parallel" / "trajectories.csv"
        ).read_text()
