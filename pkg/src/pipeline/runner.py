"""Multiscale entropy runner.

Each graph is reduced to every configured scale, and the reduced graph's
compression entropy L and link-prediction entropy H are normalized against
Erdős–Rényi baselines matched to that scale. Results are written as one CSV
row per (graph, scale) plus a JSON manifest.
"""

import csv
import io
import json
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple

from loguru import logger

from .. import CSV_SCHEMA_VERSION, __version__
from ..coarsening.basis import SpectralBasis, spectral_basis
from ..coarsening.multilevel import (
    CoarseSequence,
    default_subspace_dim,
    reduce_to_scale,
    rss_measure,
)
from ..entropy.linkpred import RankEntropy, link_prediction_entropy
from ..entropy.normalize import build_ensemble, normalized_compression, normalized_lp_entropy
from ..entropy.szip import compression_entropy
from ..graph.core import Graph, laplacian
from ..utils.config import RunConfig, derive_seed, stable_key
from ..utils.errors import (
    BudgetExceededError,
    EntropyUndefinedError,
    MsentError,
    NormalizationError,
    ParameterError,
)
from ..utils.input_handler import CorpusEntry, read_graph

MIN_NODES = 10

TRAJECTORY_COLUMNS = (
    "graph_id",
    "family",
    "scale",
    "n_r",
    "m_r",
    "L_raw",
    "L_norm",
    "H_raw",
    "H_norm",
    "scorer",
    "eps",
    "clamped",
    "status",
)
SCHEMA_NAME = f"msent-trajectories/{CSV_SCHEMA_VERSION}"
SCHEMA_LINE = f"# schema: {SCHEMA_NAME}"

# Record status values; failures are written as "failed:<reason>"
STATUS_OK = "ok"
STATUS_LP_SKIPPED = "lp_skipped"
STATUS_LP_UNDEFINED = "lp_undefined"


@dataclass(frozen=True)
class ScaleRecord:
    """Entropies of one graph at one scale. Missing values are None."""

    scale: float
    n_r: Optional[int] = None
    m_r: Optional[int] = None
    l_raw: Optional[int] = None
    l_norm: Optional[float] = None
    h_raw: Optional[float] = None
    h_norm: Optional[float] = None
    eps: Optional[float] = None
    clamped: int = 0
    status: str = STATUS_OK

    @property
    def failed(self) -> bool:
        return self.status.startswith("failed")


@dataclass
class EntropyTrajectory:
    """Per-scale entropies of one graph, largest scale first."""

    graph_id: str
    family: Optional[str]
    n: int
    m: int
    seed: int
    records: List[ScaleRecord] = field(default_factory=list)
    # Link-prediction similarity behind H; None when H was not computed
    scorer: Optional[str] = None

    @property
    def scales(self) -> Tuple[float, ...]:
        return tuple(r.scale for r in self.records)

    def record(self, scale: float) -> ScaleRecord:
        for r in self.records:
            if r.scale == scale:
                return r
        raise KeyError(scale)

    @property
    def complete(self) -> bool:
        return all(not r.failed for r in self.records)

    def l_norm(self) -> List[Optional[float]]:
        return [r.l_norm for r in self.records]

    def h_norm(self) -> List[Optional[float]]:
        return [r.h_norm for r in self.records]


def _failure(scale: float, error: Exception) -> ScaleRecord:
    return ScaleRecord(scale=scale, status=f"failed:{type(error).__name__}")


def _basis_for(g: Graph, config: RunConfig) -> Optional[SpectralBasis]:
    """Spectral basis of G_0 large enough for every reduced scale."""
    reduced = [s for s in config.scales if s < 1.0]
    if not reduced:
        return None
    k = config.k or max(default_subspace_dim(g.n, s) for s in reduced)
    try:
        return spectral_basis(laplacian(g), min(k, g.n))
    except MsentError as e:
        logger.warning(f"No spectral basis for RSS measurement: {e}")
        return None


def _measure_eps(
    g: Graph, seq: CoarseSequence, basis: Optional[SpectralBasis], scale: float, config: RunConfig
) -> Optional[float]:
    if not seq.levels:
        return 0.0
    if basis is None:
        return None
    k = min(config.k or default_subspace_dim(g.n, scale), basis.k)
    return rss_measure(g, seq, basis.truncate(k))


def _entropies_at_scale(
    reduced: Graph,
    scale_index: int,
    scale: float,
    eps: Optional[float],
    graph_key: int,
    seed: int,
    config: RunConfig,
    deadline: Optional[float],
) -> ScaleRecord:
    """Raw and normalized L and H of one reduced (binarized) graph."""
    status = STATUS_OK
    l_raw = compression_entropy(reduced)

    lp: Optional[RankEntropy] = None
    if config.link_prediction:
        try:
            lp = link_prediction_entropy(reduced, config.scorer, tie_mode=config.tie_mode, deadline=deadline)
        except EntropyUndefinedError as e:
            logger.debug(f"H undefined at scale {scale}: {e}")
            status = STATUS_LP_UNDEFINED
        except BudgetExceededError as e:
            logger.warning(f"H skipped at scale {scale}: {e}")
            status = STATUS_LP_SKIPPED

    keys = (graph_key, scale_index)
    ensemble = None
    if lp is not None:
        try:
            ensemble = build_ensemble(
                reduced.n,
                reduced.num_edges,
                count=config.replicas,
                seed=seed,
                scorer=config.scorer,
                tie_mode=config.tie_mode,
                keys=keys,
                deadline=deadline,
            )
        except BudgetExceededError as e:
            logger.warning(f"Baseline H skipped at scale {scale}: {e}")
            status = STATUS_LP_SKIPPED
    if ensemble is None:
        ensemble = build_ensemble(reduced.n, reduced.num_edges, count=config.replicas, seed=seed, keys=keys)

    l_norm = normalized_compression(reduced, ensemble, l_raw=l_raw)

    h_norm = None
    if lp is not None and ensemble.h_values:
        try:
            h_norm = normalized_lp_entropy(reduced, ensemble, h_raw=lp.h)
        except NormalizationError as e:
            logger.debug(f"H* undefined at scale {scale}: {e}")
            status = STATUS_LP_UNDEFINED

    return ScaleRecord(
        scale=scale,
        n_r=reduced.n,
        m_r=reduced.num_edges,
        l_raw=l_raw,
        l_norm=l_norm,
        h_raw=lp.h if lp is not None else None,
        h_norm=h_norm,
        eps=eps,
        clamped=lp.clamped if lp is not None else 0,
        status=status,
    )


def run_graph(
    g: Graph, config: RunConfig, graph_id: str = "graph", family: Optional[str] = None
) -> EntropyTrajectory:
    """Compute the entropy trajectory of one graph.

    Scales are processed largest first. A scale whose reduction or entropy
    computation fails is recorded as failed and the remaining scales still
    run. Baseline seeds derive from (config seed, graph id, scale index,
    replica), so the result depends only on the graph, its id and the config.

    Args:
        g: Graph with at least 10 nodes
        config: Run configuration; its seed must be set
        graph_id: Identifier used in output and seed derivation
        family: Optional domain label

    Returns:
        EntropyTrajectory with one record per configured scale

    Raises:
        ParameterError: If g has fewer than 10 nodes or no seed is configured
    """
    if g.n < MIN_NODES:
        raise ParameterError(f"graph '{graph_id}' has {g.n} nodes, at least {MIN_NODES} are needed")
    if config.seed is None:
        raise ParameterError("run_graph needs a configured seed")

    started = time.monotonic()
    deadline = started + config.budget if config.budget else None
    graph_key = stable_key(graph_id)
    seed = derive_seed(config.seed, graph_key)
    trajectory = EntropyTrajectory(
        graph_id=graph_id,
        family=family,
        n=g.n,
        m=g.num_edges,
        seed=seed,
        scorer=config.scorer if config.link_prediction else None,
    )
    logger.info(f"Processing {graph_id} (n={g.n}, m={g.num_edges})")

    basis = _basis_for(g, config)
    previous: Optional[CoarseSequence] = None
    for scale_index, scale in enumerate(config.scales):
        try:
            seq = reduce_to_scale(
                g,
                scale,
                family=config.family,
                cost=config.cost,
                k=config.k,
                max_levels=config.max_levels,
                max_level_reduction=config.max_level_reduction,
                previous=previous if config.chained and previous is not None and previous.levels else None,
            )
            eps = _measure_eps(g, seq, basis, scale, config)
            record = _entropies_at_scale(
                seq.final.binarize(), scale_index, scale, eps, graph_key, config.seed, config, deadline
            )
            previous = seq
        except MsentError as e:
            logger.warning(f"{graph_id}: scale {scale} failed: {e}")
            record = _failure(scale, e)
        trajectory.records.append(record)
        logger.debug(
            f"{graph_id} @ {scale}: n={record.n_r} L*={record.l_norm} H*={record.h_norm} [{record.status}]"
        )

    logger.info(f"Finished {graph_id} in {time.monotonic() - started:.1f}s")
    return trajectory


def _format(value: object) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return "" if math.isnan(value) else format(value, ".12g")
    return str(value)


def trajectory_rows(trajectory: EntropyTrajectory) -> List[List[str]]:
    rows = []
    for r in trajectory.records:
        values = (
            trajectory.graph_id,
            trajectory.family or "",
            r.scale,
            r.n_r,
            r.m_r,
            r.l_raw,
            r.l_norm,
            r.h_raw,
            r.h_norm,
            trajectory.scorer or "",
            r.eps,
            r.clamped,
            r.status,
        )
        rows.append([_format(v) for v in values])
    return rows


def format_trajectories_csv(trajectories: Sequence[EntropyTrajectory]) -> str:
    """CSV text with the schema line, the header and rows in input order."""
    buffer = io.StringIO()
    buffer.write(SCHEMA_LINE + "\n")
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(TRAJECTORY_COLUMNS)
    for trajectory in trajectories:
        writer.writerows(trajectory_rows(trajectory))
    return buffer.getvalue()


def write_trajectories_csv(trajectories: Sequence[EntropyTrajectory], path: Path) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(format_trajectories_csv(trajectories), encoding="utf-8")
    logger.info(f"Wrote {sum(len(t.records) for t in trajectories)} trajectory rows to {path}")


def _process_entry(entry: CorpusEntry, config: RunConfig) -> Tuple[Optional[EntropyTrajectory], float, str]:
    """Load and process one corpus graph; failures become a skip reason."""
    started = time.monotonic()
    try:
        g = read_graph(entry.path)
        trajectory = run_graph(g, config, graph_id=entry.graph_id, family=entry.family)
    except MsentError as e:
        logger.warning(f"Skipping {entry.graph_id} ({entry.path}): {e}")
        return None, time.monotonic() - started, str(e)
    return trajectory, time.monotonic() - started, ""


def run_corpus(
    entries: Sequence[CorpusEntry], config: RunConfig, out_dir: Optional[Path] = None
) -> List[EntropyTrajectory]:
    """Process every corpus graph and write trajectories.csv and manifest.json.

    Graphs run in parallel across ``config.workers`` processes. Results are
    collected in manifest order, so the CSV does not depend on the worker
    count. Unreadable or invalid inputs are skipped and listed in the manifest.

    Args:
        entries: Corpus entries
        config: Run configuration; its seed must be set
        out_dir: Output directory, ``config.out`` when omitted

    Returns:
        Trajectories of the graphs that were processed, in manifest order
    """
    if config.seed is None:
        raise ParameterError("run_corpus needs a configured seed")
    out_dir = Path(out_dir or config.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    started = time.monotonic()

    workers = min(config.workers, max(len(entries), 1))
    logger.info(f"Running {len(entries)} graphs on {workers} worker(s), seed {config.seed}")
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_process_entry, entries, [config] * len(entries)))
    else:
        results = [_process_entry(entry, config) for entry in entries]

    trajectories = []
    graphs = []
    skipped = []
    for entry, (trajectory, seconds, reason) in zip(entries, results):
        if trajectory is None:
            skipped.append({**entry.to_dict(), "reason": reason})
            continue
        trajectories.append(trajectory)
        graphs.append(
            {
                **entry.to_dict(),
                "n": trajectory.n,
                "m": trajectory.m,
                "seed": trajectory.seed,
                "failed_scales": [r.scale for r in trajectory.records if r.failed],
                "seconds": round(seconds, 3),
            }
        )

    write_trajectories_csv(trajectories, out_dir / "trajectories.csv")
    manifest: Dict[str, object] = {
        "version": __version__,
        "schema": SCHEMA_NAME,
        "config": config.to_dict(),
        "graphs": graphs,
        "skipped": skipped,
        "timings": {"total_seconds": round(time.monotonic() - started, 3)},
    }
    manifest_path = out_dir / "manifest.json"
    manifest_path.write_text(json.dumps(manifest, indent=2) + "\n", encoding="utf-8")
    logger.info(f"Wrote run manifest to {manifest_path} ({len(skipped)} skipped)")
    return trajectories
