"""Command line interface.

Every subcommand shares the configuration layer (defaults, MSENT_*
environment variables, ``--config`` JSON file, then flags) and the seed
discipline: randomized commands use ``--seed`` or draw one and report it on
stderr so the run can be replayed.
"""

import argparse
import json
import math
import sys
from pathlib import Path
from typing import Any, Callable, Dict, List, Optional, Sequence

import pandas as pd
from loguru import logger

from . import CSV_SCHEMA_VERSION, __version__
from .analytics.clustering import (
    DEFAULT_RESTARTS,
    adjusted_rand,
    cluster_composition,
    kmeans,
    pca,
)
from .analytics.features import feature_matrix
from .analytics.regression import build_models_1_to_5, predictions, report_table, residuals_by_family
from .coarsening.basis import spectral_basis
from .coarsening.multilevel import default_subspace_dim, reduce_to_scale, rss_measure
from .entropy.linkpred import link_prediction_entropy
from .entropy.normalize import build_ensemble
from .entropy.szip import szip_encode
from .graph.core import Graph, laplacian, write_edge_list
from .graph.generators import (
    barabasi_albert,
    erdos_renyi_gnm,
    grid2d,
    random_regular,
    random_ring,
)
from .pipeline.runner import run_corpus
from .pipeline.summary import read_trajectories_csv, write_profiles
from .utils.config import (
    COARSENING_COSTS,
    COARSENING_FAMILIES,
    SCORERS,
    TIE_MODES,
    RunConfig,
    derive_seed,
    load_config,
    parse_scales,
    resolve_seed,
    stable_key,
)
from .utils.errors import MsentError, UsageError
from .utils.input_handler import CorpusEntry, InputHandler, read_graph, write_manifest
from .utils.logging_setup import setup_logging

GRAPH_FAMILIES = ("ba", "grid", "ring", "regular", "er")
CORPUS_FAMILIES = ("ba", "ring", "regular", "grid")

CSV_OPTIONS = {"index": False, "float_format": "%.12g", "lineterminator": "\n"}


class ArgumentParser(argparse.ArgumentParser):
    """Parser that reports usage errors as exceptions instead of exiting."""

    def error(self, message: str) -> None:
        raise UsageError(f"{self.prog}: {message}")


def _common_options() -> argparse.ArgumentParser:
    common = ArgumentParser(add_help=False)
    common.add_argument("--config", type=Path, help="JSON config file; flags override its values")
    common.add_argument("--json", action="store_true", help="Print machine-readable JSON to stdout")
    common.add_argument("--seed", type=int, help="64-bit base seed; drawn and reported on stderr when omitted")
    common.add_argument("--workers", type=int, help="Worker processes (default: available CPUs)")
    common.add_argument("--out", type=Path, help="Output directory for files (default: results/)")
    common.add_argument(
        "--log-level",
        default="INFO",
        choices=["DEBUG", "INFO", "WARNING", "ERROR"],
        help="Console log level (default: INFO)",
    )
    return common


def _entropy_options(parser: argparse.ArgumentParser) -> None:
    parser.add_argument(
        "--scorer",
        choices=SCORERS,
        help=(
            "Link-prediction similarity (default: adamic-adar, the score behind the aa_h regression "
            "targets; jaccard is the overlap-based alternative)"
        ),
    )
    parser.add_argument(
        "--tie-mode",
        choices=TIE_MODES,
        help=(
            "Rank of the removed edge under score ties (default: optimistic, counting only strictly "
            "higher scores; mean splits ties evenly)"
        ),
    )


def _coarsening_options(parser: argparse.ArgumentParser) -> None:
    parser.add_argument(
        "--family",
        choices=COARSENING_FAMILIES,
        help="Contraction candidates (default: edge pairs; neighborhood merges a node with its neighbors)",
    )
    parser.add_argument(
        "--cost",
        choices=COARSENING_COSTS,
        help=(
            "Candidate ranking (default: local_variation, degree-weighted variation of the "
            "eigenvalue-scaled basis, which keeps hubs until late; energy ranks by plain subspace energy)"
        ),
    )
    parser.add_argument(
        "--k", type=int, help="Preserved spectral subspace (default: min(40, target size) leading Laplacian eigenvectors)"
    )
    parser.add_argument(
        "--max-levels", type=int, help="Coarsening level budget (default: 20 levels of at most 35%% reduction, ample for a 20%% scale)"
    )


def parse_args(argv: Optional[Sequence[str]] = None) -> argparse.Namespace:
    """Parse command line arguments."""
    common = _common_options()
    parser = ArgumentParser(
        prog="msent",
        description="Multiscale structural and link-prediction entropy of undirected networks.",
    )
    parser.add_argument(
        "--version",
        action="version",
        version=f"msent {__version__} (trajectory CSV schema {CSV_SCHEMA_VERSION})",
    )
    sub = parser.add_subparsers(dest="command", metavar="COMMAND")
    sub.required = True

    gen = sub.add_parser("gen", parents=[common], help="Generate a synthetic graph as an edge list")
    gen.add_argument("--family", required=True, choices=GRAPH_FAMILIES, help="Graph family")
    gen.add_argument("--n", type=int, help="Node count (ba, ring, regular, er)")
    gen.add_argument("--m", type=int, default=2, help="Edges per new node for ba (default: 2, mean degree 4 like the other families)")
    gen.add_argument("--edges", type=int, help="Edge count for er (default: 2n)")
    gen.add_argument("--rows", type=int, help="Grid rows")
    gen.add_argument("--cols", type=int, help="Grid columns")
    gen.add_argument("--k-near", type=int, default=4, help="Ring lattice degree, even (default: 4, the small-world lattice)")
    gen.add_argument("--p", type=float, default=0.1, help="Ring shortcut probability (default: 0.1, small-world rewiring)")
    gen.add_argument("--d", type=int, default=4, help="Degree for regular graphs (default: 4, the shared mean degree)")
    gen.add_argument("--output", type=Path, help="Write the edge list here instead of stdout")

    corpus = sub.add_parser(
        "gen-corpus",
        parents=[common],
        help="Write the synthetic families as edge lists plus a pipeline manifest",
    )
    corpus.add_argument("--n", type=int, default=500, help="Nodes per graph (default: 500, the desk-scale corpus)")
    corpus.add_argument("--count", type=int, default=10, help="Graphs per family (default: 10 independent draws)")
    corpus.add_argument(
        "--families",
        default=",".join(CORPUS_FAMILIES),
        help="Comma separated families (default: ba,ring,regular,grid)",
    )

    reduce = sub.add_parser("reduce", parents=[common], help="Coarsen a graph to a fraction of its nodes")
    reduce.add_argument("--input", required=True, type=Path, help="Edge-list file")
    reduce.add_argument(
        "--scale", "--fraction", dest="scale", required=True, type=float, help="Fraction of nodes to keep, in (0, 1]"
    )
    _coarsening_options(reduce)
    reduce.add_argument(
        "--output", type=Path, help="Write the coarse edge list here, with a <output>.json summary, instead of stdout"
    )

    entropy = sub.add_parser("entropy", parents=[common], help="Compression entropy L(G) in bits")
    entropy.add_argument("--input", required=True, type=Path, help="Edge-list file")

    lp = sub.add_parser("lp-entropy", parents=[common], help="Leave-one-out link-prediction entropy H(G)")
    lp.add_argument("--input", required=True, type=Path, help="Edge-list file")
    _entropy_options(lp)

    baseline = sub.add_parser("baseline", parents=[common], help="Matched G(n, m) baseline ensemble")
    baseline.add_argument("--n", required=True, type=int, help="Node count")
    baseline.add_argument("--m", required=True, type=int, help="Edge count")
    baseline.add_argument("--replicas", type=int, help="Baseline graphs (default: 10 matched G(n, m) draws)")
    baseline.add_argument("--with-h", action="store_true", help="Also compute link-prediction entropies")
    _entropy_options(baseline)

    pipeline = sub.add_parser("pipeline", parents=[common], help="Entropy trajectories of a corpus")
    pipeline.add_argument("--corpus", required=True, type=Path, help="Manifest JSON: [{path, id, family}]")
    pipeline.add_argument(
        "--scales", help="Comma separated fractions (default: 1.0,0.8,0.6,0.4,0.2, five even steps down to a fifth)"
    )
    pipeline.add_argument("--replicas", type=int, help="Baseline graphs per scale (default: 10 matched G(n, m) draws)")
    pipeline.add_argument("--budget", type=float, help="Per-graph seconds for link prediction; H is skipped past it")
    pipeline.add_argument(
        "--chained",
        action="store_const",
        const=True,
        help="Reduce each scale from the previous one instead of from the original graph",
    )
    pipeline.add_argument(
        "--no-link-prediction",
        dest="link_prediction",
        action="store_const",
        const=False,
        help="Compute structural entropy only",
    )
    _coarsening_options(pipeline)
    _entropy_options(pipeline)

    cluster = sub.add_parser("cluster", parents=[common], help="k-means and PCA of trajectories")
    cluster.add_argument("--trajectories", required=True, type=Path, help="Trajectory CSV from the pipeline")
    cluster.add_argument(
        "--k", type=int, default=3, help="Number of clusters (default: 3, one per regime: stable, increasing, hybrid)"
    )
    cluster.add_argument(
        "--restarts", type=int, default=DEFAULT_RESTARTS, help="k-means++ restarts (default: 50, the best inertia is kept)"
    )
    cluster.add_argument("--components", type=int, default=2, help="PCA components (default: 2, the plotted plane)")
    cluster.add_argument("--value", default="L_norm", choices=["L_norm", "H_norm"], help="Trajectory value")
    cluster.add_argument("--standardize", action="store_true", help="Cluster z-scored columns")

    regress = sub.add_parser("regress", parents=[common], help="Nested regressions on multiscale entropy")
    regress.add_argument("--trajectories", required=True, type=Path, help="Trajectory CSV from the pipeline")
    regress.add_argument(
        "--target",
        default="aa_h100",
        help="Response, aa_h<percent> or jac_h<percent> (default: aa_h100, Adamic-Adar entropy of the full graph)",
    )
    regress.add_argument(
        "--predictors",
        default="L_norm",
        choices=["L_norm", "H_norm"],
        help="Trajectory value used as predictors (default: L_norm)",
    )

    return parser.parse_args(argv)


def _clean(value: Any) -> Any:
    """Make a payload JSON-safe: non-finite floats become null."""
    if isinstance(value, dict):
        return {k: _clean(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_clean(v) for v in value]
    if isinstance(value, float) and not math.isfinite(value):
        return None
    if hasattr(value, "item"):
        return _clean(value.item())
    return value


def _emit(args: argparse.Namespace, payload: Dict[str, Any], text: str) -> None:
    if args.json:
        print(json.dumps(_clean(payload), sort_keys=True))
    else:
        print(text)


def _write_json(payload: Dict[str, Any], path: Path) -> None:
    path.write_text(json.dumps(_clean(payload), indent=2) + "\n", encoding="utf-8")
    logger.info(f"Wrote {path}")


def sidecar_path(output: Path) -> Path:
    """JSON summary written next to a coarse edge list: ``coarse.edges`` -> ``coarse.edges.json``."""
    return output.with_name(output.name + ".json")


def _seeded(config: RunConfig) -> RunConfig:
    seed, drawn = resolve_seed(config.seed)
    if drawn:
        print(f"seed: {seed}", file=sys.stderr)
    return config.with_overrides(seed=seed)


def _write_graph(g: Graph, output: Optional[Path]) -> None:
    data = write_edge_list(g)
    if output is None:
        sys.stdout.buffer.write(data)
        sys.stdout.flush()
    else:
        output.write_bytes(data)
        logger.info(f"Wrote {g.n} nodes and {g.num_edges} edges to {output}")


def _generate(family: str, args: argparse.Namespace, seed: int) -> Graph:
    if family == "grid":
        if args.rows is None or args.cols is None:
            raise UsageError("grid needs --rows and --cols")
        return grid2d(args.rows, args.cols)
    if args.n is None:
        raise UsageError(f"{family} needs --n")
    if family == "ba":
        return barabasi_albert(args.n, args.m, seed)
    if family == "ring":
        return random_ring(args.n, args.k_near, args.p, seed)
    if family == "regular":
        return random_regular(args.n, args.d, seed)
    return erdos_renyi_gnm(args.n, args.edges if args.edges is not None else 2 * args.n, seed)


def cmd_gen(args: argparse.Namespace, config: RunConfig) -> int:
    seed = 0
    if args.family != "grid":
        seed = _seeded(config).seed
    _write_graph(_generate(args.family, args, seed), args.output)
    return 0


def _corpus_graph(family: str, n: int, seed: int) -> Graph:
    if family == "ba":
        return barabasi_albert(n, 2, seed)
    if family == "ring":
        return random_ring(n, 4, 0.1, seed)
    if family == "regular":
        return random_regular(n, 4, seed)
    if family == "grid":
        rows = max(int(math.isqrt(n)), 1)
        return grid2d(rows, math.ceil(n / rows))
    if family == "er":
        return erdos_renyi_gnm(n, 2 * n, seed)
    raise UsageError(f"unknown corpus family '{family}', expected some of {GRAPH_FAMILIES}")


def cmd_gen_corpus(args: argparse.Namespace, config: RunConfig) -> int:
    config = _seeded(config)
    out = config.out
    graph_dir = out / "graphs"
    graph_dir.mkdir(parents=True, exist_ok=True)
    families = [f.strip() for f in args.families.split(",") if f.strip()]

    entries: List[CorpusEntry] = []
    for family in families:
        for i in range(args.count):
            graph_id = f"{family}-{i:03d}"
            g = _corpus_graph(family, args.n, derive_seed(config.seed, stable_key(family), i))
            path = graph_dir / f"{graph_id}.edges"
            path.write_bytes(write_edge_list(g))
            entries.append(CorpusEntry(path=path, graph_id=graph_id, family=family))

    manifest = out / "corpus.json"
    write_manifest(entries, manifest)
    logger.info(f"Wrote {len(entries)} graphs and manifest {manifest}")
    _emit(args, {"manifest": str(manifest), "graphs": len(entries), "seed": config.seed}, str(manifest))
    return 0


def cmd_reduce(args: argparse.Namespace, config: RunConfig) -> int:
    if not 0.0 < args.scale <= 1.0:
        raise UsageError(f"--scale must lie in (0, 1], got {args.scale}")
    g = read_graph(args.input)
    seq = reduce_to_scale(
        g,
        args.scale,
        family=config.family,
        cost=config.cost,
        k=config.k,
        max_levels=config.max_levels,
        max_level_reduction=config.max_level_reduction,
    )
    summary = seq.summary()
    if seq.levels:
        k = min(config.k or default_subspace_dim(g.n, args.scale), g.n)
        summary["eps"] = rss_measure(g, seq, spectral_basis(laplacian(g), k))
    else:
        summary["eps"] = 0.0
    if args.output is not None:
        _write_graph(seq.final, args.output)
        _write_json(summary, sidecar_path(args.output))
    elif not args.json:
        _write_graph(seq.final, None)
    if args.json:
        _emit(args, summary, "")
    else:
        logger.info(f"Reduced {g.n} -> {seq.final.n} nodes ({summary['stop_reason']})")
    return 0


def cmd_entropy(args: argparse.Namespace, config: RunConfig) -> int:
    g = read_graph(args.input)
    summary = {"edges": g.num_edges, **szip_encode(g.binarize()).summary()}
    _emit(args, summary, f"L = {summary['L_bits']} bits (n={summary['n']})")
    return 0


def cmd_lp_entropy(args: argparse.Namespace, config: RunConfig) -> int:
    g = read_graph(args.input)
    result = link_prediction_entropy(g, config.scorer, tie_mode=config.tie_mode)
    summary = result.summary()
    _emit(args, summary, f"H = {result.h:.6f} (E={result.edges}, B={result.bins}, clamped={result.clamped})")
    return 0


def cmd_baseline(args: argparse.Namespace, config: RunConfig) -> int:
    config = _seeded(config)
    ensemble = build_ensemble(
        args.n,
        args.m,
        count=config.replicas,
        seed=config.seed,
        scorer=config.scorer if args.with_h else None,
        tie_mode=config.tie_mode,
    )
    summary = ensemble.summary()
    text = f"mean L = {ensemble.l_mean:.3f} bits over {ensemble.count} G({args.n}, {args.m}) graphs"
    if args.with_h:
        text += f", mean H = {ensemble.h_mean:.6f}"
    _emit(args, summary, text)
    return 0


def cmd_pipeline(args: argparse.Namespace, config: RunConfig) -> int:
    config = _seeded(config)
    entries = InputHandler(str(args.corpus)).validate_and_load()
    trajectories = run_corpus(entries, config)
    table = read_trajectories_csv(config.out / "trajectories.csv")
    write_profiles(table, config.out / "profiles.csv")
    summary = {
        "graphs": len(trajectories),
        "skipped": len(entries) - len(trajectories),
        "rows": len(table),
        "out": str(config.out),
        "seed": config.seed,
    }
    _emit(args, summary, f"{len(trajectories)} trajectories written to {config.out}")
    return 0


def cmd_cluster(args: argparse.Namespace, config: RunConfig) -> int:
    config = _seeded(config)
    x = feature_matrix(read_trajectories_csv(args.trajectories), value=args.value)
    result = kmeans(x, args.k, config.seed, restarts=args.restarts, standardize=args.standardize)
    projection = pca(x, components=min(args.components, len(x.columns)))

    out = config.out
    out.mkdir(parents=True, exist_ok=True)
    assignments = pd.DataFrame(
        {"graph_id": list(x.graph_ids), "family": list(x.labels), "cluster": result.assignments}
    )
    assignments.to_csv(out / "assignments.csv", **CSV_OPTIONS)
    coordinates = pd.DataFrame(
        projection.coordinates, columns=[f"pc{i + 1}" for i in range(projection.coordinates.shape[1])]
    )
    coordinates.insert(0, "family", list(x.labels))
    coordinates.insert(0, "graph_id", list(x.graph_ids))
    coordinates.to_csv(out / "pca.csv", **CSV_OPTIONS)
    cluster_composition(result.assignments, x.labels).to_csv(out / "composition.csv", lineterminator="\n")

    summary: Dict[str, Any] = {
        "k": args.k,
        "rows": x.rows,
        "dropped": x.dropped,
        "inertia": result.inertia,
        "restart": result.restart,
        "iterations": result.iterations,
        "explained_variance_ratio": [float(r) for r in projection.explained_variance_ratio],
        "pca_dropped_columns": list(projection.dropped),
    }
    if any(x.labels):
        summary["ari_vs_family"] = adjusted_rand(x.labels, result.assignments)
    _write_json(summary, out / "cluster_summary.json")
    _emit(args, summary, f"{x.rows} graphs in {args.k} clusters, inertia {result.inertia:.6g}")
    return 0


def cmd_regress(args: argparse.Namespace, config: RunConfig) -> int:
    x = feature_matrix(read_trajectories_csv(args.trajectories), value=args.predictors, target=args.target)
    ladder = build_models_1_to_5(x, target=args.target)

    out = config.out
    out.mkdir(parents=True, exist_ok=True)
    report = ladder.to_dict()
    report["dropped"] = x.dropped
    report["predictor_value"] = args.predictors
    _write_json(report, out / "regression.json")
    report_table(ladder).to_csv(out / "regression_table.csv", lineterminator="\n")
    predictions(ladder).to_csv(out / "predictions.csv", **CSV_OPTIONS)
    if any(x.labels):
        residuals = []
        for label, fit in (("Model 1", ladder.fits[0]), (f"Model {len(ladder.fits)}", ladder.fits[-1])):
            frame = residuals_by_family(fit, x.labels)
            frame.insert(0, "model", label)
            residuals.append(frame)
        pd.concat(residuals).to_csv(out / "residuals.csv", **CSV_OPTIONS)

    first, last = ladder.fits[0], ladder.fits[-1]
    _emit(
        args,
        report,
        f"R2 {first.r2:.5f} -> {last.r2:.5f}, F={ladder.f_test.f_statistic:.4g}, p={ladder.f_test.p_value:.3g}",
    )
    return 0


COMMANDS: Dict[str, Callable[[argparse.Namespace, RunConfig], int]] = {
    "gen": cmd_gen,
    "gen-corpus": cmd_gen_corpus,
    "reduce": cmd_reduce,
    "entropy": cmd_entropy,
    "lp-entropy": cmd_lp_entropy,
    "baseline": cmd_baseline,
    "pipeline": cmd_pipeline,
    "cluster": cmd_cluster,
    "regress": cmd_regress,
}

# Subcommands whose output directory also receives the DEBUG log file
_LOGGED_COMMANDS = ("gen-corpus", "pipeline", "cluster", "regress")


def _config_from_args(args: argparse.Namespace) -> RunConfig:
    flags = {
        "seed": args.seed,
        "workers": args.workers,
        "out": args.out,
        "scorer": getattr(args, "scorer", None),
        "tie_mode": getattr(args, "tie_mode", None),
        "replicas": getattr(args, "replicas", None),
        "budget": getattr(args, "budget", None),
        "chained": getattr(args, "chained", None),
        "link_prediction": getattr(args, "link_prediction", None),
        "k": getattr(args, "k", None) if args.command != "cluster" else None,
        "max_levels": getattr(args, "max_levels", None),
        "scales": parse_scales(getattr(args, "scales", None)),
    }
    if args.command in ("reduce", "pipeline"):
        flags["family"] = args.family
        flags["cost"] = args.cost
    return load_config(args.config, **flags)


def main(argv: Optional[Sequence[str]] = None) -> int:
    """Main entry point.

    Returns:
        Process exit code: 0 on success, 1 for usage errors, 2 for bad
        input, 3 for numeric failures
    """
    try:
        args = parse_args(argv)
        setup_logging(args.log_level)
        config = _config_from_args(args)
        if args.command in _LOGGED_COMMANDS:
            setup_logging(args.log_level, log_dir=config.out)
        logger.debug(f"Arguments: {vars(args)}")
        return COMMANDS[args.command](args, config)
    except MsentError as e:
        logger.debug(f"{type(e).__name__}: {e}")
        print(f"error: {e}", file=sys.stderr)
        return e.exit_code
    except SystemExit as e:
        # --help and --version
        return int(e.code or 0)
    except KeyboardInterrupt:
        print("error: interrupted", file=sys.stderr)
        return 130
    except Exception as e:
        logger.exception(f"Unhandled error: {e}")
        print(f"error: {e}", file=sys.stderr)
        return 3

