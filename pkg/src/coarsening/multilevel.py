"""Greedy multilevel coarsening to a target node fraction.

Each level recomputes the Laplacian, its leading eigenvectors and the local
variation costs of the current graph, then accepts the cheapest disjoint
contraction sets until the level's node reduction is reached. Levels stop
when the target size is hit, the level budget runs out, or a level no
longer reduces the graph meaningfully.
"""

import math
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
import scipy.linalg
from loguru import logger

from ..graph.core import Graph, connected_components, laplacian
from ..utils.errors import ParameterError
from .basis import SpectralBasis, spectral_basis
from .contraction import (
    ContractionLevel,
    contract,
    edge_local_variation_costs,
    edge_variation_costs,
    neighborhood_local_variation_costs,
    neighborhood_variation_costs,
)

FAMILIES = ("edge", "neighborhood")
DEFAULT_MAX_LEVELS = 20
DEFAULT_MAX_LEVEL_REDUCTION = 0.35
NEGLIGIBLE_REDUCTION = 0.01
MAX_SUBSPACE = 40

# Candidate ranking: (edge costs, neighborhood costs)
COST_FUNCTIONS = {
    "local_variation": (edge_local_variation_costs, neighborhood_local_variation_costs),
    "energy": (edge_variation_costs, neighborhood_variation_costs),
}
COSTS = tuple(COST_FUNCTIONS)
DEFAULT_COST = "local_variation"


@dataclass
class CoarseSequence:
    """The chain G_0 -> G_1 -> ... -> G_c with one level per arrow."""

    levels: List[ContractionLevel]
    graphs: List[Graph]
    target_fraction: float
    target_nodes: int
    stop_reason: str = "target"
    partial: bool = False
    subspace_dim: Optional[int] = None
    meta: Dict[str, object] = field(default_factory=dict)

    @property
    def final(self) -> Graph:
        return self.graphs[-1]

    @property
    def level_ratios(self) -> List[float]:
        return [level.reduction_ratio for level in self.levels]

    @property
    def overall_ratio(self) -> float:
        """r = 1 - prod(1 - r_l)"""
        return 1.0 - float(np.prod([1.0 - r for r in self.level_ratios]))

    def composed(self) -> ContractionLevel:
        """End-to-end level from G_0 to the final graph."""
        result = ContractionLevel.identity(self.graphs[0].n)
        for level in self.levels:
            result = result.compose(level)
        return result

    def extend(self, other: "CoarseSequence") -> "CoarseSequence":
        """Append a sequence that starts where this one ends."""
        return CoarseSequence(
            levels=self.levels + other.levels,
            graphs=self.graphs + other.graphs[1:],
            target_fraction=other.target_nodes / self.graphs[0].n,
            target_nodes=other.target_nodes,
            stop_reason=other.stop_reason,
            partial=self.partial or other.partial,
            subspace_dim=other.subspace_dim,
            meta=dict(other.meta),
        )

    def summary(self) -> Dict[str, object]:
        """JSON-friendly description of the sequence."""
        return {
            "n_fine": self.graphs[0].n,
            "n_coarse": self.final.n,
            "target_fraction": self.target_fraction,
            "target_nodes": self.target_nodes,
            "levels": [
                {"n_fine": lv.n_fine, "n_coarse": lv.n_coarse, "ratio": lv.reduction_ratio}
                for lv in self.levels
            ],
            "overall_ratio": self.overall_ratio,
            "stop_reason": self.stop_reason,
            "partial": self.partial,
            "k": self.subspace_dim,
            **self.meta,
        }


def target_node_count(n: int, fraction: float) -> int:
    """ceil(fraction * n), guarded against float round-up."""
    return max(1, math.ceil(fraction * n - 1e-9))


def default_subspace_dim(n: int, fraction: float) -> int:
    return min(MAX_SUBSPACE, target_node_count(n, fraction))


def _candidates(
    g: Graph, basis: SpectralBasis, family: str, cost: str = DEFAULT_COST
) -> List[Tuple[float, int, Tuple[int, ...]]]:
    """(cost, smallest node, nodes) sorted cheapest first.

    Neighborhood candidates list the center first and then its neighbors by
    ascending edge cost, so a candidate can be trimmed to a connected star.
    """
    edge_costs, set_costs = COST_FUNCTIONS[cost]
    if family == "edge":
        costs = edge_costs(g, basis)
        items = [(float(c), u, (u, v)) for (u, v, _), c in zip(g.edges, costs)]
    else:
        costs = set_costs(g, basis)
        edge_cost = {(u, v): float(c) for (u, v, _), c in zip(g.edges, edge_costs(g, basis))}
        items = []
        for v in range(g.n):
            if not np.isfinite(costs[v]):
                continue
            nbrs = sorted(
                g.neighbor_sets[v],
                key=lambda x: (edge_cost[(min(v, x), max(v, x))], x),
            )
            items.append((float(costs[v]), min(v, min(nbrs)), (v, *nbrs)))
    items.sort(key=lambda item: (item[0], item[1], item[2]))
    return items


def _select_sets(
    n: int, candidates: List[Tuple[float, int, Tuple[int, ...]]], family: str, goal: int
) -> Tuple[List[Tuple[int, ...]], int]:
    marked = np.zeros(n, dtype=bool)
    accepted: List[Tuple[int, ...]] = []
    reduction = 0
    for _, _, nodes in candidates:
        if reduction >= goal:
            break
        if family == "edge":
            if marked[nodes[0]] or marked[nodes[1]]:
                continue
            chosen = nodes
        else:
            center = nodes[0]
            if marked[center]:
                continue
            free = [x for x in nodes[1:] if not marked[x]]
            if not free:
                continue
            chosen = (center, *free[: goal - reduction])
        marked[list(chosen)] = True
        accepted.append(chosen)
        reduction += len(chosen) - 1
    return accepted, reduction


def _coarsen_connected(
    g: Graph,
    target_nodes: int,
    family: str,
    k: int,
    max_levels: int,
    max_level_reduction: float,
    cost: str = DEFAULT_COST,
) -> CoarseSequence:
    levels: List[ContractionLevel] = []
    graphs = [g]
    stop_reason = "target"
    partial = False

    while True:
        current = graphs[-1]
        remaining = current.n - target_nodes
        if remaining <= 0:
            stop_reason = "target"
            break
        if len(levels) >= max_levels:
            stop_reason, partial = "max_levels", True
            break

        goal = min(max(1, int(max_level_reduction * current.n)), remaining)
        basis = spectral_basis(laplacian(current), min(k, current.n))
        accepted, reduction = _select_sets(
            current.n, _candidates(current, basis, family, cost), family, goal
        )
        if reduction == 0:
            stop_reason, partial = "negligible", True
            break

        level = ContractionLevel.from_sets(current.n, accepted)
        levels.append(level)
        graphs.append(contract(current, level))
        logger.debug(
            f"level {len(levels)}: {level.n_fine} -> {level.n_coarse} nodes "
            f"(r={level.reduction_ratio:.3f}, goal {goal})"
        )
        if reduction < goal and level.reduction_ratio < NEGLIGIBLE_REDUCTION:
            partial = graphs[-1].n > target_nodes
            stop_reason = "negligible" if partial else "target"
            break

    return CoarseSequence(
        levels=levels,
        graphs=graphs,
        target_fraction=target_nodes / g.n,
        target_nodes=target_nodes,
        stop_reason=stop_reason,
        partial=partial,
        subspace_dim=k,
    )


def _allocate_targets(sizes: Sequence[int], total: int) -> List[int]:
    # Largest remainder apportionment with every component keeping >= 1 node.
    n = sum(sizes)
    exact = [total * s / n for s in sizes]
    targets = [min(s, max(1, math.floor(e))) for s, e in zip(sizes, exact)]
    order = sorted(range(len(sizes)), key=lambda i: (-(exact[i] - math.floor(exact[i])), i))
    short = total - sum(targets)
    for i in order:
        if short <= 0:
            break
        if targets[i] < sizes[i]:
            targets[i] += 1
            short -= 1
    return targets


def coarsen_to(
    g: Graph,
    target_fraction: float,
    family: str = "edge",
    k: Optional[int] = None,
    max_levels: int = DEFAULT_MAX_LEVELS,
    max_level_reduction: float = DEFAULT_MAX_LEVEL_REDUCTION,
    target_nodes: Optional[int] = None,
    cost: str = DEFAULT_COST,
) -> CoarseSequence:
    """Coarsen ``g`` to about ``ceil(target_fraction * N)`` nodes.

    Args:
        g: Graph to reduce
        target_fraction: Requested n / N, strictly between 0 and 1
        family: "edge" or "neighborhood" candidate sets
        k: Preserved subspace dimension; defaults to min(40, target size)
        max_levels: Level budget
        max_level_reduction: Largest per-level node reduction ratio
        target_nodes: Explicit target size, overriding the fraction
        cost: Candidate ranking, "local_variation" or "energy"

    Returns:
        CoarseSequence: Levels and graphs; ``partial`` is set when a stopping
        rule fired before the target size was reached

    Raises:
        ParameterError: On an invalid fraction, family, cost or subspace dimension
    """
    if not 0.0 < target_fraction < 1.0:
        raise ParameterError(f"target fraction must lie in (0, 1), got {target_fraction}")
    if family not in FAMILIES:
        raise ParameterError(f"unknown candidate family '{family}', expected one of {FAMILIES}")
    if cost not in COSTS:
        raise ParameterError(f"unknown cost '{cost}', expected one of {COSTS}")
    if g.n == 0:
        raise ParameterError("cannot coarsen an empty graph")
    if target_nodes is None:
        target_nodes = target_node_count(g.n, target_fraction)
    if k is None:
        k = default_subspace_dim(g.n, target_fraction)
    if k < 1:
        raise ParameterError(f"subspace dimension must be positive, got {k}")

    components = connected_components(g)
    if len(components) == 1:
        seq = _coarsen_connected(g, target_nodes, family, k, max_levels, max_level_reduction, cost)
    else:
        seq = _coarsen_components(
            g, components, target_nodes, family, k, max_levels, max_level_reduction, cost
        )
    seq.target_fraction = target_fraction
    seq.meta["cost"] = cost

    if seq.partial:
        logger.warning(
            f"Coarsening stopped early ({seq.stop_reason}): {g.n} -> {seq.final.n} nodes, "
            f"target {target_nodes}"
        )
    else:
        logger.debug(f"Coarsened {g.n} -> {seq.final.n} nodes in {len(seq.levels)} levels")
    return seq


def _coarsen_components(
    g: Graph,
    components: List[List[int]],
    target_nodes: int,
    family: str,
    k: int,
    max_levels: int,
    max_level_reduction: float,
    cost: str = DEFAULT_COST,
) -> CoarseSequence:
    """Coarsen each component separately and merge into a single end-to-end level."""
    targets = _allocate_targets([len(c) for c in components], target_nodes)
    membership = [0] * g.n
    offset = 0
    partial = False
    reasons = []
    for nodes, target in zip(components, targets):
        if target >= len(nodes):
            composed = ContractionLevel.identity(len(nodes))
        else:
            sub = g.subgraph(nodes)
            seq = _coarsen_connected(
                sub, target, family, min(k, len(nodes)), max_levels, max_level_reduction, cost
            )
            partial = partial or seq.partial
            reasons.append(seq.stop_reason)
            composed = seq.composed()
        for local, v in enumerate(nodes):
            membership[v] = offset + composed.membership[local]
        offset += composed.n_coarse

    level = ContractionLevel.from_membership(membership)
    levels = [level] if level.n_coarse < g.n else []
    graphs = [g] + [contract(g, lv) for lv in levels]
    stop_reason = next((r for r in reasons if r != "target"), "target")
    return CoarseSequence(
        levels=levels,
        graphs=graphs,
        target_fraction=target_nodes / g.n,
        target_nodes=target_nodes,
        stop_reason=stop_reason,
        partial=partial,
        subspace_dim=k,
        meta={"components": len(components)},
    )


def identity_sequence(g: Graph) -> CoarseSequence:
    """Zero-level sequence used for the full-scale record."""
    return CoarseSequence(levels=[], graphs=[g], target_fraction=1.0, target_nodes=g.n)


def reduce_to_scale(
    g: Graph,
    scale: float,
    family: str = "edge",
    k: Optional[int] = None,
    max_levels: int = DEFAULT_MAX_LEVELS,
    max_level_reduction: float = DEFAULT_MAX_LEVEL_REDUCTION,
    previous: Optional[CoarseSequence] = None,
    cost: str = DEFAULT_COST,
) -> CoarseSequence:
    """Reduce ``g`` to one scale, optionally continuing from a larger scale.

    When ``previous`` is given (a sequence from G_0 to a larger scale), the
    reduction starts from its final graph and the result still begins at G_0.
    """
    if scale >= 1.0:
        return identity_sequence(g)
    target = target_node_count(g.n, scale)
    if previous is None or previous.final.n <= target:
        return coarsen_to(
            g,
            scale,
            family=family,
            k=k,
            max_levels=max_levels,
            max_level_reduction=max_level_reduction,
            cost=cost,
        )
    step = coarsen_to(
        previous.final,
        target / previous.final.n,
        family=family,
        k=k if k is not None else default_subspace_dim(g.n, scale),
        max_levels=max_levels,
        max_level_reduction=max_level_reduction,
        target_nodes=target,
        cost=cost,
    )
    seq = previous.extend(step)
    seq.target_fraction = scale
    return seq


def reduce_to_scales(
    g: Graph,
    scales: Sequence[float],
    family: str = "edge",
    k: Optional[int] = None,
    max_levels: int = DEFAULT_MAX_LEVELS,
    max_level_reduction: float = DEFAULT_MAX_LEVEL_REDUCTION,
    chained: bool = False,
    cost: str = DEFAULT_COST,
) -> Dict[float, CoarseSequence]:
    """Reduce ``g`` to every scale in ``scales``.

    Independent reductions start each scale from G_0. Chained reductions start
    each scale from the previous (larger) scale's result.
    """
    results: Dict[float, CoarseSequence] = {}
    previous: Optional[CoarseSequence] = None
    for scale in sorted(scales, reverse=True):
        seq = reduce_to_scale(
            g,
            scale,
            family=family,
            k=k,
            max_levels=max_levels,
            max_level_reduction=max_level_reduction,
            previous=previous if chained and previous is not None and previous.levels else None,
            cost=cost,
        )
        results[scale] = seq
        previous = seq
    return results


def rss_measure(g_fine: Graph, seq: CoarseSequence, basis: SpectralBasis) -> float:
    """Measured restricted spectral similarity constant.

    Returns the largest ||x - Πx||_L / ||x||_L over the basis vectors, using
    the end-to-end composed contraction. Vectors with ||x||_L = 0 (the
    constant vector on a connected graph) are skipped.
    """
    L = laplacian(g_fine).entries
    level = seq.composed()
    scale = max(float(np.max(np.diag(L))) if L.size else 0.0, 1.0)
    epsilon = 0.0
    for m in range(basis.k):
        x = basis.vectors[:, m]
        energy = float(x @ L @ x)
        if energy <= 1e-12 * scale:
            continue
        residual = x - level.project(x)
        error = max(float(residual @ L @ residual), 0.0)
        epsilon = max(epsilon, math.sqrt(error / energy))
    return epsilon


def coarse_spectrum(seq: CoarseSequence, k: int) -> np.ndarray:
    """Smallest ``k`` eigenvalues of the final Laplacian, normalized by set size.

    Solves L_c y = λ diag(|C_r|) y so that a coarse node standing for |C_r|
    fine nodes carries their mass, which puts the coarse eigenvalues on the
    scale of the fine ones.
    """
    L_c = laplacian(seq.final).entries
    sizes = np.bincount(np.asarray(seq.composed().membership), minlength=seq.final.n).astype(float)
    k = min(k, seq.final.n)
    if k < 1:
        raise ParameterError(f"need at least one eigenvalue, got k={k}")
    values = scipy.linalg.eigh(L_c, np.diag(sizes), eigvals_only=True, subset_by_index=[0, k - 1])
    return np.clip(values, 0.0, None)
