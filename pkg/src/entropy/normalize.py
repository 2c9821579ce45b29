"""Normalization of both entropies against matched Erdős–Rényi baselines.

A baseline ensemble holds G(n, m) graphs with exactly the node and edge
count of the graph being normalized. L* and H* are ratios of the raw value
to the ensemble mean.
"""

from dataclasses import dataclass
from typing import Dict, Optional, Sequence, Tuple

import numpy as np
from loguru import logger

from ..graph.core import Graph
from ..graph.generators import erdos_renyi_gnm
from ..scoring.similarity import get_scorer
from ..utils.config import derive_seed
from ..utils.errors import NormalizationError, ParameterError, UsageError
from .linkpred import link_prediction_entropy
from .szip import compression_entropy

DEFAULT_REPLICAS = 10


@dataclass(frozen=True)
class BaselineEnsemble:
    """Entropies of ``count`` random graphs matched in size and edge count.

    ``h_values`` is empty when the ensemble was built without a scorer.
    """

    n: int
    m_edges: int
    count: int
    l_values: Tuple[int, ...]
    h_values: Tuple[float, ...]
    seed: int
    scorer: Optional[str] = None
    tie_mode: str = "optimistic"

    @property
    def l_mean(self) -> float:
        return float(np.mean(self.l_values))

    @property
    def h_mean(self) -> float:
        if not self.h_values:
            raise UsageError("baseline ensemble was built without link-prediction entropies")
        return float(np.mean(self.h_values))

    def matches(self, g: Graph) -> bool:
        return g.n == self.n and g.num_edges == self.m_edges

    def summary(self) -> Dict[str, object]:
        summary: Dict[str, object] = {
            "n": self.n,
            "m": self.m_edges,
            "replicas": self.count,
            "seed": self.seed,
            "L_values": list(self.l_values),
            "L_mean": self.l_mean,
        }
        if self.h_values:
            summary.update(
                scorer=self.scorer,
                H_values=list(self.h_values),
                H_mean=self.h_mean,
            )
        return summary


def replica_seed(seed: int, keys: Sequence[int], replica: int) -> int:
    """Seed of one baseline graph, derived from the base seed and its keys."""
    return derive_seed(seed, *keys, replica)


def build_ensemble(
    n: int,
    m_edges: int,
    count: int = DEFAULT_REPLICAS,
    seed: int = 0,
    scorer: Optional[str] = None,
    tie_mode: str = "optimistic",
    keys: Sequence[int] = (),
    deadline: Optional[float] = None,
) -> BaselineEnsemble:
    """Generate ``count`` G(n, m) graphs and measure their entropies.

    Args:
        n: Node count of the graph to normalize
        m_edges: Edge count of the graph to normalize
        count: Number of baseline graphs
        seed: Base seed
        scorer: Link-prediction scorer; no H values are computed when None
        tie_mode: Rank tie handling, as for the graph itself
        keys: Extra integers mixed into every replica seed, e.g. graph id and scale
        deadline: ``time.monotonic()`` limit passed to link prediction

    Returns:
        BaselineEnsemble with one L (and H) value per replica

    Raises:
        ParameterError: If count < 1 or m_edges does not fit n nodes
    """
    if count < 1:
        raise ParameterError(f"baseline ensemble needs at least one replica, got {count}")
    if scorer is not None:
        scorer = get_scorer(scorer).name

    l_values = []
    h_values = []
    for replica in range(count):
        baseline = erdos_renyi_gnm(n, m_edges, replica_seed(seed, keys, replica))
        l_values.append(compression_entropy(baseline))
        if scorer is not None:
            rank_entropy = link_prediction_entropy(baseline, scorer, tie_mode=tie_mode, deadline=deadline)
            h_values.append(rank_entropy.h)

    ensemble = BaselineEnsemble(
        n=n,
        m_edges=m_edges,
        count=count,
        l_values=tuple(l_values),
        h_values=tuple(h_values),
        seed=seed,
        scorer=scorer,
        tie_mode=tie_mode,
    )
    logger.debug(f"Baseline G({n}, {m_edges}) x{count}: mean L = {ensemble.l_mean:.1f} bits")
    return ensemble


def _ratio(value: float, baseline_mean: float, what: str, ens: BaselineEnsemble) -> float:
    if baseline_mean == 0:
        raise NormalizationError(
            f"baseline mean of {what} is 0 for G({ens.n}, {ens.m_edges}) over "
            f"{ens.count} replicas (seed {ens.seed}); the ratio is undefined"
        )
    return value / baseline_mean


def _check_matched(g: Graph, ens: BaselineEnsemble) -> None:
    if not ens.matches(g):
        raise UsageError(
            f"ensemble G({ens.n}, {ens.m_edges}) does not match graph with "
            f"n={g.n}, m={g.num_edges}"
        )


def normalized_compression(g: Graph, ens: BaselineEnsemble, l_raw: Optional[float] = None) -> float:
    """L*(G) = L(G) / mean L(G_R).

    Args:
        g: Graph matched by the ensemble
        ens: Baseline ensemble
        l_raw: Precomputed L(G); computed from ``g`` when omitted

    Raises:
        UsageError: If the ensemble does not match g
        NormalizationError: If the baseline mean is 0
    """
    _check_matched(g, ens)
    if l_raw is None:
        l_raw = compression_entropy(g)
    return _ratio(l_raw, ens.l_mean, "L", ens)


def normalized_lp_entropy(
    g: Graph,
    ens: BaselineEnsemble,
    scorer: Optional[str] = None,
    h_raw: Optional[float] = None,
    deadline: Optional[float] = None,
) -> float:
    """H*(G) = H(G) / mean H(G_R), with the ensemble's scorer and tie mode.

    Raises:
        UsageError: If the ensemble does not match g or used another scorer
        NormalizationError: If the baseline mean is 0
    """
    _check_matched(g, ens)
    if scorer is not None and ens.scorer is not None and scorer.replace("_", "-") != ens.scorer:
        raise UsageError(f"ensemble was scored with {ens.scorer}, not {scorer}")
    baseline_mean = ens.h_mean
    if h_raw is None:
        h_raw = link_prediction_entropy(g, ens.scorer, tie_mode=ens.tie_mode, deadline=deadline).h
    return _ratio(h_raw, baseline_mean, "H", ens)
