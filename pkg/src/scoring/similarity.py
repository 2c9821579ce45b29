"""Jaccard and Adamic–Adar similarity.

Both scores are evaluated in a canonical order so the same pair in the same
graph always yields the same float, whichever code path asks for it.
"""

import math
from collections import Counter
from typing import Dict

from ..graph.core import Graph
from ..utils.errors import UsageError
from .base import BaseScorer, NeighborSets


class JaccardScorer(BaseScorer):
    """|Γ(u) ∩ Γ(v)| / |Γ(u) ∪ Γ(v)|, 0 when both neighborhoods are empty."""

    name = "jaccard"

    def _score(self, neighbors: NeighborSets, u: int, v: int) -> float:
        nu, nv = neighbors[u], neighbors[v]
        common = len(nu & nv)
        union = len(nu) + len(nv) - common
        return common / union if union else 0.0


class AdamicAdarScorer(BaseScorer):
    """Sum over common neighbors w of 1 / ln|Γ(w)|.

    A common neighbor has degree >= 2, so the logarithm is positive. Terms
    are grouped by degree and added in ascending degree order.
    """

    name = "adamic-adar"
    degree_sensitive = True

    def _score(self, neighbors: NeighborSets, u: int, v: int) -> float:
        common = neighbors[u] & neighbors[v]
        if not common:
            return 0.0
        by_degree = Counter(len(neighbors[w]) for w in common)
        return sum(count / math.log(degree) for degree, count in sorted(by_degree.items()))


SCORERS: Dict[str, BaseScorer] = {
    JaccardScorer.name: JaccardScorer(),
    AdamicAdarScorer.name: AdamicAdarScorer(),
}


def get_scorer(name: str) -> BaseScorer:
    """Look up a scorer by name ("adamic_adar" is accepted as an alias)."""
    key = name.replace("_", "-")
    if key not in SCORERS:
        raise UsageError(f"unknown scorer '{name}', expected one of {sorted(SCORERS)}")
    return SCORERS[key]


def jaccard(g: Graph, u: int, v: int) -> float:
    """Jaccard similarity of u and v in ``g``."""
    return SCORERS["jaccard"].score(g.neighbor_sets, u, v)


def adamic_adar(g: Graph, u: int, v: int) -> float:
    """Adamic–Adar index of u and v in ``g``."""
    return SCORERS["adamic-adar"].score(g.neighbor_sets, u, v)
