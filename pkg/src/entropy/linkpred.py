"""Leave-one-out link-prediction entropy.

Every edge is removed in turn and ranked against all non-adjacent pairs of
the reduced graph by a neighborhood similarity score. The ranks are binned
over the nominal rank range and the Shannon entropy (natural log) of the
bin distribution is the link-prediction entropy H(G).
"""

import math
import time
from dataclasses import dataclass
from itertools import combinations
from typing import Dict, FrozenSet, List, Optional, Sequence, Set, Tuple, Union

import numpy as np
from loguru import logger

from ..graph.core import Graph
from ..scoring.base import BaseScorer
from ..scoring.similarity import get_scorer
from ..utils.config import TIE_MODES
from ..utils.errors import BudgetExceededError, EntropyUndefinedError, UsageError

Pair = Tuple[int, int]
ScorerLike = Union[str, BaseScorer]


@dataclass(frozen=True)
class RankRecord:
    """Rank of one removed edge among the candidate pairs."""

    edge: Pair
    rank: Union[int, float]
    candidates: int


@dataclass(frozen=True)
class RankEntropy:
    """Binned rank distribution and its entropy."""

    bins: int
    bin_probs: Tuple[float, ...]
    h: float
    r_max: float
    clamped: int
    edges: int

    def summary(self) -> Dict[str, object]:
        return {
            "E": self.edges,
            "B": self.bins,
            "R_max": self.r_max,
            "clamped": self.clamped,
            "H": self.h,
        }


def _resolve(scorer: ScorerLike) -> BaseScorer:
    return get_scorer(scorer) if isinstance(scorer, str) else scorer


def _check_tie_mode(tie_mode: str) -> None:
    if tie_mode not in TIE_MODES:
        raise UsageError(f"unknown tie mode '{tie_mode}', expected one of {TIE_MODES}")


def _rank(greater: int, equal: int, tie_mode: str) -> Union[int, float]:
    if tie_mode == "mean":
        return 1 + greater + equal / 2
    return 1 + greater


def _check_deadline(deadline: Optional[float], done: int, total: int) -> None:
    if deadline is not None and time.monotonic() > deadline:
        raise BudgetExceededError(f"link prediction stopped after {done} of {total} edges")


def _two_hop(neighbors: Sequence[FrozenSet[int]], x: int) -> Set[int]:
    """Nodes at distance exactly two from x."""
    reach: Set[int] = set()
    for w in neighbors[x]:
        reach |= neighbors[w]
    reach -= neighbors[x]
    reach.discard(x)
    return reach


def _non_edge_scores(
    neighbors: Sequence[FrozenSet[int]], scorer: BaseScorer
) -> Dict[Pair, float]:
    """Scores of all non-adjacent pairs with a common neighbor.

    Any other non-adjacent pair has no common neighbor and scores 0 under
    both similarity measures.
    """
    pairs: Set[Pair] = set()
    for around in neighbors:
        for a, b in combinations(sorted(around), 2):
            if b not in neighbors[a]:
                pairs.add((a, b))
    return {p: scorer._score(neighbors, p[0], p[1]) for p in sorted(pairs)}


def _affected_pairs(
    original: Sequence[FrozenSet[int]],
    current: Sequence[Set[int]],
    u: int,
    v: int,
    scorer: BaseScorer,
) -> Set[Pair]:
    """Non-adjacent pairs whose score can differ after removing (u, v)."""
    affected: Set[Pair] = set()
    for x in (u, v):
        for y in _two_hop(original, x):
            affected.add((x, y) if x < y else (y, x))
    if scorer.degree_sensitive:
        # u and v lost one degree, which changes every pair they are a common neighbor of
        for w in (u, v):
            for a, b in combinations(sorted(current[w]), 2):
                if b not in original[a]:
                    affected.add((a, b))
    affected.discard((u, v))
    return affected


def loo_ranks(
    g: Graph,
    scorer: ScorerLike = "adamic-adar",
    tie_mode: str = "optimistic",
    deadline: Optional[float] = None,
) -> List[RankRecord]:
    """Rank every edge of ``g`` against the non-edges left by its removal.

    Scores of the unmodified graph are computed once. For each removed edge
    only the pairs near its endpoints are rescored, which gives the same
    ranks as rescoring every pair (see :func:`loo_ranks_bruteforce`).

    Args:
        g: Graph; weights are ignored
        scorer: Scorer name or instance
        tie_mode: "optimistic" counts strictly higher scores only, "mean"
            adds half of the other pairs that tie with the removed edge
        deadline: ``time.monotonic()`` value after which the run is abandoned

    Returns:
        One record per edge, in the order of ``g.edges``

    Raises:
        BudgetExceededError: If the deadline passes
    """
    _check_tie_mode(tie_mode)
    scorer = _resolve(scorer)
    original = g.neighbor_sets
    current: List[Set[int]] = [set(s) for s in original]
    n, total_edges = g.n, g.num_edges
    non_edges = n * (n - 1) // 2 - total_edges
    candidates = non_edges + 1

    base = _non_edge_scores(original, scorer)
    ordered = np.sort(np.fromiter(base.values(), dtype=float, count=len(base)))
    zero_pairs = non_edges - len(base)

    records: List[RankRecord] = []
    for i, (u, v, _) in enumerate(g.edges):
        _check_deadline(deadline, i, total_edges)
        current[u].discard(v)
        current[v].discard(u)
        try:
            target = scorer._score(current, u, v)
            hi = int(np.searchsorted(ordered, target, side="right"))
            greater = len(ordered) - hi
            if target > 0.0:
                equal = hi - int(np.searchsorted(ordered, target, side="left"))
            else:
                equal = zero_pairs
            for a, b in _affected_pairs(original, current, u, v, scorer):
                before = base.get((a, b), 0.0)
                after = scorer._score(current, a, b)
                greater += (after > target) - (before > target)
                equal += (after == target) - (before == target)
        finally:
            current[u].add(v)
            current[v].add(u)
        records.append(RankRecord(edge=(u, v), rank=_rank(greater, equal, tie_mode), candidates=candidates))

    logger.debug(f"Ranked {len(records)} edges with {scorer.name} over {candidates} candidates")
    return records


def loo_ranks_bruteforce(
    g: Graph, scorer: ScorerLike = "adamic-adar", tie_mode: str = "optimistic"
) -> List[RankRecord]:
    """Reference ranking that rescores every non-adjacent pair per removed edge."""
    _check_tie_mode(tie_mode)
    scorer = _resolve(scorer)
    current: List[Set[int]] = [set(s) for s in g.neighbor_sets]
    n = g.n
    records: List[RankRecord] = []
    for u, v, _ in g.edges:
        current[u].discard(v)
        current[v].discard(u)
        target = scorer._score(current, u, v)
        greater = equal = total = 0
        for a, b in combinations(range(n), 2):
            if b in current[a]:
                continue
            total += 1
            if (a, b) == (u, v):
                continue
            s = scorer._score(current, a, b)
            greater += s > target
            equal += s == target
        current[u].add(v)
        current[v].add(u)
        records.append(RankRecord(edge=(u, v), rank=_rank(greater, equal, tie_mode), candidates=total))
    return records


def rank_entropy(ranks: Sequence[RankRecord], n: int, avg_degree: float) -> RankEntropy:
    """Bin ranks into ⌊n/2⌋ equal bins over [1, R_max] and take the entropy.

    R_max = n(n−1)/2 − ⟨k⟩n/2 + 1. Ranks beyond R_max land in the last bin
    and are counted in ``clamped``.

    Raises:
        EntropyUndefinedError: If there are no ranks or n < 4
    """
    if not ranks:
        raise EntropyUndefinedError("link-prediction entropy is undefined for a graph without edges")
    if n < 4:
        raise EntropyUndefinedError(f"link-prediction entropy needs at least 4 nodes, got {n}")

    bins = n // 2
    r_max = max(n * (n - 1) / 2 - avg_degree * n / 2 + 1, 1.0)
    counts = np.zeros(bins, dtype=np.int64)
    clamped = 0
    for record in ranks:
        if record.rank > r_max:
            clamped += 1
        j = int(math.floor((record.rank - 1) * bins / r_max))
        counts[min(max(j, 0), bins - 1)] += 1
    if clamped:
        logger.warning(f"{clamped} of {len(ranks)} ranks exceed R_max={r_max:g} and were clamped")

    probs = counts / len(ranks)
    nonzero = probs[probs > 0]
    h = float(-(nonzero * np.log(nonzero)).sum()) + 0.0
    return RankEntropy(
        bins=bins,
        bin_probs=tuple(float(p) for p in probs),
        h=h,
        r_max=r_max,
        clamped=clamped,
        edges=len(ranks),
    )


def link_prediction_entropy(
    g: Graph,
    scorer: ScorerLike = "adamic-adar",
    tie_mode: str = "optimistic",
    deadline: Optional[float] = None,
) -> RankEntropy:
    """H(G) of the binarized graph."""
    simple = g.binarize()
    if simple.num_edges == 0:
        raise EntropyUndefinedError("link-prediction entropy is undefined for a graph without edges")
    ranks = loo_ranks(simple, scorer, tie_mode=tie_mode, deadline=deadline)
    return rank_entropy(ranks, simple.n, simple.average_degree)
