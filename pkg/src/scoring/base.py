"""Base class for all link-prediction scorers."""

from abc import ABC, abstractmethod
from typing import AbstractSet, Sequence

from ..utils.errors import GraphDomainError

NeighborSets = Sequence[AbstractSet[int]]


class BaseScorer(ABC):
    """Base class for neighborhood similarity scores.

    Scores are computed from neighbor sets only, so the leave-one-out loop
    can hand in a locally modified copy of the graph's adjacency.
    """

    name: str = ""
    # True when a pair's score depends on the degrees of its common neighbors
    degree_sensitive: bool = False

    @abstractmethod
    def _score(self, neighbors: NeighborSets, u: int, v: int) -> float:
        """Score the pair (u, v).

        Args:
            neighbors: Γ(x) for every node x
            u: First node
            v: Second node, different from u

        Returns:
            Similarity score; symmetric in u and v
        """

    def score(self, neighbors: NeighborSets, u: int, v: int) -> float:
        """Validate the pair and score it.

        Raises:
            GraphDomainError: If u == v
        """
        if u == v:
            raise GraphDomainError(f"cannot score a node against itself ({u})")
        if u > v:
            u, v = v, u
        return self._score(neighbors, u, v)

    def __repr__(self) -> str:
        return f"{type(self).__name__}()"
