"""Immutable weighted undirected graphs.

Provides the ``Graph`` type every other module works on, its dense
Laplacian, edge-list I/O and an isomorphism fingerprint.
"""

import math
from functools import cached_property
from typing import Dict, FrozenSet, Iterable, List, NamedTuple, Optional, Sequence, Tuple, Union

import numpy as np
import scipy.sparse
from scipy.sparse.csgraph import connected_components as _sparse_components

from ..utils.errors import GraphDomainError, GraphParseError

Edge = Tuple[int, int, float]

# Writer directive that pins node ids when first-appearance order would not
NODES_DIRECTIVE = "#! nodes"


class Graph:
    """Immutable undirected weighted graph with node ids 0..n-1.

    Edges are stored once as ``(u, v, w)`` with ``u < v`` and ``w > 0``,
    sorted lexicographically. ``labels`` maps internal ids back to the
    external ids an edge list used; it does not take part in equality.
    """

    def __init__(
        self,
        n: int,
        edges: Iterable[Union[Tuple[int, int], Tuple[int, int, float]]] = (),
        labels: Optional[Sequence[str]] = None,
        merge: bool = False,
    ):
        """Build a graph.

        Args:
            n: Node count
            edges: ``(u, v)`` or ``(u, v, w)`` tuples in any orientation
            labels: Optional external ids, one per node
            merge: Sum the weights of repeated pairs instead of rejecting them

        Raises:
            GraphDomainError: On self-loops, bad ids, non-positive weights or
                duplicate pairs when ``merge`` is False
        """
        if n < 0:
            raise GraphDomainError(f"node count must be non-negative, got {n}")
        weights: Dict[Tuple[int, int], float] = {}
        for edge in edges:
            u, v = int(edge[0]), int(edge[1])
            w = float(edge[2]) if len(edge) > 2 else 1.0
            if u == v:
                raise GraphDomainError(f"self-loop on node {u}")
            if not (0 <= u < n and 0 <= v < n):
                raise GraphDomainError(f"edge ({u}, {v}) outside node range 0..{n - 1}")
            if not (w > 0 and math.isfinite(w)):
                raise GraphDomainError(f"edge ({u}, {v}) has non-positive weight {w}")
            key = (u, v) if u < v else (v, u)
            if key in weights:
                if not merge:
                    raise GraphDomainError(f"duplicate edge {key}")
                weights[key] += w
            else:
                weights[key] = w

        self._n = n
        self._edges: Tuple[Edge, ...] = tuple((u, v, weights[(u, v)]) for u, v in sorted(weights))

        adjacency: List[List[Tuple[int, float]]] = [[] for _ in range(n)]
        for u, v, w in self._edges:
            adjacency[u].append((v, w))
            adjacency[v].append((u, w))
        self._adjacency = tuple(tuple(sorted(nbrs)) for nbrs in adjacency)

        if labels is not None and len(labels) != n:
            raise GraphDomainError(f"expected {n} labels, got {len(labels)}")
        self.labels = tuple(labels) if labels is not None else None

    @property
    def n(self) -> int:
        return self._n

    @property
    def edges(self) -> Tuple[Edge, ...]:
        return self._edges

    @property
    def adjacency(self) -> Tuple[Tuple[Tuple[int, float], ...], ...]:
        return self._adjacency

    @property
    def num_edges(self) -> int:
        return len(self._edges)

    def degree(self, v: int) -> int:
        """Number of neighbors of ``v`` (weights ignored)."""
        return len(self._adjacency[v])

    @cached_property
    def degrees(self) -> np.ndarray:
        return np.array([len(nbrs) for nbrs in self._adjacency], dtype=np.int64)

    @cached_property
    def weighted_degrees(self) -> np.ndarray:
        return np.array([sum(w for _, w in nbrs) for nbrs in self._adjacency], dtype=float)

    @property
    def average_degree(self) -> float:
        """<k> = 2|E| / N."""
        return 2.0 * self.num_edges / self._n if self._n else 0.0

    @cached_property
    def neighbor_sets(self) -> Tuple[FrozenSet[int], ...]:
        return tuple(frozenset(v for v, _ in nbrs) for nbrs in self._adjacency)

    def neighbors(self, v: int) -> FrozenSet[int]:
        """Γ(v)"""
        return self.neighbor_sets[v]

    def has_edge(self, u: int, v: int) -> bool:
        return v in self.neighbor_sets[u]

    def weight(self, u: int, v: int) -> float:
        for x, w in self._adjacency[u]:
            if x == v:
                return w
        return 0.0

    @property
    def is_weighted(self) -> bool:
        return any(w != 1.0 for _, _, w in self._edges)

    def binarize(self) -> "Graph":
        """Same structure with every weight set to 1."""
        if not self.is_weighted:
            return self
        return Graph(self._n, ((u, v) for u, v, _ in self._edges), labels=self.labels)

    def adjacency_matrix(self) -> scipy.sparse.csr_matrix:
        """Symmetric sparse weighted adjacency."""
        if not self._edges:
            return scipy.sparse.csr_matrix((self._n, self._n))
        u, v, w = (np.array(col) for col in zip(*self._edges))
        rows = np.concatenate([u, v])
        cols = np.concatenate([v, u])
        data = np.concatenate([w, w]).astype(float)
        return scipy.sparse.csr_matrix((data, (rows, cols)), shape=(self._n, self._n))

    def relabel(self, permutation: Sequence[int]) -> "Graph":
        """Graph with node ``i`` renamed to ``permutation[i]``."""
        if sorted(permutation) != list(range(self._n)):
            raise GraphDomainError("relabeling must be a permutation of 0..n-1")
        return Graph(self._n, ((permutation[u], permutation[v], w) for u, v, w in self._edges))

    def subgraph(self, nodes: Sequence[int]) -> "Graph":
        """Induced subgraph; node ``nodes[i]`` becomes ``i``."""
        index = {v: i for i, v in enumerate(nodes)}
        kept = ((index[u], index[v], w) for u, v, w in self._edges if u in index and v in index)
        return Graph(len(nodes), kept)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Graph):
            return NotImplemented
        return self._n == other._n and self._edges == other._edges

    def __hash__(self) -> int:
        return hash((self._n, self._edges))

    def __repr__(self) -> str:
        return f"Graph(n={self._n}, edges={self.num_edges})"


class Laplacian:
    """Dense symmetric Laplacian L = D - W (read-only)."""

    def __init__(self, entries: np.ndarray):
        entries = np.array(entries, dtype=float)
        entries.setflags(write=False)
        self.entries = entries

    @property
    def n(self) -> int:
        return self.entries.shape[0]

    def quadratic_form(self, x: np.ndarray) -> float:
        """xᵀLx"""
        return float(x @ self.entries @ x)

    def validate(self, tolerance: float = 1e-9, psd_tolerance: float = 1e-8) -> List[str]:
        """Return the list of violated Laplacian invariants (empty when valid)."""
        problems = []
        L = self.entries
        if self.n == 0:
            return problems
        max_degree = max(float(np.max(np.diag(L))), 1.0)
        if np.max(np.abs(L.sum(axis=1))) > tolerance * max_degree:
            problems.append("row sums are not zero")
        if not np.allclose(L, L.T, atol=tolerance * max_degree):
            problems.append("matrix is not symmetric")
        off_diagonal = L - np.diag(np.diag(L))
        if np.any(off_diagonal > tolerance * max_degree):
            problems.append("positive off-diagonal entry")
        if float(np.linalg.eigvalsh(L)[0]) < -psd_tolerance * max_degree:
            problems.append("matrix is not positive semidefinite")
        return problems

    def is_valid(self) -> bool:
        return not self.validate()


class Fingerprint(NamedTuple):
    """Isomorphism-invariant summary; equality is necessary for isomorphism."""

    degrees: Tuple[int, ...]
    spectrum: Tuple[float, ...]
    edge_count: int


def laplacian(g: Graph) -> Laplacian:
    """Build L = D - W for ``g``."""
    L = np.zeros((g.n, g.n))
    if g.edges:
        u, v, w = (np.array(col) for col in zip(*g.edges))
        u = u.astype(int)
        v = v.astype(int)
        L[u, v] -= w
        L[v, u] -= w
        np.add.at(L, (u, u), w)
        np.add.at(L, (v, v), w)
    return Laplacian(L)


def fingerprint(g: Graph) -> Fingerprint:
    """Sorted degrees, Laplacian spectrum rounded to 1e-6, and edge count."""
    spectrum = np.linalg.eigvalsh(laplacian(g).entries) if g.n else np.array([])
    # + 0.0 folds -0.0 into 0.0
    rounded = tuple(float(x) + 0.0 for x in np.round(spectrum, 6))
    return Fingerprint(tuple(sorted(int(d) for d in g.degrees)), rounded, g.num_edges)


def connected_components(g: Graph) -> List[List[int]]:
    """Node lists of each component, ordered by their smallest node."""
    if g.n == 0:
        return []
    count, membership = _sparse_components(g.adjacency_matrix(), directed=False)
    groups: List[List[int]] = [[] for _ in range(count)]
    for v, c in enumerate(membership):
        groups[c].append(v)
    return sorted(groups, key=lambda nodes: nodes[0])


def is_connected(g: Graph) -> bool:
    return g.n > 0 and len(connected_components(g)) == 1


def load_edge_list(text: Union[bytes, str]) -> Graph:
    """Parse edge-list text.

    Each non-comment line is ``u v`` or ``u v w``. External ids are compacted
    to 0..n-1 in first-appearance order, a missing weight means 1.0, and
    repeated pairs (in either orientation) are merged by summing weights.

    Args:
        text: Edge-list bytes or string

    Returns:
        Graph: The parsed graph with ``labels`` holding the external ids

    Raises:
        GraphParseError: On malformed lines or self-loops (with line number)
        GraphDomainError: On non-positive weights
    """
    if isinstance(text, bytes):
        try:
            text = text.decode("utf-8")
        except UnicodeDecodeError as e:
            raise GraphParseError(f"input is not UTF-8: {e}") from e

    index: Dict[str, int] = {}
    labels: List[str] = []
    weights: Dict[Tuple[int, int], float] = {}

    def node_id(label: str) -> int:
        if label not in index:
            index[label] = len(labels)
            labels.append(label)
        return index[label]

    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if line.startswith(NODES_DIRECTIVE):
            count = line[len(NODES_DIRECTIVE):].strip()
            if not count.isdigit():
                raise GraphParseError(f"bad node directive {raw!r}", lineno)
            for i in range(int(count)):
                node_id(str(i))
            continue
        if not line or line.startswith("#"):
            continue
        parts = line.split()
        if len(parts) not in (2, 3):
            raise GraphParseError(f"expected 'u v' or 'u v w', got {raw!r}", lineno)
        if parts[0] == parts[1]:
            raise GraphParseError(f"self-loop on node {parts[0]} rejected", lineno)
        w = 1.0
        if len(parts) == 3:
            try:
                w = float(parts[2])
            except ValueError as e:
                raise GraphParseError(f"weight {parts[2]!r} is not a number", lineno) from e
            if math.isnan(w) or math.isinf(w):
                raise GraphParseError(f"weight {parts[2]!r} is not finite", lineno)
            if w <= 0:
                raise GraphDomainError(f"line {lineno}: weight must be positive, got {w}")
        u, v = node_id(parts[0]), node_id(parts[1])
        key = (u, v) if u < v else (v, u)
        weights[key] = weights.get(key, 0.0) + w

    return Graph(len(labels), ((u, v, w) for (u, v), w in weights.items()), labels=labels)


def _format_weight(w: float) -> str:
    text = repr(float(w))
    return text[:-2] if text.endswith(".0") else text


def write_edge_list(g: Graph) -> bytes:
    """Serialize ``g`` so that ``load_edge_list`` gives back an equal graph.

    Edges are written in lexicographic order with the weight omitted when it
    is exactly 1. A node directive is prepended only when first-appearance
    order would otherwise renumber nodes or drop isolated ones.
    """
    lines = []
    seen: List[int] = []
    marked = set()
    for u, v, _ in g.edges:
        for x in (u, v):
            if x not in marked:
                marked.add(x)
                seen.append(x)
    if seen != list(range(g.n)):
        lines.append(f"{NODES_DIRECTIVE} {g.n}")
    for u, v, w in g.edges:
        lines.append(f"{u} {v}" if w == 1.0 else f"{u} {v} {_format_weight(w)}")
    return "".join(line + "\n" for line in lines).encode("utf-8")
