"""Contraction sets, coarse graph construction and local variation costs."""

from dataclasses import dataclass
from typing import Iterable, List, Sequence, Tuple

import numpy as np
import scipy.sparse
from scipy.sparse.csgraph import connected_components

from ..graph.core import Graph
from ..utils.errors import ContractError
from .basis import SpectralBasis


@dataclass(frozen=True)
class ContractionLevel:
    """One coarsening step: fine node -> coarse node.

    Coarse ids are assigned in order of each set's smallest fine node, so a
    level is fully determined by its partition.
    """

    membership: Tuple[int, ...]
    n_fine: int
    n_coarse: int
    sets: Tuple[Tuple[int, ...], ...]

    @classmethod
    def from_sets(cls, n_fine: int, sets: Iterable[Sequence[int]]) -> "ContractionLevel":
        """Build a level from disjoint contraction sets; uncovered nodes stay singletons."""
        owner = [-1] * n_fine
        groups: List[List[int]] = []
        for nodes in sets:
            group = sorted(int(v) for v in nodes)
            for v in group:
                if owner[v] != -1:
                    raise ContractError(f"node {v} appears in two contraction sets")
                owner[v] = len(groups)
            groups.append(group)
        for v in range(n_fine):
            if owner[v] == -1:
                owner[v] = len(groups)
                groups.append([v])
        return cls.from_membership(owner)

    @classmethod
    def from_membership(cls, membership: Sequence[int]) -> "ContractionLevel":
        """Build a level from a fine -> coarse map.

        Coarse ids are renumbered by first appearance, which is the order of
        each set's smallest fine node.
        """
        remap = {}
        canonical = []
        for c in membership:
            if c not in remap:
                remap[c] = len(remap)
            canonical.append(remap[c])
        sets: List[List[int]] = [[] for _ in remap]
        for v, c in enumerate(canonical):
            sets[c].append(v)
        return cls(tuple(canonical), len(canonical), len(sets), tuple(tuple(s) for s in sets))

    @classmethod
    def identity(cls, n: int) -> "ContractionLevel":
        return cls.from_membership(range(n))

    @property
    def reduction_ratio(self) -> float:
        """r = 1 - n_coarse / n_fine"""
        return 1.0 - self.n_coarse / self.n_fine if self.n_fine else 0.0

    def compose(self, following: "ContractionLevel") -> "ContractionLevel":
        """The level equivalent to applying ``self`` then ``following``."""
        if following.n_fine != self.n_coarse:
            raise ContractError(
                f"cannot compose: {self.n_coarse} coarse nodes vs {following.n_fine} fine nodes"
            )
        return ContractionLevel.from_membership([following.membership[c] for c in self.membership])

    def lifting_matrix(self) -> np.ndarray:
        """C⁺: binary N x n membership matrix."""
        P = np.zeros((self.n_fine, self.n_coarse))
        P[np.arange(self.n_fine), self.membership] = 1.0
        return P

    def coarsening_matrix(self) -> np.ndarray:
        """C: n x N with C[r, i] = 1 / |set r| for i in set r."""
        sizes = np.array([len(s) for s in self.sets], dtype=float)
        return self.lifting_matrix().T / sizes[:, None]

    def project(self, x: np.ndarray) -> np.ndarray:
        """Π x = C⁺ C x: replace each entry by the mean over its contraction set."""
        membership = np.asarray(self.membership)
        sizes = np.bincount(membership, minlength=self.n_coarse)
        means = np.bincount(membership, weights=x, minlength=self.n_coarse) / sizes
        return means[membership]


def disconnected_sets(g: Graph, level: ContractionLevel) -> List[int]:
    """Coarse ids whose contraction set does not induce a connected subgraph.

    Components are taken over the edges that stay inside a set, so every set
    is connected exactly when it holds a single component label.
    """
    if level.n_coarse == level.n_fine:
        return []
    membership = np.asarray(level.membership)
    A = g.adjacency_matrix().tocoo()
    inside = membership[A.row] == membership[A.col]
    internal = scipy.sparse.coo_matrix(
        (A.data[inside], (A.row[inside], A.col[inside])), shape=(g.n, g.n)
    )
    count, labels = connected_components(internal, directed=False)
    if count == level.n_coarse:
        return []
    low = np.full(level.n_coarse, g.n)
    high = np.full(level.n_coarse, -1)
    np.minimum.at(low, membership, labels)
    np.maximum.at(high, membership, labels)
    return np.flatnonzero(low != high).tolist()


def contract(g: Graph, level: ContractionLevel) -> Graph:
    """Collapse each contraction set of ``level`` into a single node.

    Superedge weights are the summed weights of the fine edges crossing
    between two sets; edges inside a set vanish. The result's Laplacian is
    (C⁺)ᵀ L C⁺ with the self-loop contributions removed.

    Raises:
        ContractError: If the level does not fit ``g`` or a set is disconnected
    """
    if level.n_fine != g.n:
        raise ContractError(f"level expects {level.n_fine} nodes, graph has {g.n}")
    broken = disconnected_sets(g, level)
    if broken:
        r = broken[0]
        raise ContractError(f"contraction set {r} {list(level.sets[r])[:10]} is not connected")

    if not g.edges:
        return Graph(level.n_coarse)
    membership = np.asarray(level.membership)
    u, v, w = (np.array(col) for col in zip(*g.edges))
    cu = membership[u.astype(int)]
    cv = membership[v.astype(int)]
    crossing = cu != cv
    lo = np.minimum(cu, cv)[crossing]
    hi = np.maximum(cu, cv)[crossing]
    summed = scipy.sparse.coo_matrix(
        (w[crossing].astype(float), (lo, hi)), shape=(level.n_coarse, level.n_coarse)
    ).tocsr()
    summed.sum_duplicates()
    coo = summed.tocoo()
    return Graph(level.n_coarse, zip(coo.row.tolist(), coo.col.tolist(), coo.data.tolist()))


def _edge_energy(g: Graph, basis: SpectralBasis) -> np.ndarray:
    if not g.edges:
        return np.zeros(0)
    u, v, w = (np.array(col) for col in zip(*g.edges))
    U = basis.vectors
    diff = U[u.astype(int)] - U[v.astype(int)]
    return w * np.sum(diff * diff, axis=1)


def edge_variation_costs(g: Graph, basis: SpectralBasis) -> np.ndarray:
    """Cost of contracting each edge, aligned with ``g.edges``.

    cost(i, j) = w_ij * sum_m (u_m[i] - u_m[j])², the energy of the preserved
    subspace that the contraction would collapse.
    """
    return _edge_energy(g, basis)


def neighborhood_variation_costs(g: Graph, basis: SpectralBasis) -> np.ndarray:
    """Cost of contracting each closed neighborhood {v} ∪ Γ(v).

    The summed edge energy around ``v`` divided by |Γ(v)|. Isolated nodes have
    no candidate set and get an infinite cost.
    """
    energy = _edge_energy(g, basis)
    totals = np.zeros(g.n)
    if g.edges:
        u, v, _ = (np.array(col) for col in zip(*g.edges))
        np.add.at(totals, u.astype(int), energy)
        np.add.at(totals, v.astype(int), energy)
    degrees = g.degrees.astype(float)
    costs = np.full(g.n, np.inf)
    nonzero = degrees > 0
    costs[nonzero] = totals[nonzero] / degrees[nonzero]
    return costs


NULL_EIGENVALUE = 1e-9


def scaled_basis(basis: SpectralBasis) -> np.ndarray:
    """U_k Λ_k^{-1/2}, with the null-space columns set to zero.

    Smooth directions weigh more than rough ones, and the constant vector
    carries no variation at all.
    """
    values = np.asarray(basis.values, dtype=float)
    inv_sqrt = np.zeros_like(values)
    keep = values > NULL_EIGENVALUE
    inv_sqrt[keep] = 1.0 / np.sqrt(values[keep])
    return basis.vectors * inv_sqrt


def set_local_variation(g: Graph, B: np.ndarray, nodes: Sequence[int]) -> float:
    """Local variation of contracting ``nodes`` against the scaled basis ``B``.

    L_S keeps the edges inside the set and moves the weight of the edges
    leaving it onto the diagonal twice, which is the Laplacian of the set with
    its boundary folded in. The cost is ||B_Sᵀ L_S B_S||_F / (|S| - 1) with
    B_S the set-centred rows of ``B``.
    """
    idx = np.asarray(sorted(nodes), dtype=int)
    if len(idx) < 2:
        raise ContractError("a contraction set needs at least two nodes")
    return _set_variation(g.adjacency_matrix(), g.weighted_degrees, B, idx)


def _set_variation(
    A: scipy.sparse.csr_matrix, degrees: np.ndarray, B: np.ndarray, idx: np.ndarray
) -> float:
    W = A[idx][:, idx].toarray()
    d = degrees[idx]
    L = np.diag(2.0 * d - W.sum(axis=1)) - W
    rows = B[idx] - B[idx].mean(axis=0)
    return float(np.linalg.norm(rows.T @ L @ rows)) / (len(idx) - 1)


def edge_local_variation_costs(g: Graph, basis: SpectralBasis) -> np.ndarray:
    """Local variation of every edge, aligned with ``g.edges``.

    For a two-node set the general form reduces to
    (d_i + d_j) / 2 * ||b_i - b_j||² with weighted degrees d and rows b of
    the scaled basis, so hubs are expensive to contract.
    """
    if not g.edges:
        return np.zeros(0)
    B = scaled_basis(basis)
    u, v, _ = (np.array(col) for col in zip(*g.edges))
    u = u.astype(int)
    v = v.astype(int)
    d = g.weighted_degrees
    diff = B[u] - B[v]
    return 0.5 * (d[u] + d[v]) * np.sum(diff * diff, axis=1)


def neighborhood_local_variation_costs(g: Graph, basis: SpectralBasis) -> np.ndarray:
    """Local variation of every closed neighborhood; isolated nodes cost inf."""
    B = scaled_basis(basis)
    A = g.adjacency_matrix()
    d = g.weighted_degrees
    costs = np.full(g.n, np.inf)
    for v, nbrs in enumerate(g.neighbor_sets):
        if nbrs:
            costs[v] = _set_variation(A, d, B, np.asarray(sorted({v, *nbrs}), dtype=int))
    return costs
