"""Seeded graph generators for the synthetic network families.

Barabási–Albert, 2-D grid, random ring (ring lattice plus shortcuts),
random regular and G(n, m) Erdős–Rényi graphs. Every random generator is a
deterministic function of its parameters and a 64-bit seed.
"""

from typing import List, Set, Tuple

import numpy as np
from loguru import logger

from ..utils.errors import GenerationError, ParameterError
from .core import Graph

MAX_PAIRING_RESTARTS = 1000


def _rng(seed: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(int(seed)))


def barabasi_albert(n: int, m: int, seed: int) -> Graph:
    """Preferential-attachment graph grown from an m-node clique.

    Every added node links to exactly ``m`` distinct existing nodes chosen
    with probability proportional to their current degree, so
    ``|E| = C(m, 2) + m (n - m)``.

    Raises:
        ParameterError: Unless 1 <= m < n
    """
    if not 1 <= m < n:
        raise ParameterError(f"Barabási–Albert needs 1 <= m < n, got m={m}, n={n}")
    rng = _rng(seed)
    edges: List[Tuple[int, int]] = [(u, v) for u in range(m) for v in range(u + 1, m)]
    # Each node appears once per incident edge: sampling from this list is
    # sampling proportional to degree.
    endpoints: List[int] = [x for e in edges for x in e]

    for new in range(m, n):
        targets: Set[int] = set()
        chosen: List[int] = []
        while len(chosen) < m:
            if endpoints:
                t = endpoints[int(rng.integers(len(endpoints)))]
            else:
                t = int(rng.integers(new))
            if t not in targets:
                targets.add(t)
                chosen.append(t)
        for t in chosen:
            edges.append((t, new))
            endpoints.extend((t, new))

    return Graph(n, edges)


def grid2d(rows: int, cols: int) -> Graph:
    """4-neighbor lattice; node (r, c) has id ``r * cols + c``."""
    if rows < 1 or cols < 1:
        raise ParameterError(f"grid needs positive dimensions, got {rows}x{cols}")
    edges = []
    for r in range(rows):
        for c in range(cols):
            v = r * cols + c
            if c + 1 < cols:
                edges.append((v, v + 1))
            if r + 1 < rows:
                edges.append((v, v + cols))
    return Graph(rows * cols, edges)


def random_ring(n: int, k_near: int, p_shortcut: float, seed: int) -> Graph:
    """Ring lattice with random shortcuts added on top (nothing is rewired).

    Each node links to ``k_near / 2`` neighbors on either side. Every lattice
    edge ``(u, u + j)`` then spawns, with probability ``p_shortcut``, one
    shortcut from ``u`` to a uniformly random node; shortcuts that would
    duplicate an edge or form a self-loop are skipped.

    Raises:
        ParameterError: If k_near is odd, not below n, or p is not a probability
    """
    if k_near < 2 or k_near % 2 or k_near >= n:
        raise ParameterError(f"ring needs an even 2 <= k_near < n, got k_near={k_near}, n={n}")
    if not 0.0 <= p_shortcut <= 1.0:
        raise ParameterError(f"shortcut probability {p_shortcut} outside [0, 1]")
    rng = _rng(seed)
    lattice = [(u, (u + j) % n) for u in range(n) for j in range(1, k_near // 2 + 1)]
    present = {(min(u, v), max(u, v)) for u, v in lattice}
    edges = list(present)

    skipped = 0
    for u, _ in lattice:
        if rng.random() >= p_shortcut:
            continue
        w = int(rng.integers(n))
        key = (min(u, w), max(u, w))
        if w == u or key in present:
            skipped += 1
            continue
        present.add(key)
        edges.append(key)
    logger.debug(f"random_ring n={n}: {len(edges) - len(lattice)} shortcuts, {skipped} skipped")
    return Graph(n, edges)


def random_regular(n: int, d: int, seed: int) -> Graph:
    """d-regular simple graph from the pairing model.

    Stubs are shuffled and paired; a pairing with a self-loop or a repeated
    pair is thrown away and drawn again.

    Raises:
        ParameterError: If n * d is odd or d >= n
        GenerationError: After more than 1000 rejected pairings
    """
    if d < 0 or d >= n:
        raise ParameterError(f"regular graph needs 0 <= d < n, got d={d}, n={n}")
    if (n * d) % 2:
        raise ParameterError(f"n * d must be even, got n={n}, d={d}")
    rng = _rng(seed)
    stubs = np.repeat(np.arange(n), d)

    for attempt in range(MAX_PAIRING_RESTARTS + 1):
        rng.shuffle(stubs)
        pairs = stubs.reshape(-1, 2)
        u = np.minimum(pairs[:, 0], pairs[:, 1])
        v = np.maximum(pairs[:, 0], pairs[:, 1])
        if np.any(u == v):
            continue
        keys = u.astype(np.int64) * n + v
        if np.unique(keys).size != keys.size:
            continue
        logger.debug(f"random_regular n={n}, d={d}: accepted pairing after {attempt} restarts")
        return Graph(n, zip(u.tolist(), v.tolist()))

    raise GenerationError(
        f"no simple {d}-regular pairing on {n} nodes after {MAX_PAIRING_RESTARTS} restarts"
    )


def _pair_from_index(index: np.ndarray, n: int) -> Tuple[np.ndarray, np.ndarray]:
    # Pairs (u, v), u < v, enumerated row by row: row u starts at u*n - u(u+1)/2.
    rows = np.arange(n, dtype=np.int64)
    starts = rows * n - rows * (rows + 1) // 2
    u = np.searchsorted(starts, index, side="right") - 1
    v = index - starts[u] + u + 1
    return u, v


def erdos_renyi_gnm(n: int, m_edges: int, seed: int) -> Graph:
    """Uniform graph with exactly ``m_edges`` distinct edges.

    Raises:
        ParameterError: If m_edges exceeds C(n, 2)
    """
    total = n * (n - 1) // 2
    if not 0 <= m_edges <= total:
        raise ParameterError(f"G(n, m) needs 0 <= m <= {total}, got m={m_edges}")
    if m_edges == 0:
        return Graph(n)
    rng = _rng(seed)
    index = np.sort(rng.choice(total, size=m_edges, replace=False))
    u, v = _pair_from_index(index.astype(np.int64), n)
    return Graph(n, zip(u.tolist(), v.tolist()))


def degree_ccdf(g: Graph) -> Tuple[np.ndarray, np.ndarray]:
    """Empirical complementary CDF: distinct degrees k and P[K > k]."""
    degrees = g.degrees
    ks = np.unique(degrees)
    ccdf = np.array([(degrees > k).mean() for k in ks]) if g.n else np.array([])
    return ks, ccdf


def ccdf_loglog_slope(g: Graph, k_min: int = 1) -> float:
    """Least-squares slope of log P[K > k] against log k for k >= k_min."""
    ks, ccdf = degree_ccdf(g)
    mask = (ks >= max(k_min, 1)) & (ccdf > 0)
    if mask.sum() < 2:
        raise ParameterError("not enough distinct degrees to fit a CCDF slope")
    slope, _ = np.polyfit(np.log(ks[mask]), np.log(ccdf[mask]), 1)
    return float(slope)


def low_degree_fraction(g: Graph, k: int = 2) -> float:
    """Fraction of nodes with degree <= k."""
    return float((g.degrees <= k).mean()) if g.n else 0.0
