"""k-means clustering and PCA of entropy trajectories."""

from dataclasses import dataclass
from typing import List, Sequence, Tuple, Union

import numpy as np
import pandas as pd
from loguru import logger
from sklearn.cluster import kmeans_plusplus
from sklearn.decomposition import PCA
from sklearn.metrics import adjusted_rand_score
from sklearn.preprocessing import StandardScaler

from ..utils.config import derive_seed
from ..utils.errors import ParameterError
from .features import FeatureMatrix

DEFAULT_RESTARTS = 50
MAX_ITERATIONS = 300

# Columns whose standard deviation is below this are treated as constant
ZERO_VARIANCE = 1e-12

Features = Union[FeatureMatrix, np.ndarray, Sequence[Sequence[float]]]


def _values(x: Features) -> np.ndarray:
    if isinstance(x, FeatureMatrix):
        return x.values
    return np.atleast_2d(np.asarray(x, dtype=float))


def _columns(x: Features, width: int) -> List[str]:
    if isinstance(x, FeatureMatrix):
        return list(x.columns)
    return [f"x{j}" for j in range(width)]


@dataclass(frozen=True)
class KMeansResult:
    """Best restart of a k-means run."""

    assignments: np.ndarray
    centroids: np.ndarray
    inertia: float
    iterations: int
    restart: int
    history: Tuple[float, ...]


def _squared_distances(data: np.ndarray, centers: np.ndarray) -> np.ndarray:
    return ((data[:, None, :] - centers[None, :, :]) ** 2).sum(axis=2)


def _update_centers(data: np.ndarray, assignments: np.ndarray, centers: np.ndarray) -> np.ndarray:
    """Cluster means; an empty cluster takes the point farthest from its center."""
    k = centers.shape[0]
    updated = centers.copy()
    counts = np.bincount(assignments, minlength=k)
    for j in range(k):
        if counts[j]:
            updated[j] = data[assignments == j].mean(axis=0)
    empty = np.flatnonzero(counts == 0)
    if empty.size:
        distances = _squared_distances(data, updated)[np.arange(len(data)), assignments]
        for j in empty:
            farthest = int(np.argmax(distances))
            logger.debug(f"Reseeding empty cluster {j} from point {farthest}")
            updated[j] = data[farthest]
            distances[farthest] = -1.0
    return updated


def _lloyd(data: np.ndarray, centers: np.ndarray, max_iter: int) -> Tuple[np.ndarray, np.ndarray, float, int, List[float]]:
    """Alternate assignment and mean steps until assignments stop changing.

    Distance ties go to the lowest cluster index.
    """
    distances = _squared_distances(data, centers)
    assignments = np.argmin(distances, axis=1)
    history = [float(distances[np.arange(len(data)), assignments].sum())]
    iterations = 0
    for iterations in range(1, max_iter + 1):
        centers = _update_centers(data, assignments, centers)
        distances = _squared_distances(data, centers)
        updated = np.argmin(distances, axis=1)
        history.append(float(distances[np.arange(len(data)), updated].sum()))
        if np.array_equal(updated, assignments):
            break
        assignments = updated
    inertia = float(distances[np.arange(len(data)), assignments].sum())
    return assignments, centers, inertia, iterations, history


def kmeans(
    x: Features,
    k: int,
    seed: int,
    restarts: int = DEFAULT_RESTARTS,
    max_iter: int = MAX_ITERATIONS,
    standardize: bool = False,
) -> KMeansResult:
    """Lloyd's k-means with k-means++ seeding, best of ``restarts`` by inertia.

    Restart r draws its initial centers from a stream derived from (seed, r),
    so adding restarts never worsens the best inertia. Ties between restarts
    go to the lower restart index.

    Args:
        x: Feature rows
        k: Number of clusters
        seed: Base seed
        restarts: Number of k-means++ initializations
        max_iter: Iteration cap per restart
        standardize: Cluster z-scored columns instead of raw values

    Returns:
        KMeansResult of the best restart

    Raises:
        ParameterError: If k is outside 1..rows or restarts < 1
    """
    data = _values(x)
    rows = data.shape[0]
    if rows < 1:
        raise ParameterError("k-means needs at least one row")
    if not 1 <= k <= rows:
        raise ParameterError(f"k must satisfy 1 <= k <= rows ({rows}), got {k}")
    if restarts < 1:
        raise ParameterError(f"restarts must be at least 1, got {restarts}")
    if standardize:
        data = StandardScaler().fit_transform(data)

    best = None
    for restart in range(restarts):
        state = np.random.RandomState(derive_seed(seed, restart) % (1 << 32))
        centers, _ = kmeans_plusplus(data, n_clusters=k, random_state=state)
        assignments, centroids, inertia, iterations, history = _lloyd(data, centers, max_iter)
        if best is None or inertia < best.inertia:
            best = KMeansResult(
                assignments=assignments,
                centroids=centroids,
                inertia=inertia,
                iterations=iterations,
                restart=restart,
                history=tuple(history),
            )
    logger.info(f"k-means k={k}: best inertia {best.inertia:.6g} from restart {best.restart} of {restarts}")
    return best


@dataclass(frozen=True)
class PCAResult:
    coordinates: np.ndarray
    explained_variance_ratio: np.ndarray
    components: np.ndarray
    columns: Tuple[str, ...]
    dropped: Tuple[str, ...]


def pca(x: Features, components: int = 2, standardize: bool = True) -> PCAResult:
    """Project rows onto the leading principal directions.

    Columns are centered and, by default, scaled to unit variance first.
    Constant columns are dropped with a warning. Each direction is signed so
    that its largest-magnitude loading is positive.

    Raises:
        ParameterError: If components exceeds the usable column count
    """
    data = _values(x)
    names = _columns(x, data.shape[1])
    std = data.std(axis=0)
    keep = std > ZERO_VARIANCE
    dropped = tuple(name for name, k in zip(names, keep) if not k)
    if dropped:
        logger.warning(f"PCA dropped zero-variance columns: {', '.join(dropped)}")
    data = data[:, keep]
    kept = tuple(name for name, k in zip(names, keep) if k)
    if not 1 <= components <= min(len(kept), data.shape[0]):
        raise ParameterError(
            f"cannot extract {components} components from {data.shape[0]} rows x {len(kept)} usable columns"
        )

    if standardize:
        data = StandardScaler().fit_transform(data)
    model = PCA(n_components=components, svd_solver="full")
    coordinates = model.fit_transform(data)
    loadings = model.components_
    pivots = np.argmax(np.abs(loadings), axis=1)
    signs = np.sign(loadings[np.arange(components), pivots])
    signs[signs == 0] = 1.0
    return PCAResult(
        coordinates=coordinates * signs,
        explained_variance_ratio=model.explained_variance_ratio_,
        components=loadings * signs[:, None],
        columns=kept,
        dropped=dropped,
    )


def adjusted_rand(labels_true: Sequence, labels_pred: Sequence) -> float:
    return float(adjusted_rand_score(labels_true, labels_pred))


def cluster_composition(assignments: Sequence[int], labels: Sequence[str]) -> pd.DataFrame:
    """Graph counts per family (rows) and cluster (columns)."""
    table = pd.crosstab(
        pd.Series(list(labels), name="family"),
        pd.Series(np.asarray(assignments), name="cluster"),
    )
    return table.sort_index()
