"""Leading Laplacian eigenvectors, the subspace coarsening tries to preserve."""

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from ..graph.core import Laplacian
from ..utils.errors import NumericError, ParameterError


@dataclass(frozen=True)
class SpectralBasis:
    """First ``k`` eigenpairs of a Laplacian, ascending eigenvalue order."""

    k: int
    vectors: np.ndarray
    values: np.ndarray

    def truncate(self, k: int) -> "SpectralBasis":
        """Keep only the first ``k`` eigenpairs."""
        if not 1 <= k <= self.k:
            raise ParameterError(f"cannot truncate a {self.k}-dimensional basis to {k}")
        return SpectralBasis(k, self.vectors[:, :k], self.values[:k])


def spectral_basis(L: Laplacian, k: int) -> SpectralBasis:
    """Compute the first ``k`` eigenpairs of a symmetric Laplacian.

    Each eigenvector is signed so that its largest-magnitude entry (the first
    one on ties) is positive.

    Args:
        L: Laplacian to decompose
        k: Subspace dimension, 1 <= k <= n

    Returns:
        SpectralBasis: Orthonormal eigenvectors as columns with their eigenvalues

    Raises:
        ParameterError: If k is outside 1..n
        NumericError: If the eigensolver fails
    """
    n = L.n
    if not 1 <= k <= n:
        raise ParameterError(f"subspace dimension must satisfy 1 <= k <= {n}, got {k}")
    try:
        values, vectors = scipy.linalg.eigh(L.entries, subset_by_index=[0, k - 1])
    except (np.linalg.LinAlgError, ValueError) as e:
        raise NumericError(f"eigendecomposition of a {n}x{n} Laplacian failed: {e}") from e

    pivots = np.argmax(np.abs(vectors), axis=0)
    signs = np.sign(vectors[pivots, np.arange(k)])
    signs[signs == 0] = 1.0
    vectors = vectors * signs
    vectors.setflags(write=False)
    values.setflags(write=False)
    return SpectralBasis(k, vectors, values)
