"""Symmetrized kNN affinity graphs with RBF edge weights.

Construction is exact brute force over all pairs, which is the right trade
at a few thousand samples. Distances are computed once per unordered pair,
so the weight matrix is symmetric to the last bit rather than by averaging.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import scipy.sparse as sp
from scipy.spatial.distance import cdist

from .errors import ConfigError, DataError, NumericalError


def rbf_weight(x_i: np.ndarray, x_j: np.ndarray, sigma: float) -> float:
    """Gaussian similarity exp(-||x_i - x_j||^2 / sigma^2), in (0, 1]."""
    xi = np.asarray(x_i, dtype=np.float64)
    xj = np.asarray(x_j, dtype=np.float64)
    if xi.ndim != 1 or xi.shape != xj.shape:
        raise ConfigError(
            f"rbf_weight expects two vectors of equal length, "
            f"got shapes {xi.shape} and {xj.shape}"
        )
    if not sigma > 0:
        raise ConfigError(f"sigma must be positive, got {sigma}")
    d2 = float(np.sum((xi - xj) ** 2))
    return float(np.exp(-d2 / sigma**2))


@dataclass(frozen=True)
class Graph:
    """Sparse symmetric affinity matrix over n samples.

    ``weights`` has a zero diagonal and identical (i, j) and (j, i) entries.
    Neighbor lists are the nonzero pattern of each row, sorted by index.
    """

    n: int
    k: int
    sigma: float
    weights: sp.csr_matrix = field(repr=False)

    def neighbors(self, i: int) -> np.ndarray:
        w = self.weights
        return w.indices[w.indptr[i] : w.indptr[i + 1]]

    def neighbor_weights(self, i: int) -> np.ndarray:
        w = self.weights
        return w.data[w.indptr[i] : w.indptr[i + 1]]

    def neighbor_lists(self) -> list[np.ndarray]:
        return [self.neighbors(i) for i in range(self.n)]

    def degrees(self) -> np.ndarray:
        return np.asarray(self.weights.sum(axis=1)).ravel()


@dataclass(frozen=True)
class LaplacianBundle:
    """Degree vector plus the two Laplacian-style operators used downstream."""

    degrees: np.ndarray
    laplacian: sp.csr_matrix = field(repr=False)
    normalized_similarity: sp.csr_matrix = field(repr=False)


def build_knn_graph(features: np.ndarray, k: int, sigma: float) -> Graph:
    """Directed k-nearest-neighbor selection symmetrized by union.

    Every vertex contributes edges to its k nearest others (squared
    Euclidean distance, ties broken toward the lower index); an edge exists
    if either endpoint selected the other. Weights are RBF similarities of
    the original distances.
    """
    features = np.asarray(features, dtype=np.float64)
    if features.ndim != 2:
        raise DataError(f"features must be 2-d, got shape {features.shape}")
    n = features.shape[0]
    if not np.all(np.isfinite(features)):
        raise DataError("features contain non-finite values")
    if not 1 <= k <= n - 1:
        raise ConfigError(f"k must satisfy 1 <= k <= n-1 = {n - 1}, got {k}")
    if not sigma > 0:
        raise ConfigError(f"sigma must be positive, got {sigma}")

    d2 = cdist(features, features, metric="sqeuclidean")
    np.fill_diagonal(d2, np.inf)
    # stable argsort keeps equal distances ordered by index
    nearest = np.argsort(d2, axis=1, kind="stable")[:, :k]

    rows = np.repeat(np.arange(n), k)
    cols = nearest.ravel()
    lo = np.minimum(rows, cols)
    hi = np.maximum(rows, cols)
    pair_ids = np.unique(lo * n + hi)
    i = pair_ids // n
    j = pair_ids % n

    w = np.exp(-d2[i, j] / sigma**2)
    if np.any(w <= 0.0):
        worst = float(np.sqrt(d2[i, j].max()))
        raise NumericalError(
            f"edge weight underflowed to zero (distance up to {worst:.3g} "
            f"with sigma={sigma}); increase sigma"
        )

    weights = sp.coo_matrix(
        (np.concatenate([w, w]), (np.concatenate([i, j]), np.concatenate([j, i]))),
        shape=(n, n),
    ).tocsr()
    weights.sort_indices()
    return Graph(n=n, k=k, sigma=sigma, weights=weights)


def laplacians(graph: Graph) -> LaplacianBundle:
    """Degrees, combinatorial Laplacian D - W, and D^-1/2 W D^-1/2."""
    degrees = graph.degrees()
    if np.any(degrees <= 0):
        isolated = np.flatnonzero(degrees <= 0).tolist()
        raise NumericalError(f"vertices {isolated} have zero degree")
    laplacian = (sp.diags(degrees) - graph.weights).tocsr()
    inv_sqrt = 1.0 / np.sqrt(degrees)
    sim = graph.weights.tocoo(copy=True)
    # scale each entry by the product once so (i, j) and (j, i) match exactly
    sim.data = sim.data * (inv_sqrt[sim.row] * inv_sqrt[sim.col])
    return LaplacianBundle(degrees, laplacian, sim.tocsr())


def export_edge_list(graph: Graph, path: str | Path) -> None:
    """Write one ``i j weight`` line per undirected edge, with i < j."""
    coo = graph.weights.tocoo()
    with open(path, "w") as handle:
        for i, j, w in zip(coo.row, coo.col, coo.data):
            if i < j:
                handle.write(f"{i} {j} {w:.17g}\n")
