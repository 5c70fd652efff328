"""Discretized spheres with nearest-neighbour adjacency, and connected components on them."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import sparse
from scipy.sparse.csgraph import connected_components
from scipy.spatial import cKDTree
from scipy.stats import norm, qmc

DEFAULT_COUNT_2D = 4096
DEFAULT_COUNT_ND = 20000
DEFAULT_NEIGHBORS = 8


@dataclass(frozen=True, eq=False)
class SphereSample:
    """Unit directions (rows) with a symmetric k-nearest-neighbour graph."""

    directions: np.ndarray
    adjacency: sparse.csr_matrix
    neighbors: int = DEFAULT_NEIGHBORS

    @property
    def dimension(self) -> int:
        return self.directions.shape[1]

    def __len__(self) -> int:
        return self.directions.shape[0]

    def points(self, radius: float) -> np.ndarray:
        return self.directions * radius

    @property
    def edges(self) -> np.ndarray:
        """Undirected edges ``(i, j)`` with ``i < j``."""
        coo = sparse.triu(self.adjacency, k=1).tocoo()
        order = np.lexsort((coo.col, coo.row))
        return np.stack([coo.row[order], coo.col[order]], axis=1)

    def nearest(self, directions: np.ndarray) -> np.ndarray:
        d = np.atleast_2d(directions)
        d = d / np.linalg.norm(d, axis=1, keepdims=True)
        _, idx = cKDTree(self.directions).query(d)
        return np.asarray(idx)


def _symmetric_knn(directions: np.ndarray, k: int) -> sparse.csr_matrix:
    m = directions.shape[0]
    k = min(k, m - 1)
    if k <= 0:
        return sparse.csr_matrix((m, m), dtype=bool)
    _, idx = cKDTree(directions).query(directions, k=k + 1)
    rows = np.repeat(np.arange(m), k)
    cols = idx[:, 1:].ravel()
    a = sparse.csr_matrix((np.ones(rows.size, dtype=bool), (rows, cols)), shape=(m, m))
    a = (a + a.T).tocsr()
    a.setdiag(False)
    a.eliminate_zeros()
    return a


def circle_sample(count: int = DEFAULT_COUNT_2D, neighbors: int = DEFAULT_NEIGHBORS) -> SphereSample:
    """Uniform angles ``2*pi*j/count``; neighbours are the ``neighbors/2`` closest on each side."""
    theta = 2.0 * np.pi * np.arange(count) / count
    dirs = np.stack([np.cos(theta), np.sin(theta)], axis=1)
    half = max(1, neighbors // 2)
    half = min(half, (count - 1) // 2) if count > 2 else 1
    idx = np.arange(count)
    rows, cols = [], []
    for off in range(1, half + 1):
        rows += [idx, idx]
        cols += [(idx + off) % count, (idx - off) % count]
    rows = np.concatenate(rows)
    cols = np.concatenate(cols)
    keep = rows != cols
    a = sparse.csr_matrix(
        (np.ones(keep.sum(), dtype=bool), (rows[keep], cols[keep])), shape=(count, count)
    )
    return SphereSample(dirs, a, 2 * half)


def quasi_random_sample(dimension: int, count: int = DEFAULT_COUNT_ND,
                        neighbors: int = DEFAULT_NEIGHBORS, seed: int = 0) -> SphereSample:
    """Scrambled Halton points pushed to the sphere through the normal quantile.

    The signed coordinate axes are always included so axis-aligned directions are
    represented exactly.
    """
    axes = np.concatenate([np.eye(dimension), -np.eye(dimension)])
    rest = max(count - axes.shape[0], 0)
    u = qmc.Halton(d=dimension, scramble=True, seed=seed).random(rest)
    u = np.clip(u, 1e-12, 1 - 1e-12)
    g = norm.ppf(u)
    g /= np.linalg.norm(g, axis=1, keepdims=True)
    dirs = np.concatenate([axes, g])
    return SphereSample(dirs, _symmetric_knn(dirs, neighbors), neighbors)


def sphere_sample(dimension: int, count: int | None = None,
                  neighbors: int = DEFAULT_NEIGHBORS) -> SphereSample:
    if dimension == 1:
        dirs = np.array([[-1.0], [1.0]])
        return SphereSample(dirs, sparse.csr_matrix((2, 2), dtype=bool), 0)
    if dimension == 2:
        return circle_sample(count or DEFAULT_COUNT_2D, neighbors)
    return quasi_random_sample(dimension, count or DEFAULT_COUNT_ND, neighbors)


def components(adjacency: sparse.csr_matrix, mask: np.ndarray) -> np.ndarray:
    """Component label per point of the subgraph induced by ``mask``; ``-1`` outside it.

    Labels are numbered in order of each component's smallest point index.
    """
    labels = np.full(mask.shape[0], -1, dtype=int)
    idx = np.flatnonzero(mask)
    if idx.size == 0:
        return labels
    sub = adjacency[idx][:, idx]
    _, raw = connected_components(sub, directed=False)
    # renumber by first occurrence for reproducible ids
    _, first = np.unique(raw, return_index=True)
    order = np.argsort(first)
    remap = np.empty_like(order)
    remap[order] = np.arange(order.size)
    labels[idx] = remap[raw]
    return labels


def closure(adjacency: sparse.csr_matrix, members: np.ndarray) -> np.ndarray:
    """Indices of ``members`` together with all their graph neighbours, sorted."""
    m = adjacency.shape[0]
    ind = np.zeros(m, dtype=bool)
    ind[members] = True
    reach = adjacency[members].indices if members.size else np.array([], dtype=int)
    ind[reach] = True
    return np.flatnonzero(ind)
