# app/utils/array_helpers.py
"""
Array helper functions shared by the index, grouping and synth services
"""
import numpy as np
from scipy.spatial.distance import cdist, pdist, squareform


def first_occurrence_codes(labels: np.ndarray) -> np.ndarray:
    """
    Map arbitrary labels to 0..k-1 in order of first appearance

    Args:
        labels: 1-D array of hashable numeric labels

    Returns:
        int64 array of the same length
    """
    _, first_index, inverse = np.unique(labels, return_index=True, return_inverse=True)
    order = np.argsort(first_index, kind="stable")
    rank = np.empty_like(order)
    rank[order] = np.arange(order.size)
    return rank[inverse.ravel()].astype(np.int64)


def one_hot(labels: np.ndarray, k: int) -> np.ndarray:
    """n x k indicator matrix of cluster membership"""
    indicator = np.zeros((labels.size, k), dtype=np.float64)
    indicator[np.arange(labels.size), labels] = 1.0
    return indicator


def cluster_barycenters(x: np.ndarray, labels: np.ndarray, k: int) -> np.ndarray:
    """
    Per-cluster mean rows

    Args:
        x: n x d data
        labels: canonical labels 0..k-1
        k: cluster count

    Returns:
        k x d matrix of barycenters
    """
    sizes = np.bincount(labels, minlength=k).astype(np.float64)
    sums = one_hot(labels, k).T @ x
    return sums / sizes[:, None]


def distance_matrix(x: np.ndarray, metric: str = "euclidean") -> np.ndarray:
    """Dense n x n pairwise distance matrix"""
    if x.shape[0] == 1:
        return np.zeros((1, 1))
    return squareform(pdist(x, metric=metric))


def condensed_distances(x: np.ndarray) -> np.ndarray:
    """Euclidean distances of all unordered pairs, scipy condensed order"""
    return pdist(x, metric="euclidean")


def distances_to(x: np.ndarray, points: np.ndarray) -> np.ndarray:
    """Euclidean distances from every row of x to every probe point (n x q)"""
    return cdist(x, np.atleast_2d(points), metric="euclidean")


def rms_row_distances(rows: np.ndarray) -> np.ndarray:
    """
    Root-mean-square difference between every pair of rows

    Cells that are NaN in either row of a pair are skipped for that pair.
    Pairs that share no observed cell get NaN.
    """
    m = rows.shape[0]
    out = np.zeros((m, m))
    observed = ~np.isnan(rows)
    for i in range(m):
        for j in range(i + 1, m):
            shared = observed[i] & observed[j]
            if not shared.any():
                value = np.nan
            else:
                diff = rows[i, shared] - rows[j, shared]
                value = float(np.sqrt(np.mean(diff * diff)))
            out[i, j] = out[j, i] = value
    return out
