# app/services/index_service.py
"""
Internal clustering validity indices and the space x partition score matrix.

Each index takes an embedding and a partition and returns an IndexValue with
both the raw value and the orientation-normalized one (lower-is-better
indices are negated). Distances are dense O(n^2).
"""
import logging
from concurrent.futures import Executor
from typing import Callable, Dict, Optional, Sequence, Tuple

import numpy as np

from app.models.index import IndexId, IndexValue
from app.models.score import MissingCell, ScoreMatrix
from app.models.trial import EmbeddingMatrix, Partition, TrialBundle
from app.utils.array_helpers import (
    cluster_barycenters,
    condensed_distances,
    distance_matrix,
    distances_to,
    one_hot,
)
from app.utils.exceptions import (
    AceError,
    ErrorKind,
    raise_degenerate_k,
    raise_error,
    raise_invalid_params,
    raise_shape_mismatch,
)

logger = logging.getLogger(__name__)

DEFAULT_CDBW_REPS = 10
DEFAULT_SHRINK_FACTORS = (0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8)

# Relative tolerance for "exactly zero" scatter / distance tests
_REL_TOL = 1e-12


def _prepare(z: EmbeddingMatrix, rho: Partition, upper_k: bool) -> Tuple[np.ndarray, np.ndarray, int, int]:
    if rho.n != z.n:
        raise_shape_mismatch(f"partition has {rho.n} labels for {z.n} embedding rows")
    n, k = z.n, rho.k
    if k < 2:
        raise_degenerate_k(k, n, "K >= 2")
    if upper_k and k > n - 1:
        raise_degenerate_k(k, n)
    return z.values, rho.labels, n, k


def _within_cluster_variances(x: np.ndarray, labels: np.ndarray, k: int) -> np.ndarray:
    """Per-cluster diagonal covariance (k x d); singleton clusters get zeros."""
    out = np.zeros((k, x.shape[1]))
    for c in range(k):
        pts = x[labels == c]
        if pts.shape[0] > 1:
            out[c] = np.var(pts, axis=0, ddof=1)
    return out


class IndexService:
    @staticmethod
    def silhouette(z: EmbeddingMatrix, rho: Partition, metric: str = "euclidean") -> IndexValue:
        """
        Mean over clusters of the mean silhouette s(i) of their members.

        Singleton clusters contribute s(i) = 0.
        """
        x, labels, n, k = _prepare(z, rho, upper_k=True)
        if metric == "cosine":
            if np.any(np.linalg.norm(x, axis=1) == 0):
                raise_error(ErrorKind.NON_FINITE_VALUE, "cosine distance is undefined for zero vectors")
            index_id = IndexId.SILHOUETTE_COSINE
        elif metric == "euclidean":
            index_id = IndexId.SILHOUETTE_EUCLIDEAN
        else:
            raise_invalid_params(f"unsupported silhouette metric '{metric}'")

        dist = np.clip(distance_matrix(x, metric), 0.0, None)
        sizes = rho.cluster_sizes().astype(np.float64)
        sums = dist @ one_hot(labels, k)
        rows = np.arange(n)
        own_size = sizes[labels]

        with np.errstate(divide="ignore", invalid="ignore"):
            a = sums[rows, labels] / (own_size - 1.0)
            means = sums / sizes
            means[rows, labels] = np.inf
            b = means.min(axis=1)
            denom = np.maximum(a, b)
            s = np.where((own_size > 1) & (denom > 0), (b - a) / denom, 0.0)

        per_cluster = np.bincount(labels, weights=s, minlength=k) / sizes
        raw = float(np.clip(per_cluster.mean(), -1.0, 1.0))
        return IndexValue.from_raw(index_id, raw)

    @staticmethod
    def calinski_harabasz(z: EmbeddingMatrix, rho: Partition) -> IndexValue:
        x, labels, n, k = _prepare(z, rho, upper_k=True)
        centers = cluster_barycenters(x, labels, k)
        sizes = rho.cluster_sizes()
        wgss = float(np.sum((x - centers[labels]) ** 2))
        bgss = float(np.sum(sizes * np.sum((centers - x.mean(axis=0)) ** 2, axis=1)))
        if wgss <= _REL_TOL * (wgss + bgss):
            raise_error(ErrorKind.ZERO_WITHIN_DISPERSION, "within-group dispersion is zero")
        raw = (bgss / (k - 1)) / (wgss / (n - k))
        return IndexValue.from_raw(IndexId.CALINSKI_HARABASZ, raw)

    @staticmethod
    def davies_bouldin(z: EmbeddingMatrix, rho: Partition) -> IndexValue:
        x, labels, n, k = _prepare(z, rho, upper_k=False)
        centers = cluster_barycenters(x, labels, k)
        spread = np.linalg.norm(x - centers[labels], axis=1)
        delta = np.bincount(labels, weights=spread, minlength=k) / rho.cluster_sizes()
        between = distance_matrix(centers)
        scale = max(1.0, float(np.abs(centers).max()))
        off_diag = ~np.eye(k, dtype=bool)
        if np.any(between[off_diag] <= _REL_TOL * scale):
            raise_error(ErrorKind.COINCIDENT_CENTROIDS, "two clusters share a barycenter")
        with np.errstate(divide="ignore"):
            ratio = (delta[:, None] + delta[None, :]) / between
        ratio[~off_diag] = -np.inf
        raw = float(ratio.max(axis=1).mean())
        return IndexValue.from_raw(IndexId.DAVIES_BOULDIN, raw)

    @staticmethod
    def dunn(z: EmbeddingMatrix, rho: Partition) -> IndexValue:
        """Closest inter-cluster pair over the largest cluster diameter."""
        x, labels, n, k = _prepare(z, rho, upper_k=False)
        dist = distance_matrix(x)
        same = labels[:, None] == labels[None, :]
        within = dist[same & ~np.eye(n, dtype=bool)]
        if within.size == 0 or within.max() <= 0:
            raise_error(ErrorKind.ZERO_DIAMETER, "every cluster has zero diameter")
        raw = float(dist[~same].min() / within.max())
        return IndexValue.from_raw(IndexId.DUNN, raw)

    @staticmethod
    def cindex(z: EmbeddingMatrix, rho: Partition) -> IndexValue:
        x, labels, n, k = _prepare(z, rho, upper_k=False)
        d = condensed_distances(x)
        i, j = np.triu_indices(n, 1)
        same = labels[i] == labels[j]
        n_w = int(same.sum())
        if n_w == 0:
            raise_error(ErrorKind.DEGENERATE_DISTANCES, "no within-cluster pairs")
        ordered = np.sort(d)
        s_w = float(d[same].sum())
        s_min = float(ordered[:n_w].sum())
        s_max = float(ordered[-n_w:].sum())
        if s_max - s_min <= _REL_TOL * max(s_max, 1.0):
            raise_error(ErrorKind.DEGENERATE_DISTANCES, "S_max equals S_min")
        raw = float(np.clip((s_w - s_min) / (s_max - s_min), 0.0, 1.0))
        return IndexValue.from_raw(IndexId.CINDEX, raw)

    @staticmethod
    def ccc(z: EmbeddingMatrix, rho: Partition) -> IndexValue:
        """
        Cubic clustering criterion.

        Uses hyperbox edge lengths s_j from the eigenvalues of T/(n-1) and the
        largest p* < K whose edge ratio u_{p*} is at least 1.
        """
        x, labels, n, q = _prepare(z, rho, upper_k=False)
        p = x.shape[1]
        xc = x - x.mean(axis=0)
        total = float(np.sum(xc ** 2))
        if total <= 0:
            raise_error(ErrorKind.SINGULAR_TOTAL_SCATTER, "total scatter is zero")
        centers = cluster_barycenters(xc, labels, q)
        within = float(np.sum((xc - centers[labels]) ** 2))
        if within <= _REL_TOL * total:
            raise_error(ErrorKind.SINGULAR_TOTAL_SCATTER, "observed R^2 equals 1")
        r2 = 1.0 - within / total

        eig = np.linalg.eigvalsh((xc.T @ xc) / (n - 1))[::-1]
        s = np.sqrt(np.clip(eig, 0.0, None))

        p_star, u = 0, None
        for cand in range(min(p, q - 1), 0, -1):
            head = s[:cand]
            if np.any(head <= 0):
                continue
            c = np.exp((np.sum(np.log(head)) - np.log(q)) / cand)
            u_cand = s / c
            if u_cand[cand - 1] >= 1.0:
                p_star, u = cand, u_cand
                break
        if u is None:
            raise_error(ErrorKind.SINGULAR_TOTAL_SCATTER, "hyperbox volume is zero")

        head, tail = u[:p_star], u[p_star:]
        spread = np.sum(1.0 / (n + head)) + np.sum(tail ** 2 / (n + tail))
        e_r2 = 1.0 - (spread / np.sum(u ** 2)) * ((n - q) ** 2 / n) * (1.0 + 4.0 / n)
        with np.errstate(invalid="ignore", divide="ignore"):
            raw = np.log((1.0 - e_r2) / (1.0 - r2)) * np.sqrt(n * p_star / 2.0) / (0.001 + e_r2) ** 1.2
        if not np.isfinite(raw):
            raise_error(ErrorKind.SINGULAR_TOTAL_SCATTER, "expected R^2 approximation is degenerate")
        return IndexValue.from_raw(IndexId.CCC, float(raw))

    @staticmethod
    def sdbw(z: EmbeddingMatrix, rho: Partition) -> IndexValue:
        x, labels, n, k = _prepare(z, rho, upper_k=False)
        centers = cluster_barycenters(x, labels, k)
        var_k = _within_cluster_variances(x, labels, k)
        norm_all = float(np.linalg.norm(np.var(x, axis=0, ddof=1)))
        if norm_all <= 0:
            raise_error(ErrorKind.DEGENERATE_DISTANCES, "total variance is zero")
        norms = np.linalg.norm(var_k, axis=1)
        scat = float(norms.mean() / norm_all)
        sigma = float(np.sqrt(norms.sum()) / k)

        ratios = []
        for i in range(k):
            for j in range(i + 1, k):
                pts = x[(labels == i) | (labels == j)]
                probes = np.vstack([(centers[i] + centers[j]) / 2.0, centers[i], centers[j]])
                gamma = np.sum(distances_to(pts, probes) < sigma, axis=0)
                denom = max(gamma[1], gamma[2])
                # both barycenters empty: ratio falls back to the raw midpoint count
                ratios.append(gamma[0] / denom if denom > 0 else float(gamma[0]))
        dens_bw = float(np.mean(ratios))
        return IndexValue.from_raw(IndexId.SDBW, scat + dens_bw)

    @staticmethod
    def cdbw(
        z: EmbeddingMatrix,
        rho: Partition,
        reps: int = DEFAULT_CDBW_REPS,
        shrink_factors: Sequence[float] = DEFAULT_SHRINK_FACTORS,
    ) -> IndexValue:
        """
        Composed density between and within clusters: Cohesion * Sep * Compactness.

        Representatives are picked by farthest-first traversal from the point
        nearest each barycenter. A zero standard deviation makes every density
        term zero.
        """
        x, labels, n, k = _prepare(z, rho, upper_k=False)
        if reps < 1:
            raise_invalid_params("cdbw needs at least one representative per cluster")
        shrink = tuple(float(s) for s in shrink_factors)
        if not shrink or any(not 0.0 < s < 1.0 for s in shrink):
            raise_invalid_params("shrink factors must lie in (0, 1)")
        sizes = rho.cluster_sizes()
        if np.any(sizes == 0):
            raise_error(ErrorKind.EMPTY_CLUSTER, "a cluster has no members")

        centers = cluster_barycenters(x, labels, k)
        members = [x[labels == c] for c in range(k)]
        stdev = np.sqrt(_within_cluster_variances(x, labels, k).sum(axis=1))
        stdev_all = float(np.sqrt(np.mean(stdev ** 2)))
        rep_points = [
            _farthest_first(members[c], centers[c], min(reps, int(sizes[c]))) for c in range(k)
        ]

        dist_bw = np.zeros((k, k))
        dens_bw = np.zeros((k, k))
        for i in range(k):
            for j in range(i + 1, k):
                rd = distances_to(rep_points[i], rep_points[j])
                pairs = _closest_rep_pairs(rd)
                sd = float(np.sqrt((stdev[i] ** 2 + stdev[j] ** 2) / 2.0))
                pts = np.vstack([members[i], members[j]])
                terms = []
                for a, b in pairs:
                    if sd <= 0:
                        terms.append(0.0)
                        continue
                    mid = (rep_points[i][a] + rep_points[j][b]) / 2.0
                    card = np.count_nonzero(distances_to(pts, mid)[:, 0] <= sd) / pts.shape[0]
                    terms.append(rd[a, b] / (2.0 * sd) * card)
                dist_bw[i, j] = dist_bw[j, i] = float(np.mean([rd[a, b] for a, b in pairs]))
                dens_bw[i, j] = dens_bw[j, i] = float(np.mean(terms))

        off_diag = ~np.eye(k, dtype=bool)
        inter_dens = float(np.mean(np.where(off_diag, dens_bw, -np.inf).max(axis=1)))
        nearest = np.where(off_diag, dist_bw, np.inf).min(axis=1)
        sep = float(nearest.mean() / (1.0 + inter_dens))

        intra = []
        for s in shrink:
            dens_cl = 0.0
            for c in range(k):
                shrunk = rep_points[c] + s * (centers[c] - rep_points[c])
                inside = distances_to(members[c], shrunk) <= stdev_all
                dens_cl += float(inside.mean(axis=0).mean())
            intra.append(dens_cl / (k * stdev_all) if stdev_all > 0 else 0.0)
        intra = np.asarray(intra)

        compactness = float(intra.mean())
        intra_change = float(np.abs(np.diff(intra)).mean()) if intra.size > 1 else 0.0
        cohesion = compactness / (1.0 + intra_change)
        raw = cohesion * sep * compactness
        return IndexValue.from_raw(IndexId.CDBW, raw)

    @staticmethod
    def compute_index(
        index_id: IndexId,
        z: EmbeddingMatrix,
        rho: Partition,
        cdbw_reps: int = DEFAULT_CDBW_REPS,
        shrink_factors: Sequence[float] = DEFAULT_SHRINK_FACTORS,
    ) -> IndexValue:
        """Dispatch to one index by id"""
        if index_id is IndexId.CDBW:
            return IndexService.cdbw(z, rho, reps=cdbw_reps, shrink_factors=shrink_factors)
        return INDEX_REGISTRY[index_id](z, rho)

    @staticmethod
    def compute_score_matrix(
        bundle: TrialBundle,
        index_id: IndexId,
        spaces: Optional[Sequence[int]] = None,
        executor: Optional[Executor] = None,
        cdbw_reps: int = DEFAULT_CDBW_REPS,
        shrink_factors: Sequence[float] = DEFAULT_SHRINK_FACTORS,
    ) -> ScoreMatrix:
        """
        Evaluate every partition in every requested space.

        Cell (r, j) holds partition j scored in space spaces[r]. Failing cells
        are recorded as missing instead of raising.
        """
        rows = list(range(bundle.m)) if spaces is None else list(spaces)
        cells = [(r, c) for r in range(len(rows)) for c in range(bundle.m)]

        def evaluate(cell):
            r, c = cell
            try:
                value = IndexService.compute_index(
                    index_id,
                    bundle.trials[rows[r]].embedding,
                    bundle.trials[c].partition,
                    cdbw_reps=cdbw_reps,
                    shrink_factors=shrink_factors,
                )
                return value, None
            except AceError as exc:
                return None, exc.kind.value

        results = list(executor.map(evaluate, cells)) if executor else [evaluate(c) for c in cells]

        values = np.full((len(rows), bundle.m), np.nan)
        raw_values = np.full((len(rows), bundle.m), np.nan)
        missing = []
        for (r, c), (value, reason) in zip(cells, results):
            if value is None:
                missing.append(MissingCell(row=r, col=c, reason=reason))
            else:
                values[r, c] = value.oriented
                raw_values[r, c] = value.raw
        if missing:
            logger.warning(f"{index_id.value}: {len(missing)} of {len(cells)} score cells missing")

        ids = bundle.ids
        return ScoreMatrix(
            index=index_id,
            space_ids=tuple(ids[r] for r in rows),
            partition_ids=ids,
            values=values,
            raw_values=raw_values,
            missing=tuple(missing),
        )


def _farthest_first(points: np.ndarray, center: np.ndarray, count: int) -> np.ndarray:
    chosen = [int(np.argmin(np.linalg.norm(points - center, axis=1)))]
    nearest = np.linalg.norm(points - points[chosen[0]], axis=1)
    while len(chosen) < count:
        nxt = int(np.argmax(nearest))
        chosen.append(nxt)
        nearest = np.minimum(nearest, np.linalg.norm(points - points[nxt], axis=1))
    return points[chosen]


def _closest_rep_pairs(rd: np.ndarray):
    """Mutually closest representative pairs; the single closest pair if none are mutual."""
    to_j = rd.argmin(axis=1)
    to_i = rd.argmin(axis=0)
    pairs = [(a, int(to_j[a])) for a in range(rd.shape[0]) if to_i[to_j[a]] == a]
    if not pairs:
        a, b = np.unravel_index(int(rd.argmin()), rd.shape)
        pairs = [(int(a), int(b))]
    return pairs


INDEX_REGISTRY: Dict[IndexId, Callable[[EmbeddingMatrix, Partition], IndexValue]] = {
    IndexId.SILHOUETTE_EUCLIDEAN: lambda z, rho: IndexService.silhouette(z, rho, "euclidean"),
    IndexId.SILHOUETTE_COSINE: lambda z, rho: IndexService.silhouette(z, rho, "cosine"),
    IndexId.CALINSKI_HARABASZ: IndexService.calinski_harabasz,
    IndexId.DAVIES_BOULDIN: IndexService.davies_bouldin,
    IndexId.DUNN: IndexService.dunn,
    IndexId.CINDEX: IndexService.cindex,
    IndexId.CCC: IndexService.ccc,
    IndexId.SDBW: IndexService.sdbw,
    IndexId.CDBW: IndexService.cdbw,
}
