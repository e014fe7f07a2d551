# app/services/grouping_service.py
"""
Density-based grouping of embedding spaces over precomputed distances.

Phase 1 groups spaces by rank-correlation distance 1 - corr; phase 2 splits
each phase-1 group by the RMS distance between score rows, so every final
subgroup holds spaces that rank partitions alike and on a similar scale.
"""
import logging
from typing import List, Optional

import numpy as np
from pydantic import BaseModel, ConfigDict
from sklearn.cluster import DBSCAN, HDBSCAN

from app.models.grouping import OUTLIER, DistanceMatrix, Grouping, GroupingMethod
from app.utils.array_helpers import rms_row_distances
from app.utils.exceptions import raise_invalid_params, raise_shape_mismatch

logger = logging.getLogger(__name__)

# Zero distances are lifted to this floor so HDBSCAN lambdas stay finite
_DISTANCE_FLOOR = 1e-12


class GroupingParams(BaseModel):
    model_config = ConfigDict(frozen=True)

    dbscan_eps: float = 0.1
    min_cluster_size: int = 2
    min_samples: int = 2


class GroupingService:
    @staticmethod
    def dbscan(d: DistanceMatrix, eps: float, min_pts: int) -> Grouping:
        if eps <= 0 or min_pts < 1:
            raise_invalid_params(f"dbscan needs eps > 0 and min_pts >= 1 (got {eps}, {min_pts})")
        model = DBSCAN(eps=eps, min_samples=min_pts, metric="precomputed")
        labels = model.fit(d.values).labels_
        return Grouping.from_labels(labels)

    @staticmethod
    def hdbscan(d: DistanceMatrix, min_cluster_size: int, min_samples: int) -> Grouping:
        if min_cluster_size < 2 or min_samples < 1:
            raise_invalid_params(
                f"hdbscan needs min_cluster_size >= 2 and min_samples >= 1 (got {min_cluster_size}, {min_samples})"
            )
        if d.size < 2:
            raise_invalid_params("hdbscan needs at least two spaces")
        if min_samples > d.size:
            logger.warning(f"min_samples={min_samples} exceeds {d.size} spaces, clamping")
            min_samples = d.size

        dist = np.maximum(d.values, _DISTANCE_FLOOR)
        np.fill_diagonal(dist, 0.0)
        model = HDBSCAN(
            min_cluster_size=min_cluster_size,
            min_samples=min_samples,
            metric="precomputed",
            cluster_selection_method="eom",
            allow_single_cluster=True,
            copy=True,
        )
        labels = model.fit(dist).labels_
        return Grouping.from_labels(labels)

    @staticmethod
    def cluster(d: DistanceMatrix, method: GroupingMethod, params: GroupingParams) -> Grouping:
        if method is GroupingMethod.DBSCAN:
            return GroupingService.dbscan(d, params.dbscan_eps, params.min_samples)
        return GroupingService.hdbscan(d, params.min_cluster_size, params.min_samples)

    @staticmethod
    def stagewise_group(
        corr: np.ndarray,
        scores: np.ndarray,
        method: GroupingMethod = GroupingMethod.HDBSCAN,
        params: Optional[GroupingParams] = None,
    ) -> Grouping:
        """
        Two-phase grouping of M spaces

        Args:
            corr: M x M rank-correlation matrix (NaN where undefined)
            scores: M x J oriented score rows aligned with corr
            method: density method for both phases
            params: density parameters for phase 1

        Returns:
            Grouping whose subgroups cover all M spaces; `assignment` holds the
            phase-1 labels and `outliers` the phase-1 outliers
        """
        params = params or GroupingParams()
        corr = np.asarray(corr, dtype=np.float64)
        scores = np.asarray(scores, dtype=np.float64)
        m = corr.shape[0]
        if corr.shape != (m, m) or scores.shape[0] != m:
            raise_shape_mismatch(f"correlation {corr.shape} and score rows {scores.shape} do not align")

        # Spaces without any positive rank correlation never join a group
        positive = np.nan_to_num(corr, nan=0.0) > 0
        np.fill_diagonal(positive, False)
        linked = [i for i in range(m) if positive[i].any()]

        phase1 = [OUTLIER] * m
        if len(linked) >= 2:
            sub = DistanceMatrix.from_correlation(corr[np.ix_(linked, linked)])
            inner = GroupingService.cluster(sub, method, params)
            for pos, label in zip(linked, inner.assignment):
                phase1[pos] = label
        first = Grouping.from_labels(phase1)

        subgroups: List[tuple] = []
        for group in first.subgroups:
            subgroups.extend(GroupingService._split_by_scale(list(group), scores, method, params))
        subgroups.extend((i,) for i in first.outliers)
        subgroups.sort(key=lambda g: g[0])

        logger.info(
            f"Stage-wise grouping: {len(first.subgroups)} phase-1 groups, "
            f"{len(first.outliers)} outliers, {len(subgroups)} final subgroups"
        )
        return Grouping(assignment=first.assignment, subgroups=tuple(subgroups), outliers=first.outliers)

    @staticmethod
    def _split_by_scale(members: List[int], scores: np.ndarray, method: GroupingMethod, params: GroupingParams):
        """Phase 2: re-cluster one phase-1 group on RMS score-row distances."""
        dist = rms_row_distances(scores[members])
        finite = dist[np.isfinite(dist)]
        fill = 2.0 * finite.max() + 1.0 if finite.size else 1.0
        dist = np.where(np.isfinite(dist), dist, fill)
        np.fill_diagonal(dist, 0.0)
        widest = float(dist.max())
        if widest <= 0:
            return [tuple(members)]

        d = DistanceMatrix(values=dist)
        if method is GroupingMethod.DBSCAN:
            inner = GroupingService.dbscan(d, 0.25 * widest, 2)
        else:
            inner = GroupingService.hdbscan(d, 2, min(params.min_samples, len(members)))

        parts = [tuple(members[i] for i in group) for group in inner.subgroups]
        parts.extend((members[i],) for i in inner.outliers)
        return parts
