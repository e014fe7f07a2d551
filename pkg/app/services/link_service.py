# app/services/link_service.py
import logging
from typing import Optional, Sequence, Union

import numpy as np

from app.models.graph import CorrelationGraph, LinkWeights
from app.services.stats_service import StatsService
from app.utils.exceptions import ErrorKind, raise_error, raise_invalid_params, raise_shape_mismatch
from app.utils.validators import validate_alpha

logger = logging.getLogger(__name__)

MAX_ITERATIONS = 10000


class LinkService:
    @staticmethod
    def build_graph(
        corr: np.ndarray,
        n_samples: Union[int, np.ndarray],
        alpha: float,
        members: Optional[Sequence[int]] = None,
        test_edges: bool = True,
        weights: Optional[np.ndarray] = None,
    ) -> CorrelationGraph:
        """
        Significance-filtered correlation graph of one subgroup

        Args:
            corr: k x k Spearman correlations of the subgroup (NaN if undefined)
            n_samples: observations behind each correlation, scalar or k x k
            alpha: family-wise error rate for the Holm step-down over all pairs
            members: space indices of the vertices (defaults to 0..k-1)
            test_edges: when False every positive correlation is kept untested
            weights: edge weights to store instead of corr (same shape)

        Returns:
            CorrelationGraph with weight r for kept pairs and 0 elsewhere
        """
        validate_alpha(alpha)
        corr = np.asarray(corr, dtype=np.float64)
        k = corr.shape[0]
        if corr.shape != (k, k):
            raise_shape_mismatch(f"correlation submatrix must be square, got {corr.shape}")
        weights = corr if weights is None else np.asarray(weights, dtype=np.float64)
        counts = np.broadcast_to(np.asarray(n_samples), (k, k))
        members = tuple(range(k)) if members is None else tuple(int(m) for m in members)

        pairs = [(a, b) for a in range(k) for b in range(a + 1, k)]
        pvals = np.full((k, k), np.nan)
        for a, b in pairs:
            r = corr[a, b]
            n = int(counts[a, b])
            # untestable pairs never reject
            if np.isnan(r) or n < 3:
                pvals[a, b] = pvals[b, a] = 1.0
            else:
                pvals[a, b] = pvals[b, a] = StatsService.spearman_onesided_pvalue(float(r), n)

        if test_edges and pairs:
            flat = np.array([pvals[a, b] for a, b in pairs])
            reject = StatsService.holm_bonferroni(flat, alpha)
        else:
            reject = np.ones(len(pairs), dtype=bool)

        kept = np.zeros((k, k))
        for (a, b), rejected in zip(pairs, reject):
            w = weights[a, b]
            if rejected and corr[a, b] > 0 and w > 0:
                kept[a, b] = kept[b, a] = w
        return CorrelationGraph(members=members, weights=kept, pvalues=pvals)

    @staticmethod
    def pagerank(g: CorrelationGraph, damping: float = 0.85, tol: float = 1e-10) -> LinkWeights:
        """Stationary distribution of the damped random walk on the weighted graph"""
        if not 0.0 < damping < 1.0:
            raise_invalid_params(f"damping must lie in (0, 1), got {damping}")
        k = g.size
        if k == 0:
            raise_error(ErrorKind.EMPTY_SUBGROUP, "graph has no vertices")
        if k == 1:
            return LinkWeights(values=np.ones(1))

        w = np.asarray(g.weights, dtype=np.float64)
        row_sums = w.sum(axis=1)
        transition = np.full((k, k), 1.0 / k)
        linked = row_sums > 0
        transition[linked] = w[linked] / row_sums[linked, None]

        x = np.full(k, 1.0 / k)
        for _ in range(MAX_ITERATIONS):
            last = x
            x = damping * (transition.T @ last) + (1.0 - damping) / k
            x = x / x.sum()
            if np.max(np.abs(x - last)) < tol:
                return LinkWeights(values=x)
        raise_error(ErrorKind.NON_CONVERGENCE, f"pagerank did not converge in {MAX_ITERATIONS} iterations")

    @staticmethod
    def hits_authority(g: CorrelationGraph, tol: float = 1e-10) -> LinkWeights:
        """Authority scores; uniform weights when the iteration cannot settle"""
        k = g.size
        if k == 0:
            raise_error(ErrorKind.EMPTY_SUBGROUP, "graph has no vertices")
        w = np.asarray(g.weights, dtype=np.float64)
        if k == 1 or not np.any(w > 0):
            return LinkWeights.uniform(k)

        hub = np.full(k, 1.0 / k)
        auth = np.full(k, 1.0 / k)
        for _ in range(MAX_ITERATIONS):
            last = auth
            auth = w.T @ hub
            auth = auth / auth.sum()
            hub = w @ auth
            hub = hub / hub.sum()
            if np.max(np.abs(auth - last)) < tol:
                return LinkWeights(values=auth)
        logger.warning("HITS did not converge; falling back to equal weights")
        return LinkWeights.uniform(k)

    @staticmethod
    def aggregate_scores(scores: np.ndarray, subgroup: Sequence[int], weights: LinkWeights) -> np.ndarray:
        """
        Weighted sum of the subgroup's score rows

        Missing cells drop out of their column and the remaining weights are
        renormalized; a column missing in every row stays NaN.
        """
        subgroup = list(subgroup)
        if not subgroup:
            raise_error(ErrorKind.EMPTY_SUBGROUP, "cannot aggregate an empty subgroup")
        w = weights.values
        if w.size != len(subgroup):
            raise_shape_mismatch(f"{w.size} weights for {len(subgroup)} subgroup members")
        rows = np.asarray(scores, dtype=np.float64)[subgroup]
        if len(subgroup) == 1:
            return rows[0].copy()

        observed = ~np.isnan(rows)
        mass = (w[:, None] * observed).sum(axis=0)
        total = (w[:, None] * np.where(observed, rows, 0.0)).sum(axis=0)
        with np.errstate(invalid="ignore", divide="ignore"):
            out = np.where(mass > 0, total / mass, np.nan)
        # a column observed only in zero-weight rows falls back to their plain mean
        fallback = (mass == 0) & observed.any(axis=0)
        if fallback.any():
            out[fallback] = np.nanmean(rows[:, fallback], axis=0)
        return out
