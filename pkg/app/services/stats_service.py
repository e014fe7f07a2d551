# app/services/stats_service.py
"""
Statistical building blocks: the dip statistic and its Monte-Carlo p-value,
first-principal-component projection, rank correlations with ties, the
one-sided Spearman test, Holm step-down screening and a one-sided paired t-test.
"""
import logging
from functools import lru_cache
from typing import Sequence, Tuple

import numpy as np
from scipy import stats

from app.core.random import Stream, substream
from app.models.stats import DipResult, RankCorrelation
from app.models.trial import EmbeddingMatrix
from app.utils.exceptions import AceError, ErrorKind, raise_error, raise_invalid_params
from app.utils.validators import (
    validate_alpha,
    validate_min_points,
    validate_probabilities,
    validate_same_length,
    validate_sorted,
)

logger = logging.getLogger(__name__)


def _dip_core(x: np.ndarray) -> float:
    """
    Taut-string dip of a sorted sample, in units of 2n.

    Alternates greatest convex minorant and least concave majorant fits on the
    shrinking modal interval [low, high]; never returns less than 1.
    """
    n = x.size
    low, high = 0, n - 1
    dip = 1.0

    # Convex minorant link indices
    mn = np.zeros(n, dtype=np.int64)
    for j in range(1, n):
        mn[j] = j - 1
        while True:
            mnj = mn[j]
            mnmnj = mn[mnj]
            if mnj == 0 or (x[j] - x[mnj]) * (mnj - mnmnj) < (x[mnj] - x[mnmnj]) * (j - mnj):
                break
            mn[j] = mnmnj

    # Concave majorant link indices
    mj = np.zeros(n, dtype=np.int64)
    mj[n - 1] = n - 1
    for k in range(n - 2, -1, -1):
        mj[k] = k + 1
        while True:
            mjk = mj[k]
            mjmjk = mj[mjk]
            if mjk == n - 1 or (x[k] - x[mjk]) * (mjk - mjmjk) < (x[mjk] - x[mjmjk]) * (k - mjk):
                break
            mj[k] = mjmjk

    gcm = np.zeros(n + 1, dtype=np.int64)
    lcm = np.zeros(n + 1, dtype=np.int64)
    while True:
        gcm[0] = high
        i = 0
        while gcm[i] > low:
            gcm[i + 1] = mn[gcm[i]]
            i += 1
        ig = l_gcm = i
        ix = ig - 1

        lcm[0] = low
        i = 0
        while lcm[i] < high:
            lcm[i + 1] = mj[lcm[i]]
            i += 1
        ih = l_lcm = i
        iv = 1

        d = 0.0
        if l_gcm != 1 or l_lcm != 1:
            while True:
                gcmix = gcm[ix]
                lcmiv = lcm[iv]
                if gcmix > lcmiv:
                    gcmil = gcm[ix + 1]
                    dx = (lcmiv - gcmil + 1) - (x[lcmiv] - x[gcmil]) * (gcmix - gcmil) / (x[gcmix] - x[gcmil])
                    iv += 1
                    if dx >= d:
                        d = dx
                        ig = ix + 1
                        ih = iv - 1
                else:
                    lcmivl = lcm[iv - 1]
                    dx = (x[gcmix] - x[lcmivl]) * (lcmiv - lcmivl) / (x[lcmiv] - x[lcmivl]) - (gcmix - lcmivl - 1)
                    ix -= 1
                    if dx >= d:
                        d = dx
                        ig = ix + 1
                        ih = iv
                ix = max(ix, 0)
                iv = min(iv, l_lcm)
                if gcm[ix] == lcm[iv]:
                    break
        if d < dip:
            break

        dip_l = 0.0
        for j in range(ig, l_gcm):
            jb, je = gcm[j + 1], gcm[j]
            max_t = 1.0
            if je - jb > 1 and x[je] != x[jb]:
                slope = (je - jb) / (x[je] - x[jb])
                t = (np.arange(jb, je + 1) - jb + 1) - (x[jb:je + 1] - x[jb]) * slope
                max_t = max(max_t, float(t.max()))
            dip_l = max(dip_l, max_t)

        dip_u = 0.0
        for j in range(ih, l_lcm):
            jb, je = lcm[j], lcm[j + 1]
            max_t = 1.0
            if je - jb > 1 and x[je] != x[jb]:
                slope = (je - jb) / (x[je] - x[jb])
                t = (x[jb:je + 1] - x[jb]) * slope - (np.arange(jb, je + 1) - jb - 1)
                max_t = max(max_t, float(t.max()))
            dip_u = max(dip_u, max_t)

        dip = max(dip, dip_l, dip_u)
        if low == gcm[ig] and high == lcm[ih]:
            break
        low, high = gcm[ig], lcm[ih]
    return dip


@lru_cache(maxsize=32)
def _null_dips(n: int, replicates: int, seed: int) -> np.ndarray:
    """Dips of `replicates` sorted Unif(0,1) samples of size n, one substream each."""
    out = np.empty(replicates)
    for r in range(replicates):
        sample = np.sort(substream(seed, Stream.DIP_NULL, n, r).random(n))
        out[r] = StatsService.dip_statistic(sample)
    out.flags.writeable = False
    return out


def _paired_observed(x: Sequence[float], y: Sequence[float]) -> Tuple[np.ndarray, np.ndarray]:
    validate_same_length(x, y)
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    keep = ~(np.isnan(x) | np.isnan(y))
    return x[keep], y[keep]


def _check_rank_inputs(x: np.ndarray, y: np.ndarray):
    validate_min_points(x.size, 2, "rank correlation")
    if np.unique(x).size < 2 or np.unique(y).size < 2:
        raise_error(ErrorKind.DEGENERATE_VARIANCE, "rank correlation needs two distinct values per vector")


class StatsService:
    @staticmethod
    def dip_statistic(sample: Sequence[float]) -> float:
        """
        Dip D(F_n) of a sorted sample

        Args:
            sample: ascending sample of size n >= 2

        Returns:
            Dip in (0, 0.25]; samples with fewer than 4 points or no spread
            get the lower bound 1/(2n)

        Raises:
            AceError: TooFewPoints, Unsorted
        """
        x = np.asarray(sample, dtype=np.float64)
        validate_min_points(x.size, 2, "dip statistic")
        validate_sorted(x)
        n = x.size
        if n < 4 or x[0] == x[-1]:
            return 0.5 / n
        return _dip_core(x) / (2.0 * n)

    @staticmethod
    def dip_pvalue(sample: Sequence[float], replicates: int, seed: int) -> DipResult:
        """
        Monte-Carlo p-value of the dip against the uniform null

        p = (1 + #{D_b >= D}) / (B + 1), each D_b from its own substream of `seed`.
        The null draws are cached per (n, B, seed).
        """
        if replicates < 1:
            raise_invalid_params("dip replicates must be >= 1")
        x = np.sort(np.asarray(sample, dtype=np.float64))
        dip = StatsService.dip_statistic(x)
        null = _null_dips(x.size, int(replicates), int(seed))
        p_value = (1.0 + np.count_nonzero(null >= dip)) / (replicates + 1.0)
        return DipResult(dip=dip, p_value=float(p_value), replicates=replicates)

    @staticmethod
    def pca_first_component(z: EmbeddingMatrix) -> np.ndarray:
        """Projection of the centered rows on the top covariance eigenvector"""
        x = z.values
        validate_min_points(z.n, 2, "PCA projection")
        if np.all(np.ptp(x, axis=0) == 0):
            raise_error(ErrorKind.ZERO_VARIANCE, "all rows are identical")
        centered = x - x.mean(axis=0)
        cov = np.atleast_2d(np.cov(centered, rowvar=False))
        _, vectors = np.linalg.eigh(cov)
        top = vectors[:, -1]
        lead = int(np.argmax(np.abs(top)))
        if top[lead] < 0:
            top = -top
        return centered @ top

    @staticmethod
    def spearman(x: Sequence[float], y: Sequence[float]) -> float:
        """Pearson correlation of mid-ranks; missing pairs dropped"""
        x, y = _paired_observed(x, y)
        _check_rank_inputs(x, y)
        return float(np.clip(stats.spearmanr(x, y)[0], -1.0, 1.0))

    @staticmethod
    def kendall_tau_b(x: Sequence[float], y: Sequence[float]) -> float:
        x, y = _paired_observed(x, y)
        _check_rank_inputs(x, y)
        return float(np.clip(stats.kendalltau(x, y, variant="b")[0], -1.0, 1.0))

    @staticmethod
    def rank_correlation(x: Sequence[float], y: Sequence[float]) -> RankCorrelation:
        """Both coefficients; undefined ones come back as None"""
        xs, ys = _paired_observed(x, y)
        try:
            return RankCorrelation(
                spearman_rs=StatsService.spearman(xs, ys),
                kendall_tau_b=StatsService.kendall_tau_b(xs, ys),
                n=xs.size,
            )
        except AceError:
            return RankCorrelation(n=xs.size)

    @staticmethod
    def spearman_onesided_pvalue(rs: float, n: int) -> float:
        """Upper-tail p of t = rs sqrt((n-2)/(1-rs^2)) under t with n-2 d.o.f."""
        validate_min_points(n, 3, "Spearman test")
        if rs >= 1.0:
            return 0.0
        if rs <= -1.0:
            return 1.0
        t = rs * np.sqrt((n - 2) / (1.0 - rs * rs))
        return float(stats.t.sf(t, n - 2))

    @staticmethod
    def holm_bonferroni(pvals: Sequence[float], alpha: float) -> np.ndarray:
        """Step-down rejection flags in input order"""
        validate_alpha(alpha)
        p = np.asarray(pvals, dtype=np.float64)
        validate_probabilities(p)
        reject = np.zeros(p.size, dtype=bool)
        order = np.argsort(p, kind="stable")
        for rank, idx in enumerate(order):
            if p[idx] > alpha / (p.size - rank):
                break
            reject[idx] = True
        return reject

    @staticmethod
    def paired_t_test_onesided(a: Sequence[float], b: Sequence[float]) -> float:
        """
        Upper-tail p for mean(a - b) > 0

        A constant nonzero difference is decided outright (p = 0 or 1); a zero
        difference raises ZeroVariance.
        """
        a, b = _paired_observed(a, b)
        validate_min_points(a.size, 2, "paired t-test")
        diff = a - b
        mean = float(diff.mean())
        if np.ptp(diff) <= 1e-12 * max(1.0, abs(mean)):
            if mean > 0:
                return 0.0
            if mean < 0:
                return 1.0
            raise_error(ErrorKind.ZERO_VARIANCE, "paired differences are all zero")
        return float(stats.ttest_rel(a, b, alternative="greater").pvalue)
