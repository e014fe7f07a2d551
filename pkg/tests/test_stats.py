# tests/test_stats.py
import numpy as np
import pytest

from app.models.trial import EmbeddingMatrix
from app.services.stats_service import StatsService
from app.utils.exceptions import AceError, ErrorKind


def _mid_ranks(values: np.ndarray) -> np.ndarray:
    ranks = np.empty(values.size)
    for i, v in enumerate(values):
        ranks[i] = np.sum(values < v) + (np.sum(values == v) + 1) / 2.0
    return ranks


def _naive_spearman(x, y) -> float:
    rx, ry = _mid_ranks(x), _mid_ranks(y)
    rx, ry = rx - rx.mean(), ry - ry.mean()
    return float(np.sum(rx * ry) / np.sqrt(np.sum(rx ** 2) * np.sum(ry ** 2)))


def _naive_tau_b(x, y) -> float:
    n = x.size
    concordant = discordant = ties_x = ties_y = 0
    for i in range(n):
        for j in range(i + 1, n):
            dx, dy = np.sign(x[i] - x[j]), np.sign(y[i] - y[j])
            if dx == 0 and dy == 0:
                continue
            if dx == 0:
                ties_x += 1
            elif dy == 0:
                ties_y += 1
            elif dx == dy:
                concordant += 1
            else:
                discordant += 1
    return (concordant - discordant) / np.sqrt(
        (concordant + discordant + ties_x) * (concordant + discordant + ties_y)
    )


def test_rank_correlations_match_definitions():
    rng = np.random.default_rng(0)
    checked = 0
    while checked < 500:
        n = int(rng.integers(3, 101))
        x = rng.integers(0, max(2, n // 3), size=n).astype(float)
        y = rng.integers(0, max(2, n // 2), size=n).astype(float)
        if np.unique(x).size < 2 or np.unique(y).size < 2:
            continue
        assert StatsService.spearman(x, y) == pytest.approx(_naive_spearman(x, y), abs=1e-12)
        assert StatsService.kendall_tau_b(x, y) == pytest.approx(_naive_tau_b(x, y), abs=1e-12)
        checked += 1


def test_rank_correlation_extremes():
    x = np.arange(10.0)
    assert StatsService.spearman(x, x ** 3) == pytest.approx(1.0)
    assert StatsService.kendall_tau_b(x, -x) == pytest.approx(-1.0)


def test_rank_correlation_undefined_for_constant_vector():
    with pytest.raises(AceError) as exc:
        StatsService.spearman([1.0, 1.0, 1.0], [1.0, 2.0, 3.0])
    assert exc.value.kind is ErrorKind.DEGENERATE_VARIANCE
    result = StatsService.rank_correlation([1.0, 1.0, 1.0], [1.0, 2.0, 3.0])
    assert result.spearman_rs is None
    assert not result.defined


def test_rank_correlation_drops_missing_pairs():
    result = StatsService.rank_correlation([1.0, np.nan, 3.0, 4.0], [2.0, 5.0, 6.0, 8.0])
    assert result.n == 3
    assert result.spearman_rs == pytest.approx(1.0)


def test_dip_is_affine_invariant():
    rng = np.random.default_rng(1)
    for _ in range(50):
        x = np.sort(rng.standard_normal(int(rng.integers(5, 80))))
        base = StatsService.dip_statistic(x)
        scale, shift = rng.uniform(0.1, 10.0), rng.uniform(-100, 100)
        assert StatsService.dip_statistic(x * scale + shift) == pytest.approx(base, abs=1e-12)


def test_dip_bounds():
    rng = np.random.default_rng(2)
    for _ in range(1000):
        n = int(rng.integers(2, 60))
        x = np.sort(rng.uniform(size=n) if rng.random() < 0.5 else rng.standard_normal(n))
        dip = StatsService.dip_statistic(x)
        assert 0.0 < dip <= 0.25


def test_dip_degenerate_samples():
    assert StatsService.dip_statistic([1.0, 2.0, 3.0]) == pytest.approx(1.0 / 6.0)
    assert StatsService.dip_statistic([2.0] * 10) == pytest.approx(0.05)


def test_dip_requires_sorted_sample():
    with pytest.raises(AceError) as exc:
        StatsService.dip_statistic([3.0, 1.0, 2.0, 4.0])
    assert exc.value.kind is ErrorKind.UNSORTED
    with pytest.raises(AceError) as exc:
        StatsService.dip_statistic([1.0])
    assert exc.value.kind is ErrorKind.TOO_FEW_POINTS


@pytest.mark.slow
def test_dip_pvalue_uniform_calibration():
    accepted = 0
    for run in range(100):
        sample = np.random.default_rng(1000 + run).uniform(size=200)
        if StatsService.dip_pvalue(sample, replicates=500, seed=0).p_value > 0.05:
            accepted += 1
    assert accepted >= 90


def test_dip_pvalue_bimodal_mixture():
    rng = np.random.default_rng(9)
    sample = np.concatenate([rng.standard_normal(100), 10.0 + rng.standard_normal(100)])
    result = StatsService.dip_pvalue(sample, replicates=500, seed=0)
    assert result.p_value <= 0.01
    assert result.replicates == 500


def test_dip_pvalue_is_reproducible():
    sample = np.random.default_rng(4).standard_normal(60)
    assert StatsService.dip_pvalue(sample, 100, 5) == StatsService.dip_pvalue(sample, 100, 5)


def test_pca_first_component_of_line():
    t = np.linspace(-1.0, 1.0, 11)
    z = EmbeddingMatrix(values=np.column_stack([3.0 * t, 4.0 * t]))
    projection = StatsService.pca_first_component(z)
    np.testing.assert_allclose(np.abs(projection), np.abs(5.0 * t), atol=1e-12)


def test_pca_zero_variance():
    with pytest.raises(AceError) as exc:
        StatsService.pca_first_component(EmbeddingMatrix(values=np.ones((5, 3))))
    assert exc.value.kind is ErrorKind.ZERO_VARIANCE


def test_spearman_pvalue():
    assert StatsService.spearman_onesided_pvalue(1.0, 10) == 0.0
    assert StatsService.spearman_onesided_pvalue(0.0, 10) == pytest.approx(0.5)
    assert StatsService.spearman_onesided_pvalue(0.8, 12) < 0.01
    with pytest.raises(AceError):
        StatsService.spearman_onesided_pvalue(0.5, 2)


def test_holm_bonferroni_step_down():
    reject = StatsService.holm_bonferroni([0.01, 0.04, 0.03, 0.005], 0.05)
    # sorted: 0.005 <= 0.0125, 0.01 <= 0.0167, 0.03 > 0.025 stops
    assert reject.tolist() == [True, False, False, True]


def test_holm_bonferroni_rejects_invalid_alpha():
    with pytest.raises(AceError) as exc:
        StatsService.holm_bonferroni([0.1], 1.5)
    assert exc.value.kind is ErrorKind.INVALID_ALPHA


def test_paired_t_test_constant_difference():
    a = np.arange(6.0)
    assert StatsService.paired_t_test_onesided(a + 1.0, a) == 0.0
    assert StatsService.paired_t_test_onesided(a - 1.0, a) == 1.0
    with pytest.raises(AceError) as exc:
        StatsService.paired_t_test_onesided(a, a)
    assert exc.value.kind is ErrorKind.ZERO_VARIANCE


def test_paired_t_test_alternating_differences():
    base = np.arange(1.0, 7.0)
    other = base + np.array([2.0, -1.0, 2.0, -1.0, 2.0, -1.0])
    # mean difference 0.5, sd sqrt(2.7), t = 0.745 on 5 d.o.f.
    assert StatsService.paired_t_test_onesided(other, base) == pytest.approx(0.2449, abs=5e-3)


@pytest.mark.parametrize("seed", range(5))
def test_holm_rejections_are_nested_in_alpha(seed):
    rng = np.random.default_rng(seed)
    pvals = np.concatenate([rng.uniform(0.0, 0.02, size=4), rng.uniform(size=8)])
    previous = None
    for alpha in (0.001, 0.01, 0.05, 0.1, 0.3, 0.9):
        reject = StatsService.holm_bonferroni(pvals, alpha)
        if previous is not None:
            assert np.all(reject[previous])
        previous = reject


@pytest.mark.parametrize(
    "transform",
    [np.exp, lambda v: v ** 3, np.arctan, lambda v: 5.0 * v - 2.0],
    ids=["exp", "cube", "arctan", "affine"],
)
def test_rank_correlations_ignore_increasing_transforms(transform):
    rng = np.random.default_rng(17)
    for _ in range(20):
        x = rng.integers(-5, 6, size=25).astype(np.float64)
        y = x + rng.normal(scale=2.0, size=25)
        rs = StatsService.spearman(x, y)
        tau = StatsService.kendall_tau_b(x, y)
        assert StatsService.spearman(transform(x), y) == pytest.approx(rs, abs=1e-12)
        assert StatsService.spearman(x, transform(y)) == pytest.approx(rs, abs=1e-12)
        assert StatsService.kendall_tau_b(transform(x), transform(y)) == pytest.approx(tau, abs=1e-12)
