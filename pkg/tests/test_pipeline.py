# tests/test_pipeline.py
import numpy as np
import pytest

from app.models.grouping import OUTLIER, Grouping
from app.models.index import IndexId
from app.models.pipeline import AceConfig, ExternalMeasure, Regime, SubgroupReport
from app.models.score import ScoreMatrix
from app.models.synth import SynthSpec
from app.models.trial import EmbeddingMatrix, TrialBundle
from app.services.grouping_service import GroupingService
from app.services.pipeline_service import PipelineService, ace, ace_with_outlier_rescue
from app.services.stats_service import StatsService
from app.services.synth_service import SynthService
from app.utils.exceptions import AceError, ErrorKind

from .conftest import blobs, make_trial


def _subgroup(sid, scores, outlier=False):
    scores = [float(s) for s in scores]
    return SubgroupReport(
        id=sid,
        members=[f"s{sid}"] if outlier else [f"s{sid}", f"t{sid}"],
        is_outlier=outlier,
        weights=[1.0] if outlier else [0.5, 0.5],
        scores=scores,
        mean=float(np.mean(scores)),
    )


def _matrix(values) -> ScoreMatrix:
    values = np.asarray(values, dtype=np.float64)
    ids = tuple(f"t{i}" for i in range(values.shape[0]))
    return ScoreMatrix(index=IndexId.DUNN, space_ids=ids, partition_ids=ids, values=values, raw_values=values.copy())


def test_pooled_is_column_mean(two_trial_bundle):
    cfg = AceConfig(index=IndexId.DUNN, pool_without_dip=True)
    pooled = PipelineService(cfg).pooled_score(two_trial_bundle, _matrix([[0.0, 1.0], [2.0, 3.0]]))
    assert pooled.tolist() == [1.0, 2.0]


def test_pooled_skips_missing_cells(two_trial_bundle):
    cfg = AceConfig(index=IndexId.DUNN, pool_without_dip=True)
    pooled = PipelineService(cfg).pooled_score(two_trial_bundle, _matrix([[np.nan, 1.0], [2.0, 3.0]]))
    assert pooled.tolist() == [2.0, 2.0]


def test_raw_score_requires_raw_input():
    x, labels = blobs(np.random.default_rng(0), k=2, per_cluster=5)
    bundle = TrialBundle(trials=(make_trial("a", x, labels),))
    with pytest.raises(AceError) as exc:
        PipelineService(AceConfig(index=IndexId.DUNN)).raw_score(bundle)
    assert exc.value.kind is ErrorKind.MISSING_RAW_INPUT


def test_raw_equals_paired_when_raw_is_every_embedding(two_trial_bundle):
    service = PipelineService(AceConfig(index=IndexId.CALINSKI_HARABASZ))
    np.testing.assert_array_equal(service.raw_score(two_trial_bundle), service.paired_score(two_trial_bundle))


def test_identical_spaces_agree_across_regimes(fast_config):
    rng = np.random.default_rng(12)
    x, labels = blobs(rng, k=3, per_cluster=30)
    noisy = labels.copy()
    noisy[:6] = (noisy[:6] + 1) % 3
    bundle = TrialBundle(trials=(make_trial("a", x, labels), make_trial("b", x, noisy)))

    report = ace(bundle, fast_config)
    assert report.retained == ["a", "b"]
    np.testing.assert_allclose(report.scores[Regime.ACE], report.scores[Regime.POOLED], rtol=1e-12)
    np.testing.assert_allclose(report.scores[Regime.ACE], report.scores[Regime.PAIRED], rtol=1e-12)


def test_ace_excludes_corrupted_spaces(small_bundle, fast_config):
    report = ace(small_bundle, fast_config)
    corrupted = {"trial_001", "trial_004"}
    assert not corrupted & set(report.retained)
    assert not corrupted & set(report.selected_members)
    assert len(report.scores[Regime.ACE]) == small_bundle.m
    assert len(report.scores[Regime.PAIRED]) == small_bundle.m


def test_report_invariants(small_bundle, fast_config):
    report = ace(small_bundle, fast_config)
    selected = report.subgroups[report.selected_subgroup]
    assert report.scores[Regime.ACE] == selected.scores
    assert all(selected.mean >= s.mean for s in report.subgroups if s.mean is not None)
    assert sum(selected.weights) == pytest.approx(1.0)
    members = sorted(m for s in report.subgroups for m in s.members)
    assert members == sorted(report.retained)


def test_ace_is_convex_combination_of_retained_rows(small_bundle, fast_config):
    report = ace(small_bundle, fast_config)
    rows = np.array([report.score_matrix[report.trial_ids.index(t)] for t in report.retained])
    scores = np.array(report.scores[Regime.ACE])
    assert np.all(scores >= rows.min(axis=0) - 1e-12)
    assert np.all(scores <= rows.max(axis=0) + 1e-12)


def test_ace_is_deterministic(small_bundle, fast_config):
    assert ace(small_bundle, fast_config).model_dump_json() == ace(small_bundle, fast_config).model_dump_json()


def test_skip_dip_retains_every_space(small_bundle, fast_config):
    cfg = fast_config.model_copy(update={"skip_dip": True})
    report = ace(small_bundle, cfg)
    assert report.retained == list(small_bundle.ids)
    assert all(d.p_value is None for d in report.dip)


def test_all_noise_bundle_has_no_retained_spaces():
    spec = SynthSpec(m=5, n=300, d=4, k=3, seed=2, corrupt=frozenset(range(5)))
    bundle = SynthService.generate_bundle(spec)
    cfg = AceConfig(index=IndexId.SILHOUETTE_EUCLIDEAN, dip_replicates=200)
    with pytest.raises(AceError) as exc:
        ace(bundle, cfg)
    assert exc.value.kind is ErrorKind.NO_RETAINED_SPACES
    assert exc.value.stage == "dip_screening"
    assert exc.value.exit_code == 2

    pooled = PipelineService(cfg.model_copy(update={"pool_without_dip": True})).pooled_score(bundle)
    assert pooled.shape == (5,)


def test_ace_needs_two_trials():
    x, labels = blobs(np.random.default_rng(0), k=2, per_cluster=5)
    bundle = TrialBundle(trials=(make_trial("a", x, labels),))
    with pytest.raises(AceError):
        ace(bundle, AceConfig(index=IndexId.DUNN))


def test_rescue_without_outliers_keeps_selection():
    subgroups = [_subgroup(0, [1, 2, 3]), _subgroup(1, [0, 1, 2])]
    selected, diagnostic = PipelineService.apply_outlier_rescue(subgroups, 0)
    assert selected == 0
    assert not diagnostic.replaced


def test_rescue_dominating_outlier_is_selected():
    subgroups = [_subgroup(0, [1, 2, 3, 4, 5]), _subgroup(1, [2, 3, 4, 5, 6], outlier=True)]
    selected, diagnostic = PipelineService.apply_outlier_rescue(subgroups, 0)
    assert selected == 1
    assert diagnostic.replaced
    assert diagnostic.p_value == 0.0


def test_rescue_keeps_selection_when_test_is_not_significant():
    base = np.arange(1.0, 7.0)
    outlier = base + np.array([2.0, -1.0, 2.0, -1.0, 2.0, -1.0])
    subgroups = [_subgroup(0, base), _subgroup(1, outlier, outlier=True)]
    assert subgroups[1].mean > subgroups[0].mean
    selected, diagnostic = PipelineService.apply_outlier_rescue(subgroups, 0)
    assert selected == 0
    assert diagnostic.p_value > 0.05


def test_rescue_variant_matches_ace_without_outliers(small_bundle, fast_config):
    plain = ace(small_bundle, fast_config)
    rescued = ace_with_outlier_rescue(small_bundle, fast_config)
    if not any(s.is_outlier for s in plain.subgroups):
        assert rescued.scores == plain.scores
    assert rescued.rescue is not None


def test_select_subgroup_tie_break():
    subgroups = [_subgroup(0, [1.0, 1.0], outlier=True), _subgroup(1, [1.0, 1.0]), _subgroup(2, [0.0, 0.0])]
    assert PipelineService.select_subgroup(subgroups) == 1


def test_regime_table_against_truth(small_bundle, fast_config):
    report = ace(small_bundle, fast_config)
    externals = PipelineService.external_vectors(small_bundle)
    nmi = externals[ExternalMeasure.NMI]
    report = report.model_copy(update={"scores": {**report.scores, Regime.PAIRED: nmi.tolist()}})

    rows = PipelineService.evaluate_regimes(report, None, small_bundle)
    paired = next(r for r in rows if r.regime is Regime.PAIRED and r.external is ExternalMeasure.NMI)
    assert paired.r_s == pytest.approx(1.0)
    assert paired.tau_b == pytest.approx(1.0)

    reversed_report = report.model_copy(update={"scores": {Regime.ACE: (-nmi).tolist()}})
    row = PipelineService.regime_table(reversed_report, externals)[0]
    assert row.r_s == pytest.approx(-1.0)


def test_external_vectors_need_truth():
    x, labels = blobs(np.random.default_rng(0), k=2, per_cluster=5)
    bundle = TrialBundle(trials=(make_trial("a", x, labels),))
    with pytest.raises(AceError) as exc:
        PipelineService.external_vectors(bundle)
    assert exc.value.kind is ErrorKind.MISSING_TRUTH


def test_evaluate_regimes_checks_ids(small_bundle, fast_config):
    report = ace(small_bundle, fast_config)
    shuffled = report.model_copy(update={"trial_ids": list(reversed(report.trial_ids))})
    with pytest.raises(AceError) as exc:
        PipelineService.evaluate_regimes(shuffled, None, small_bundle)
    assert exc.value.kind is ErrorKind.ID_MISMATCH


def test_ace_beats_paired_on_adversarial_bundles():
    wins = 0
    seeds = range(5)
    for seed in seeds:
        m = 8
        spec = SynthSpec(
            m=m, n=200, d=8, k=4, seed=seed,
            corrupt=frozenset({2, 5}),
            label_noise=tuple(np.linspace(0.0, 0.4, m)),
            separations=tuple(np.linspace(4.0, 9.0, m)),
        )
        bundle = SynthService.generate_bundle(spec)
        cfg = AceConfig(index=IndexId.SILHOUETTE_EUCLIDEAN, dip_replicates=200, seed=seed)
        report = ace(bundle, cfg)
        nmi = PipelineService.external_vectors(bundle)[ExternalMeasure.NMI]
        ace_rs = StatsService.spearman(report.scores[Regime.ACE], nmi)
        paired_rs = StatsService.spearman(np.array(report.scores[Regime.PAIRED], dtype=float), nmi)
        wins += ace_rs >= paired_rs
    assert wins >= 4


def test_embedding_matrix_is_read_only(two_trial_bundle):
    with pytest.raises(ValueError):
        two_trial_bundle.trials[0].embedding.values[0, 0] = 1.0
    assert isinstance(two_trial_bundle.raw_input, EmbeddingMatrix)


BASE_ROW = np.arange(1.0, 7.0)


def _six_space_bundle():
    x, labels = blobs(np.random.default_rng(2), k=2, per_cluster=6)
    return TrialBundle(trials=tuple(make_trial(f"t{i}", x, labels) for i in range(6)))


def _patched_run(monkeypatch, last_row, grouping, rescue=True):
    """Run ACE on six spaces with fixed scores and a fixed stage-wise grouping."""
    values = np.vstack([np.tile(BASE_ROW, (5, 1)), last_row])
    matrix = _matrix(values)
    monkeypatch.setattr(PipelineService, "score_matrix", lambda self, bundle, spaces=None: matrix)
    monkeypatch.setattr(GroupingService, "stagewise_group", staticmethod(lambda *args, **kwargs: grouping))
    cfg = AceConfig(index=IndexId.DUNN, skip_dip=True)
    service = PipelineService(cfg)
    bundle = _six_space_bundle()
    return service.run_with_outlier_rescue(bundle) if rescue else service.run(bundle)


PHASE1_OUTLIER = Grouping(
    assignment=(0, 0, 0, 0, 0, OUTLIER), subgroups=((0, 1, 2, 3, 4), (5,)), outliers=(5,)
)


def test_plain_ace_passes_over_a_better_phase1_outlier(monkeypatch):
    report = _patched_run(monkeypatch, BASE_ROW + 2.0, PHASE1_OUTLIER, rescue=False)
    assert report.subgroups[1].is_outlier
    assert report.subgroups[1].mean > report.subgroups[0].mean
    assert report.selected_subgroup == 0
    assert report.scores[Regime.ACE] == pytest.approx(BASE_ROW.tolist())


def test_rescue_end_to_end_keeps_selection_for_alternating_differences(monkeypatch):
    last = BASE_ROW + np.array([3.0, -2.0, 3.0, -2.0, 3.0, -2.0])
    report = _patched_run(monkeypatch, last, PHASE1_OUTLIER)
    assert report.subgroups[1].mean > report.subgroups[0].mean
    assert report.selected_subgroup == 0
    assert report.rescue.candidate == 1
    assert report.rescue.p_value > 0.05
    assert not report.rescue.replaced
    assert report.scores[Regime.ACE] == pytest.approx(BASE_ROW.tolist())


def test_rescue_end_to_end_swaps_in_a_significantly_better_outlier(monkeypatch):
    last = BASE_ROW + np.array([2.0, 2.1, 1.9, 2.0, 2.1, 1.9])
    report = _patched_run(monkeypatch, last, PHASE1_OUTLIER)
    assert report.rescue.replaced
    assert report.rescue.p_value <= 0.05
    assert report.selected_subgroup == 1
    assert report.selected_members == ["t5"]
    assert report.scores[Regime.ACE] == pytest.approx(last.tolist())


def test_scale_split_singleton_competes_as_a_regular_subgroup(monkeypatch):
    scale_split = Grouping(assignment=(0,) * 6, subgroups=((0, 1, 2, 3, 4), (5,)))
    report = _patched_run(monkeypatch, BASE_ROW + 2.0, scale_split)
    assert not report.subgroups[1].is_outlier
    assert report.selected_subgroup == 1
    assert report.rescue.candidate is None
    assert not report.rescue.replaced


def test_select_subgroup_falls_back_to_outliers_when_nothing_else_exists():
    subgroups = [_subgroup(0, [1.0, 2.0], outlier=True), _subgroup(1, [3.0, 4.0], outlier=True)]
    assert PipelineService.select_subgroup(subgroups) == 1


@pytest.mark.parametrize(
    "transform", [np.exp, lambda v: v ** 3, lambda v: 0.5 * v + 4.0], ids=["exp", "cube", "affine"]
)
def test_regime_table_ignores_increasing_transforms(monkeypatch, transform):
    report = _patched_run(monkeypatch, BASE_ROW[::-1] + 0.5, PHASE1_OUTLIER, rescue=False)
    rng = np.random.default_rng(4)
    externals = {ExternalMeasure.NMI: rng.uniform(size=6), ExternalMeasure.ACC: rng.uniform(size=6)}
    scores = dict(report.scores)
    scores[Regime.ACE] = transform(np.array(scores[Regime.ACE])).tolist()
    transformed = report.model_copy(update={"scores": scores})

    before = PipelineService.regime_table(report, externals)
    after = PipelineService.regime_table(transformed, externals)
    assert len(before) == len(after)
    for a, b in zip(before, after):
        assert (a.regime, a.external) == (b.regime, b.external)
        assert b.r_s == pytest.approx(a.r_s, abs=1e-12)
        assert b.tau_b == pytest.approx(a.tau_b, abs=1e-12)


def test_regime_table_warns_on_constant_scores(monkeypatch, caplog):
    report = _patched_run(monkeypatch, BASE_ROW + 2.0, PHASE1_OUTLIER, rescue=False)
    scores = dict(report.scores)
    scores[Regime.ACE] = [1.0] * 6
    externals = {ExternalMeasure.NMI: np.linspace(0.1, 0.9, 6)}
    rows = PipelineService.regime_table(report.model_copy(update={"scores": scores}), externals)
    ace_row = next(r for r in rows if r.regime is Regime.ACE)
    assert ace_row.r_s is None
    assert "ace vs NMI: rank correlation undefined" in caplog.text
