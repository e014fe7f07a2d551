# app/services/pipeline_service.py
"""
Adaptive clustering evaluation (ACE) and the raw / paired / pooled baselines.

ACE screens every embedding space with a dip test, scores all partitions in
the retained spaces, groups the spaces that rank partitions alike, weights
each group's spaces by link analysis on its significant-correlation graph and
reports the aggregated scores of the group with the best average.
"""
import logging
from concurrent.futures import Executor
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from app.models.graph import LinkMethod, LinkWeights
from app.models.grouping import Grouping
from app.models.pipeline import (
    AceConfig,
    AceReport,
    DipDiagnostic,
    ExternalMeasure,
    GroupingReport,
    MissingCellReport,
    RankMethod,
    Regime,
    RegimeRow,
    RescueDiagnostic,
    SubgroupReport,
)
from app.models.score import ScoreMatrix
from app.models.trial import Partition, TrialBundle
from app.services.external_service import ExternalService
from app.services.grouping_service import GroupingParams, GroupingService
from app.services.index_service import IndexService
from app.services.link_service import LinkService
from app.services.stats_service import StatsService
from app.utils.exceptions import AceError, ErrorKind, raise_error
from app.utils.report_helpers import matrix_to_rows, nan_to_none, none_to_nan

logger = logging.getLogger(__name__)

NO_RETAINED_REASON = "no space rejected unimodality"
POOLING_HINT = (
    "no embedding space looks multimodal; pooling over all spaces directly "
    "(--pool-without-dip) may still give a usable ranking"
)


def _column_mean(rows: np.ndarray) -> np.ndarray:
    """Per-column mean over observed cells; NaN where a column has none."""
    observed = ~np.isnan(rows)
    counts = observed.sum(axis=0)
    totals = np.where(observed, rows, 0.0).sum(axis=0)
    with np.errstate(invalid="ignore", divide="ignore"):
        return np.where(counts > 0, totals / np.maximum(counts, 1), np.nan)


def _finite_mean(values: np.ndarray) -> Optional[float]:
    finite = values[~np.isnan(values)]
    return float(finite.mean()) if finite.size else None


class PipelineService:
    def __init__(self, cfg: AceConfig, executor: Optional[Executor] = None):
        self.cfg = cfg
        self.executor = executor
        self.grouping_params = GroupingParams(
            dbscan_eps=cfg.dbscan_eps,
            min_cluster_size=cfg.hdbscan_min_cluster_size,
            min_samples=cfg.hdbscan_min_samples,
        )

    # ------------------------------------------------------------------
    # Building blocks
    # ------------------------------------------------------------------
    def score_matrix(self, bundle: TrialBundle, spaces: Optional[Sequence[int]] = None) -> ScoreMatrix:
        try:
            return IndexService.compute_score_matrix(
                bundle,
                self.cfg.index,
                spaces=spaces,
                executor=self.executor,
                cdbw_reps=self.cfg.cdbw_reps,
                shrink_factors=self.cfg.cdbw_shrink_factors,
            )
        except AceError as exc:
            raise exc.with_stage("score_matrix")

    def screen(self, bundle: TrialBundle) -> List[DipDiagnostic]:
        """Dip test on each space's first principal component, Holm at dip_alpha."""
        cfg = self.cfg
        if cfg.skip_dip:
            return [DipDiagnostic(trial_id=t.id, retained=True, note="dip screening skipped") for t in bundle.trials]

        dips: List[Optional[float]] = []
        pvals: List[float] = []
        notes: List[Optional[str]] = []
        for trial in bundle.trials:
            try:
                projection = StatsService.pca_first_component(trial.embedding)
                result = StatsService.dip_pvalue(projection, cfg.dip_replicates, cfg.seed)
                dips.append(result.dip)
                pvals.append(result.p_value)
                notes.append(None)
            except AceError as exc:
                if exc.kind not in (ErrorKind.ZERO_VARIANCE, ErrorKind.TOO_FEW_POINTS):
                    raise exc.with_stage("dip_screening")
                dips.append(None)
                pvals.append(1.0)
                notes.append(exc.kind.value)

        reject = StatsService.holm_bonferroni(pvals, cfg.dip_alpha)
        diagnostics = [
            DipDiagnostic(trial_id=t.id, dip=dip, p_value=p, retained=bool(r), note=note)
            for t, dip, p, r, note in zip(bundle.trials, dips, pvals, reject, notes)
        ]
        logger.info(f"Dip screening retained {int(reject.sum())} of {bundle.m} spaces")
        return diagnostics

    def correlations(self, rows: np.ndarray) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Spearman matrix, the grouping/weight matrix (per rank_method) and pair counts."""
        m = rows.shape[0]
        spearman = np.eye(m)
        chosen = np.eye(m)
        counts = np.zeros((m, m), dtype=np.int64)
        for a in range(m):
            counts[a, a] = int(np.count_nonzero(~np.isnan(rows[a])))
            for b in range(a + 1, m):
                rc = StatsService.rank_correlation(rows[a], rows[b])
                rs = np.nan if rc.spearman_rs is None else rc.spearman_rs
                tau = np.nan if rc.kendall_tau_b is None else rc.kendall_tau_b
                spearman[a, b] = spearman[b, a] = rs
                chosen[a, b] = chosen[b, a] = tau if self.cfg.rank_method is RankMethod.KENDALL else rs
                counts[a, b] = counts[b, a] = rc.n
        return spearman, chosen, counts

    def link_weights(self, graph) -> LinkWeights:
        if self.cfg.link_method is LinkMethod.HITS:
            return LinkService.hits_authority(graph, tol=self.cfg.link_tol)
        return LinkService.pagerank(graph, damping=self.cfg.damping, tol=self.cfg.link_tol)

    # ------------------------------------------------------------------
    # Baselines
    # ------------------------------------------------------------------
    def raw_score(self, bundle: TrialBundle) -> np.ndarray:
        """Each partition scored on the shared raw input."""
        if bundle.raw_input is None:
            raise_error(ErrorKind.MISSING_RAW_INPUT, "bundle has no raw input")
        out = np.full(bundle.m, np.nan)
        for j, trial in enumerate(bundle.trials):
            try:
                out[j] = IndexService.compute_index(
                    self.cfg.index,
                    bundle.raw_input,
                    trial.partition,
                    cdbw_reps=self.cfg.cdbw_reps,
                    shrink_factors=self.cfg.cdbw_shrink_factors,
                ).oriented
            except AceError as exc:
                logger.warning(f"raw score of '{trial.id}' missing: {exc.kind.value}")
        return out

    def paired_score(self, bundle: TrialBundle, matrix: Optional[ScoreMatrix] = None) -> np.ndarray:
        matrix = matrix or self.score_matrix(bundle)
        return matrix.paired()

    def pooled_score(
        self,
        bundle: TrialBundle,
        matrix: Optional[ScoreMatrix] = None,
        dip: Optional[List[DipDiagnostic]] = None,
    ) -> np.ndarray:
        """Column means over retained spaces, or over all spaces with pool_without_dip."""
        matrix = matrix or self.score_matrix(bundle)
        if self.cfg.pool_without_dip:
            rows = list(range(bundle.m))
        else:
            dip = dip if dip is not None else self.screen(bundle)
            rows = [i for i, d in enumerate(dip) if d.retained]
            if not rows:
                raise AceError(ErrorKind.NO_RETAINED_SPACES, NO_RETAINED_REASON, stage="dip_screening")
        return _column_mean(matrix.values[rows])

    # ------------------------------------------------------------------
    # ACE
    # ------------------------------------------------------------------
    def run(self, bundle: TrialBundle) -> AceReport:
        cfg = self.cfg
        if bundle.m < 2:
            raise_error(ErrorKind.INVALID_PARAMS, "ACE needs at least two trials")
        ids = list(bundle.ids)

        dip = self.screen(bundle)
        retained = [i for i, d in enumerate(dip) if d.retained]
        if not retained:
            raise AceError(ErrorKind.NO_RETAINED_SPACES, NO_RETAINED_REASON, stage="dip_screening")

        logger.info(f"Scoring {bundle.m} partitions in {bundle.m} spaces with {cfg.index.value}")
        matrix = self.score_matrix(bundle)
        rows = matrix.values[retained]

        spearman, chosen, counts = self.correlations(rows)
        try:
            if len(retained) == 1:
                grouping = Grouping(assignment=(0,), subgroups=((0,),))
            else:
                grouping = GroupingService.stagewise_group(chosen, rows, cfg.grouping_method, self.grouping_params)
        except AceError as exc:
            raise exc.with_stage("grouping")

        subgroups = []
        try:
            for sid, members in enumerate(grouping.subgroups):
                subgroups.append(self._summarize_subgroup(sid, members, grouping, rows, spearman, chosen, counts, retained, ids))
        except AceError as exc:
            raise exc.with_stage("link_analysis")

        selected = self.select_subgroup(subgroups)
        logger.info(f"Selected subgroup {selected} of {len(subgroups)}: {subgroups[selected].members}")

        paired = matrix.paired()
        scores: Dict[Regime, List[Optional[float]]] = {}
        if bundle.raw_input is not None:
            scores[Regime.RAW] = nan_to_none(self.raw_score(bundle))
        scores[Regime.PAIRED] = nan_to_none(paired)
        scores[Regime.POOLED] = nan_to_none(self.pooled_score(bundle, matrix, dip))
        scores[Regime.ACE] = list(subgroups[selected].scores)

        return AceReport(
            index=cfg.index,
            config=cfg,
            trial_ids=ids,
            scores=scores,
            paired_raw=nan_to_none(matrix.paired_raw()),
            dip=dip,
            retained=[ids[i] for i in retained],
            score_matrix=matrix_to_rows(matrix.values),
            missing_cells=[
                MissingCellReport(space=matrix.space_ids[c.row], partition=matrix.partition_ids[c.col], reason=c.reason)
                for c in matrix.missing
            ],
            correlation=matrix_to_rows(chosen),
            grouping=GroupingReport(
                method=cfg.grouping_method,
                phase1=list(grouping.assignment),
                outliers=[ids[retained[i]] for i in grouping.outliers],
                subgroups=[[ids[retained[i]] for i in g] for g in grouping.subgroups],
            ),
            subgroups=subgroups,
            selected_subgroup=selected,
            selected_members=subgroups[selected].members,
        )

    def _summarize_subgroup(self, sid, members, grouping, rows, spearman, chosen, counts, retained, ids) -> SubgroupReport:
        members = list(members)
        if len(members) == 1:
            weights = LinkWeights(values=np.ones(1))
            edges = []
            aggregated = rows[members[0]].copy()
        else:
            block = np.ix_(members, members)
            graph = LinkService.build_graph(
                spearman[block],
                counts[block],
                self.cfg.edge_alpha,
                members=[retained[i] for i in members],
                test_edges=self.cfg.test_edges,
                weights=chosen[block],
            )
            weights = self.link_weights(graph)
            edges = graph.edges()
            aggregated = LinkService.aggregate_scores(rows, members, weights)

        return SubgroupReport(
            id=sid,
            members=[ids[retained[i]] for i in members],
            is_outlier=grouping.is_outlier_subgroup(members),
            weights=[float(w) for w in weights.values],
            edges=edges,
            scores=nan_to_none(aggregated),
            mean=_finite_mean(aggregated),
        )

    @staticmethod
    def select_subgroup(subgroups: List[SubgroupReport]) -> int:
        """
        Largest aggregated mean among the admissible subgroups

        Singletons made from phase-1 outliers are left out of the ensemble and
        only chosen when nothing else exists. Ties go to the larger subgroup,
        then the lower id.
        """
        def key(s: SubgroupReport):
            mean = s.mean if s.mean is not None else -np.inf
            return (mean, len(s.members), -s.id)
        admissible = [s for s in subgroups if not s.is_outlier] or subgroups
        return max(admissible, key=key).id

    def run_with_outlier_rescue(self, bundle: TrialBundle) -> AceReport:
        report = self.run(bundle)
        selected, diagnostic = self.apply_outlier_rescue(report.subgroups, report.selected_subgroup, self.cfg.rescue_alpha)
        update = {"rescue": diagnostic}
        if selected != report.selected_subgroup:
            chosen = report.subgroups[selected]
            scores = dict(report.scores)
            scores[Regime.ACE] = list(chosen.scores)
            update.update(scores=scores, selected_subgroup=selected, selected_members=chosen.members)
            logger.info(f"Outlier rescue replaced the selection with subgroup {selected}")
        return report.model_copy(update=update)

    @staticmethod
    def apply_outlier_rescue(
        subgroups: List[SubgroupReport], selected: int, alpha: float = 0.05
    ) -> Tuple[int, RescueDiagnostic]:
        """
        Swap in the best outlier singleton when it beats the selection

        The swap needs a one-sided paired t-test (outlier > selection across
        partitions) significant at alpha.
        """
        current = subgroups[selected]
        candidates = [s for s in subgroups if s.is_outlier and s.mean is not None and s.id != selected]
        if not candidates:
            return selected, RescueDiagnostic(note="no outlier singletons")
        best = max(candidates, key=lambda s: (s.mean, -s.id))
        if current.mean is not None and best.mean <= current.mean:
            return selected, RescueDiagnostic(candidate=best.id, note="outlier mean does not exceed the selection")
        try:
            p = StatsService.paired_t_test_onesided(none_to_nan(best.scores), none_to_nan(current.scores))
        except AceError as exc:
            return selected, RescueDiagnostic(candidate=best.id, note=exc.kind.value)
        replaced = p <= alpha
        return (best.id if replaced else selected), RescueDiagnostic(candidate=best.id, p_value=p, replaced=replaced)

    # ------------------------------------------------------------------
    # Evaluation against external truth
    # ------------------------------------------------------------------
    @staticmethod
    def external_vectors(bundle: TrialBundle, truth: Optional[Partition] = None) -> Dict[ExternalMeasure, np.ndarray]:
        truth = truth if truth is not None else bundle.truth
        if truth is None:
            raise_error(ErrorKind.MISSING_TRUTH, "no ground-truth partition available")
        return {
            ExternalMeasure.NMI: np.array([ExternalService.nmi(t.partition, truth) for t in bundle.trials]),
            ExternalMeasure.ACC: np.array([ExternalService.clustering_accuracy(truth, t.partition) for t in bundle.trials]),
        }

    @staticmethod
    def regime_table(report: AceReport, externals: Dict[ExternalMeasure, np.ndarray]) -> List[RegimeRow]:
        """Spearman and Kendall between every regime's scores and every external vector."""
        rows = []
        for regime in Regime:
            scores = report.scores.get(regime)
            if scores is None:
                continue
            for measure, values in externals.items():
                rc = StatsService.rank_correlation(none_to_nan(scores), values)
                if not rc.defined:
                    logger.warning(f"{regime.value} vs {measure.value}: rank correlation undefined on {rc.n} trials")
                rows.append(RegimeRow(regime=regime, external=measure, r_s=rc.spearman_rs, tau_b=rc.kendall_tau_b))
        return rows

    @staticmethod
    def evaluate_regimes(report: AceReport, truth: Optional[Partition], bundle: TrialBundle) -> List[RegimeRow]:
        if list(report.trial_ids) != list(bundle.ids):
            raise_error(ErrorKind.ID_MISMATCH, "report trial ids do not match the bundle")
        return PipelineService.regime_table(report, PipelineService.external_vectors(bundle, truth))


def ace(bundle: TrialBundle, cfg: AceConfig, executor: Optional[Executor] = None) -> AceReport:
    return PipelineService(cfg, executor).run(bundle)


def ace_with_outlier_rescue(bundle: TrialBundle, cfg: AceConfig, executor: Optional[Executor] = None) -> AceReport:
    return PipelineService(cfg, executor).run_with_outlier_rescue(bundle)


def run_configured(bundle: TrialBundle, cfg: AceConfig, executor: Optional[Executor] = None) -> AceReport:
    """ACE, with the outlier-rescue variant when the config asks for it."""
    service = PipelineService(cfg, executor)
    if cfg.include_outlier_rescue:
        return service.run_with_outlier_rescue(bundle)
    return service.run(bundle)
