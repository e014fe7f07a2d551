# app/commands/run.py
import logging
import os

import click

from app.core import storage
from app.dependencies.deps import build_config, get_executor
from app.models.graph import LinkMethod
from app.models.grouping import GroupingMethod
from app.models.index import IndexId
from app.models.pipeline import RankMethod
from app.services.bundle_service import BundleService
from app.services.pipeline_service import run_configured

from .options import INDEX_CHOICES, flag

logger = logging.getLogger(__name__)


@click.command()
@click.option("--trials", required=True, help="Bundle directory or manifest.json")
@click.option("--index", type=click.Choice(INDEX_CHOICES), default=None, help="Internal validity index id")
@click.option("--dip-alpha", type=float, default=None)
@click.option("--dip-replicates", type=int, default=None)
@click.option("--edge-alpha", type=float, default=None)
@click.option("--grouping", type=click.Choice([g.value for g in GroupingMethod]), default=None)
@click.option("--link", type=click.Choice([m.value for m in LinkMethod]), default=None)
@click.option("--rank-method", type=click.Choice([r.value for r in RankMethod]), default=None)
@click.option("--seed", type=int, default=None)
@click.option("--pool-without-dip", is_flag=True, help="Pool over all spaces in the pooled baseline")
@click.option("--outlier-rescue", is_flag=True, help="Let a significantly better outlier space replace the selection")
@click.option("--skip-dip", is_flag=True, help="Retain every space without the dip test")
@click.option("--all-edges", is_flag=True, help="Keep every positive correlation as an edge")
@click.option("--out", default=None, help="Report path (default ./report.json)")
@click.option("--score-matrix-out", default=None, help="Also write the score matrix as CSV to this path")
@click.pass_obj
def run(invocation, trials, index, dip_alpha, dip_replicates, edge_alpha, grouping, link, rank_method,
        seed, pool_without_dip, outlier_rescue, skip_dip, all_edges, out, score_matrix_out):
    """Run adaptive clustering evaluation and write report.json."""
    cfg = build_config(
        invocation.settings,
        invocation.config_path,
        index=IndexId(index) if index else None,
        dip_alpha=dip_alpha,
        dip_replicates=dip_replicates,
        edge_alpha=edge_alpha,
        grouping_method=grouping,
        link_method=link,
        rank_method=rank_method,
        seed=seed,
        pool_without_dip=flag(pool_without_dip),
        include_outlier_rescue=flag(outlier_rescue),
        skip_dip=flag(skip_dip),
        test_edges=False if all_edges else None,
    )
    bundle = BundleService.load_bundle(trials)
    with get_executor(invocation.threads) as executor:
        report = run_configured(bundle, cfg, executor)

    out = out or os.path.join(".", invocation.settings.report_name)
    storage.write_report(out, report)
    if score_matrix_out:
        storage.write_score_matrix(score_matrix_out, report)
    click.echo(out)
