# app/commands/baselines.py
import click

from app.dependencies.deps import build_config, get_executor
from app.models.index import IndexId
from app.services.bundle_service import BundleService
from app.services.pipeline_service import PipelineService
from app.utils.report_helpers import baselines_csv

from .options import INDEX_CHOICES, flag


@click.command()
@click.option("--trials", required=True, help="Bundle directory or manifest.json")
@click.option("--index", type=click.Choice(INDEX_CHOICES), default=None, help="Internal validity index id")
@click.option("--dip-alpha", type=float, default=None)
@click.option("--seed", type=int, default=None)
@click.option("--pool-without-dip", is_flag=True, help="Pool over all spaces instead of the dip-retained ones")
@click.pass_obj
def baselines(invocation, trials, index, dip_alpha, seed, pool_without_dip):
    """Raw, paired and pooled scores per trial as CSV."""
    cfg = build_config(
        invocation.settings,
        invocation.config_path,
        index=IndexId(index) if index else None,
        dip_alpha=dip_alpha,
        seed=seed,
        pool_without_dip=flag(pool_without_dip),
    )
    bundle = BundleService.load_bundle(trials)
    with get_executor(invocation.threads) as executor:
        service = PipelineService(cfg, executor)
        matrix = service.score_matrix(bundle)
        raw = service.raw_score(bundle) if bundle.raw_input is not None else None
        columns = {
            "raw": raw,
            "paired": service.paired_score(bundle, matrix),
            "pooled": service.pooled_score(bundle, matrix),
        }
    click.echo(baselines_csv(bundle.ids, columns), nl=False)
