# app/commands/compare.py
import os

import click

from app.core import storage
from app.models.pipeline import ExternalMeasure
from app.services.bundle_service import BundleService
from app.services.pipeline_service import PipelineService
from app.utils.exceptions import ErrorKind, raise_error
from app.utils.report_helpers import regime_table_csv


def _load_externals(truth_path: str, expected_ids):
    """Externals from a bundle manifest (via its truth labels) or a trial_id,nmi,acc CSV."""
    if os.path.isdir(truth_path) or truth_path.endswith(".json"):
        bundle = BundleService.load_bundle(truth_path)
        ids = list(bundle.ids)
        externals = None
    else:
        ids, nmi, acc = storage.read_external_table(truth_path)
        externals = {ExternalMeasure.NMI: nmi, ExternalMeasure.ACC: acc}
    if ids != list(expected_ids):
        raise_error(ErrorKind.ID_MISMATCH, f"truth trial ids {ids} do not match the report's {list(expected_ids)}")
    if externals is None:
        externals = PipelineService.external_vectors(bundle)
    return externals


@click.command()
@click.option("--report", required=True, help="report.json written by run")
@click.option("--truth", required=True, help="Bundle manifest with truth, or CSV trial_id,nmi,acc")
def compare(report: str, truth: str):
    """Rank agreement of every regime with NMI and ACC as CSV."""
    ace_report = storage.read_report(report)
    externals = _load_externals(truth, ace_report.trial_ids)
    rows = PipelineService.regime_table(ace_report, externals)
    click.echo(regime_table_csv(rows), nl=False)
