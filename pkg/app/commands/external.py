# app/commands/external.py
import click

from app.core import storage
from app.models.trial import Partition
from app.services.external_service import ExternalService
from app.utils.report_helpers import to_csv


@click.command()
@click.option("--pred", required=True, help="Predicted labels")
@click.option("--truth", required=True, help="Ground-truth labels")
def external(pred: str, truth: str):
    """NMI and clustering accuracy of a predicted partition."""
    predicted = Partition.from_labels(storage.read_labels(pred))
    reference = Partition.from_labels(storage.read_labels(truth))
    nmi = ExternalService.nmi(predicted, reference)
    acc = ExternalService.clustering_accuracy(reference, predicted)
    click.echo(to_csv(["nmi", "acc"], [[nmi, acc]]), nl=False)
