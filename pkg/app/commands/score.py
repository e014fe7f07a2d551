# app/commands/score.py
import logging

import click

from app.core import storage
from app.models.index import IndexId
from app.models.trial import EmbeddingMatrix, Partition
from app.services.index_service import IndexService
from app.utils.exceptions import AceError
from app.utils.report_helpers import to_csv

from .options import index_option

logger = logging.getLogger(__name__)


@click.command()
@click.option("--embedding", required=True, help="Embedding matrix (CSV or EMB1)")
@click.option("--labels", required=True, help="Label file, one integer per line")
@index_option(allow_all=True)
@click.pass_obj
def score(invocation, embedding: str, labels: str, index: str):
    """Score one partition in one space: prints index,raw,oriented."""
    z = EmbeddingMatrix(values=storage.read_matrix(embedding))
    rho = Partition.from_labels(storage.read_labels(labels))
    ids = list(IndexId) if index == "all" else [IndexId(index)]
    settings = invocation.settings

    rows = []
    for index_id in ids:
        try:
            value = IndexService.compute_index(
                index_id, z, rho,
                cdbw_reps=settings.cdbw_reps,
                shrink_factors=tuple(settings.cdbw_shrink_factors),
            )
            rows.append([index_id.value, value.raw, value.oriented])
        except AceError as exc:
            if len(ids) == 1:
                raise
            click.echo(f"{index_id.value}: {exc}", err=True)
            rows.append([index_id.value, None, None])
    click.echo(to_csv(["index", "raw", "oriented"], rows), nl=False)
