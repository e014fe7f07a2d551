# app/commands/dimdemo.py
import click

from app.services.synth_service import SynthService
from app.utils.report_helpers import to_csv

from .options import parse_int_list


@click.command()
@click.option("--n", "n", type=int, default=100, show_default=True, help="Points per draw")
@click.option("--dims", default="2,20,200,2000", show_default=True, help="Ascending dimensions")
@click.option("--reps", type=int, default=20, show_default=True)
@click.option("--seed", type=int, default=1, show_default=True)
def dimdemo(n: int, dims: str, reps: int, seed: int):
    """Distance concentration and index collapse as the dimension grows."""
    stats = SynthService.concentration_demo(n, parse_int_list(dims, "--dims"), reps, seed)
    rows = zip(stats.dims, stats.ratio_median, stats.index_abs_median)
    click.echo(to_csv(["p", "ratio_median", "index_abs_median"], rows), nl=False)
