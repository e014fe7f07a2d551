# app/commands/synth.py
import click

from app.dependencies.deps import get_executor
from app.models.synth import SynthSpec
from app.services.bundle_service import BundleService
from app.services.synth_service import SynthService

from .options import parse_float_list, parse_int_list


@click.command()
@click.option("--m", "m", type=int, required=True, help="Number of trials")
@click.option("--n", "n", type=int, required=True, help="Observations per trial")
@click.option("--d", "d", type=int, required=True, help="Embedding dimension")
@click.option("--k", "k", type=int, required=True, help="True clusters")
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--out", required=True, help="Bundle directory to write")
@click.option("--corrupt", default=None, help="Trial indices replaced by unimodal noise, e.g. 0,3")
@click.option("--label-noise", default=None, help="Per-trial flip fractions, e.g. 0,0.1,0.2")
@click.option("--separations", default=None, help="Per-trial center distances in sigma units")
@click.option("--format", "fmt", type=click.Choice(["binary", "csv"]), default=None, help="Matrix file format")
@click.pass_obj
def synth(invocation, m, n, d, k, seed, out, corrupt, label_noise, separations, fmt):
    """Write a seeded synthetic trial bundle; prints the manifest path."""
    spec = SynthSpec(
        m=m,
        n=n,
        d=d,
        k=k,
        seed=seed,
        corrupt=frozenset(parse_int_list(corrupt, "--corrupt")),
        label_noise=parse_float_list(label_noise, "--label-noise"),
        separations=parse_float_list(separations, "--separations"),
    )
    with get_executor(invocation.threads) as executor:
        bundle = SynthService.generate_bundle(spec, executor)
    click.echo(BundleService.save_bundle(bundle, out, fmt))
