# app/main.py
"""
Command-line entry point: global options, subcommand registration and the
mapping from failures to stable exit codes.
"""
import json
import logging
import sys
from typing import List, Optional

import click

from app.commands import baselines, compare, dimdemo, external, run, score, synth
from app.core.config import settings
from app.dependencies.deps import resolve_threads
from app.schemas.cli import CliInvocation, Subcommand
from app.services.pipeline_service import NO_RETAINED_REASON, POOLING_HINT
from app.utils.exceptions import (
    EXIT_IO,
    EXIT_OK,
    EXIT_SOFTWARE,
    EXIT_USAGE,
    AceError,
    ErrorKind,
)

logger = logging.getLogger(__name__)

LOG_FORMAT = "%(asctime)s %(levelname)s %(name)s: %(message)s"


def configure_logging(level: str) -> None:
    logging.basicConfig(stream=sys.stderr, level=level.upper(), format=LOG_FORMAT, force=True)


@click.group()
@click.option("--config", "config_path", default=None, help="JSON file with AceConfig field names")
@click.option("--threads", type=int, default=None, help="Worker threads for score cells and trials")
@click.option("--log-level", default=None, help="DEBUG, INFO, WARNING or ERROR")
@click.version_option("1.0.0", prog_name="ace")
@click.pass_context
def cli(ctx: click.Context, config_path: Optional[str], threads: Optional[int], log_level: Optional[str]):
    """Adaptive clustering evaluation for deep clustering trials."""
    configure_logging(log_level or settings.log_level)
    ctx.obj = CliInvocation(
        settings=settings,
        subcommand=Subcommand(ctx.invoked_subcommand) if ctx.invoked_subcommand else None,
        config_path=config_path,
        threads=resolve_threads(settings, config_path, threads),
    )


# Register subcommands
cli.add_command(score)
cli.add_command(run)
cli.add_command(baselines)
cli.add_command(external)
cli.add_command(synth)
cli.add_command(dimdemo)
cli.add_command(compare)


def _report_no_retained(exc: AceError) -> None:
    payload = {"error": exc.kind.value, "reason": NO_RETAINED_REASON, "hint": POOLING_HINT}
    click.echo(json.dumps(payload), err=True)


def main(argv: Optional[List[str]] = None) -> int:
    """Run the CLI and return its exit code instead of exiting"""
    try:
        rv = cli.main(args=argv, prog_name="ace", standalone_mode=False)
    except click.UsageError as exc:
        exc.show()
        return EXIT_USAGE
    except click.ClickException as exc:
        exc.show()
        return EXIT_IO if isinstance(exc, click.FileError) else EXIT_USAGE
    except click.Abort:
        click.echo("Aborted!", err=True)
        return EXIT_SOFTWARE
    except AceError as exc:
        if exc.kind is ErrorKind.NO_RETAINED_SPACES:
            _report_no_retained(exc)
        else:
            click.echo(f"error: {exc}", err=True)
        return exc.exit_code
    except OSError as exc:
        click.echo(f"error: {exc}", err=True)
        return EXIT_IO
    except Exception:
        logger.exception("Unexpected failure")
        return EXIT_SOFTWARE
    return rv if isinstance(rv, int) else EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
