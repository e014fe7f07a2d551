# app/commands/options.py
"""
Option types and parsers shared by the subcommands
"""
from typing import List, Optional

import click

from app.models.index import IndexId

INDEX_CHOICES = [i.value for i in IndexId]


def index_option(allow_all: bool = False):
    choices = INDEX_CHOICES + (["all"] if allow_all else [])
    return click.option(
        "--index",
        "index",
        type=click.Choice(choices),
        required=not allow_all,
        default="all" if allow_all else None,
        help="Internal validity index id",
    )


def parse_int_list(value: Optional[str], name: str) -> List[int]:
    """Parse "1,2,3" into integers; empty or None gives []"""
    if not value:
        return []
    try:
        return [int(part) for part in value.split(",") if part.strip()]
    except ValueError:
        raise click.BadParameter(f"expected comma-separated integers, got '{value}'", param_hint=name)


def parse_float_list(value: Optional[str], name: str) -> Optional[List[float]]:
    if not value:
        return None
    try:
        return [float(part) for part in value.split(",") if part.strip()]
    except ValueError:
        raise click.BadParameter(f"expected comma-separated numbers, got '{value}'", param_hint=name)


def flag(value: bool) -> Optional[bool]:
    """An absent on-flag must not override the config file"""
    return True if value else None
