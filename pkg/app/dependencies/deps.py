# app/dependencies/deps.py
"""
Shared providers for command handlers: effective configuration and worker pool.

Precedence for every AceConfig field: command-line flag, then --config file,
then ACE_* environment / .env settings, then the model default.
"""
from concurrent.futures import Executor, ThreadPoolExecutor
from contextlib import contextmanager
from typing import Iterator, Optional

from pydantic import ValidationError

from app.core import storage
from app.core.config import Settings
from app.models.index import IndexId
from app.models.pipeline import AceConfig
from app.schemas.config_file import ConfigFile
from app.utils.exceptions import raise_usage


def settings_defaults(settings: Settings) -> dict:
    """AceConfig fields taken from environment settings"""
    return {
        "dip_alpha": settings.dip_alpha,
        "dip_replicates": settings.dip_replicates,
        "edge_alpha": settings.edge_alpha,
        "grouping_method": settings.grouping_method,
        "link_method": settings.link_method,
        "seed": settings.seed,
        "rank_method": settings.rank_method,
        "dbscan_eps": settings.dbscan_eps,
        "hdbscan_min_cluster_size": settings.hdbscan_min_cluster_size,
        "hdbscan_min_samples": settings.hdbscan_min_samples,
        "damping": settings.damping,
        "link_tol": settings.link_tol,
        "cdbw_reps": settings.cdbw_reps,
        "cdbw_shrink_factors": tuple(settings.cdbw_shrink_factors),
        "rescue_alpha": settings.rescue_alpha,
    }


def load_config_file(config_path: Optional[str]) -> ConfigFile:
    if not config_path:
        return ConfigFile()
    try:
        return ConfigFile.model_validate(storage.read_json(config_path))
    except ValidationError as exc:
        raise_usage(f"invalid config file {config_path}: {exc.errors()[0]['msg']}")


def build_config(
    settings: Settings,
    config_path: Optional[str] = None,
    index: Optional[IndexId] = None,
    **flags,
) -> AceConfig:
    """
    Merge settings, the optional config file and explicit flags

    Args:
        settings: Environment-backed defaults
        config_path: Optional JSON file mirroring AceConfig field names
        index: Index id from the command line
        **flags: Flag values; None means "not given"

    Returns:
        Validated AceConfig

    Raises:
        AceError: UsageError when the merged values are invalid or no index is set
    """
    values = settings_defaults(settings)
    values.update(load_config_file(config_path).overrides())
    values.update({k: v for k, v in flags.items() if v is not None})
    if index is not None:
        values["index"] = index
    if "index" not in values:
        raise_usage("an index is required (--index or the config file)")
    try:
        return AceConfig(**values)
    except ValidationError as exc:
        error = exc.errors()[0]
        field = ".".join(str(p) for p in error["loc"])
        raise_usage(f"invalid value for {field}: {error['msg']}")


def resolve_threads(settings: Settings, config_path: Optional[str], threads: Optional[int]) -> int:
    if threads is None:
        threads = load_config_file(config_path).threads
    if threads is None:
        threads = settings.threads
    if threads < 1:
        raise_usage(f"--threads must be at least 1, got {threads}")
    return threads


@contextmanager
def get_executor(threads: int) -> Iterator[Optional[Executor]]:
    """Thread pool for score cells and trial generation; None runs inline"""
    if threads <= 1:
        yield None
        return
    with ThreadPoolExecutor(max_workers=threads) as pool:
        yield pool
