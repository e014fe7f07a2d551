# app/schemas/__init__.py
from .manifest import BundleManifest, ManifestMetadata, TrialEntry
from .config_file import ConfigFile
from .cli import CliInvocation, Subcommand

__all__ = ["BundleManifest", "ManifestMetadata", "TrialEntry", "ConfigFile", "CliInvocation", "Subcommand"]
