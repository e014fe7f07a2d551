# app/schemas/cli.py
from enum import Enum
from typing import Optional

from pydantic import BaseModel, ConfigDict

from app.core.config import Settings


class Subcommand(str, Enum):
    SCORE = "score"
    RUN = "run"
    BASELINES = "baselines"
    EXTERNAL = "external"
    SYNTH = "synth"
    DIMDEMO = "dimdemo"
    COMPARE = "compare"


class CliInvocation(BaseModel):
    """Schema for the global options shared by every subcommand"""
    model_config = ConfigDict(arbitrary_types_allowed=True)

    settings: Settings
    subcommand: Optional[Subcommand] = None
    config_path: Optional[str] = None
    threads: int = 1
