# app/commands/__init__.py
from .score import score
from .run import run
from .baselines import baselines
from .external import external
from .synth import synth
from .dimdemo import dimdemo
from .compare import compare

__all__ = ["score", "run", "baselines", "external", "synth", "dimdemo", "compare"]
