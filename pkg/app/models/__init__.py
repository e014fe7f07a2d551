# app/models/__init__.py
from .trial import EmbeddingMatrix, Partition, Trial, TrialBundle
from .index import IndexId, IndexValue, Orientation
from .score import MissingCell, ScoreMatrix
from .stats import ContingencyTable, DipResult, RankCorrelation
from .grouping import OUTLIER, DistanceMatrix, Grouping, GroupingMethod
from .graph import CorrelationGraph, Edge, LinkMethod, LinkWeights
from .pipeline import (
    AceConfig, AceReport, DipDiagnostic, ExternalMeasure, GroupingReport,
    MissingCellReport, RankMethod, Regime, RegimeRow, RescueDiagnostic, SubgroupReport,
)
from .synth import ConcentrationStats, SynthSpec

__all__ = [
    "EmbeddingMatrix", "Partition", "Trial", "TrialBundle",
    "IndexId", "IndexValue", "Orientation",
    "MissingCell", "ScoreMatrix",
    "ContingencyTable", "DipResult", "RankCorrelation",
    "OUTLIER", "DistanceMatrix", "Grouping", "GroupingMethod",
    "CorrelationGraph", "Edge", "LinkMethod", "LinkWeights",
    "AceConfig", "AceReport", "DipDiagnostic", "ExternalMeasure", "GroupingReport",
    "MissingCellReport", "RankMethod", "Regime", "RegimeRow", "RescueDiagnostic", "SubgroupReport",
    "ConcentrationStats", "SynthSpec",
]
