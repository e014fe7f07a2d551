# app/models/pipeline.py
from enum import Enum
from typing import Dict, List, Optional, Tuple

from pydantic import BaseModel, ConfigDict, Field, field_validator

from app.models.graph import Edge, LinkMethod
from app.models.grouping import GroupingMethod
from app.models.index import IndexId


class RankMethod(str, Enum):
    SPEARMAN = "spearman"
    KENDALL = "kendall"


class Regime(str, Enum):
    RAW = "raw"
    PAIRED = "paired"
    POOLED = "pooled"
    ACE = "ace"


class ExternalMeasure(str, Enum):
    NMI = "NMI"
    ACC = "ACC"


class AceConfig(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")

    index: IndexId
    dip_alpha: float = 0.05
    dip_replicates: int = Field(default=1000, ge=1)
    edge_alpha: float = 0.1
    grouping_method: GroupingMethod = GroupingMethod.HDBSCAN
    link_method: LinkMethod = LinkMethod.PAGERANK
    seed: int = Field(default=0, ge=0)
    include_outlier_rescue: bool = False
    pool_without_dip: bool = False

    # Ablations and tuning
    skip_dip: bool = False
    test_edges: bool = True
    rank_method: RankMethod = RankMethod.SPEARMAN
    dbscan_eps: float = Field(default=0.1, gt=0.0)
    hdbscan_min_cluster_size: int = Field(default=2, ge=2)
    hdbscan_min_samples: int = Field(default=2, ge=1)
    damping: float = Field(default=0.85, gt=0.0, lt=1.0)
    link_tol: float = Field(default=1e-10, gt=0.0)
    cdbw_reps: int = Field(default=10, ge=1)
    cdbw_shrink_factors: Tuple[float, ...] = (0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8)
    rescue_alpha: float = 0.05

    @field_validator("dip_alpha", "edge_alpha", "rescue_alpha")
    @classmethod
    def check_alpha(cls, v: float) -> float:
        if not 0.0 < v < 1.0:
            raise ValueError("alpha must lie in (0, 1)")
        return v

    @field_validator("cdbw_shrink_factors")
    @classmethod
    def check_shrink(cls, v: Tuple[float, ...]) -> Tuple[float, ...]:
        if not v or any(not 0.0 < s < 1.0 for s in v):
            raise ValueError("shrink factors must be a non-empty sequence in (0, 1)")
        return v


class DipDiagnostic(BaseModel):
    trial_id: str
    dip: Optional[float] = None
    p_value: Optional[float] = None
    retained: bool
    note: Optional[str] = None


class MissingCellReport(BaseModel):
    space: str
    partition: str
    reason: str


class SubgroupReport(BaseModel):
    id: int
    members: List[str]
    is_outlier: bool = False
    weights: List[float]
    edges: List[Edge] = []
    scores: List[Optional[float]]
    mean: Optional[float] = None


class RescueDiagnostic(BaseModel):
    candidate: Optional[int] = None
    p_value: Optional[float] = None
    replaced: bool = False
    note: Optional[str] = None


class GroupingReport(BaseModel):
    method: GroupingMethod
    phase1: List[int]
    outliers: List[str]
    subgroups: List[List[str]]


class AceReport(BaseModel):
    """Per-trial scores for each regime plus the full pipeline diagnostics"""

    index: IndexId
    config: AceConfig
    trial_ids: List[str]
    scores: Dict[Regime, List[Optional[float]]]
    paired_raw: List[Optional[float]]
    dip: List[DipDiagnostic]
    retained: List[str]
    score_matrix: List[List[Optional[float]]]
    missing_cells: List[MissingCellReport]
    correlation: List[List[Optional[float]]]
    grouping: Optional[GroupingReport] = None
    subgroups: List[SubgroupReport]
    selected_subgroup: int
    selected_members: List[str]
    rescue: Optional[RescueDiagnostic] = None


class RegimeRow(BaseModel):
    regime: Regime
    external: ExternalMeasure
    r_s: Optional[float] = None
    tau_b: Optional[float] = None
