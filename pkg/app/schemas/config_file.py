# app/schemas/config_file.py
from typing import List, Optional

from pydantic import BaseModel, ConfigDict

from app.models.graph import LinkMethod
from app.models.grouping import GroupingMethod
from app.models.index import IndexId
from app.models.pipeline import RankMethod


class ConfigFile(BaseModel):
    """Schema for the --config JSON file; keys mirror AceConfig field names"""
    model_config = ConfigDict(extra="forbid")

    index: Optional[IndexId] = None
    dip_alpha: Optional[float] = None
    dip_replicates: Optional[int] = None
    edge_alpha: Optional[float] = None
    grouping_method: Optional[GroupingMethod] = None
    link_method: Optional[LinkMethod] = None
    seed: Optional[int] = None
    include_outlier_rescue: Optional[bool] = None
    pool_without_dip: Optional[bool] = None
    skip_dip: Optional[bool] = None
    test_edges: Optional[bool] = None
    rank_method: Optional[RankMethod] = None
    dbscan_eps: Optional[float] = None
    hdbscan_min_cluster_size: Optional[int] = None
    hdbscan_min_samples: Optional[int] = None
    damping: Optional[float] = None
    link_tol: Optional[float] = None
    cdbw_reps: Optional[int] = None
    cdbw_shrink_factors: Optional[List[float]] = None
    rescue_alpha: Optional[float] = None
    threads: Optional[int] = None

    def overrides(self) -> dict:
        return self.model_dump(exclude_none=True, exclude={"threads"})
