# app/core/config.py
from typing import List

from pydantic_settings import BaseSettings, SettingsConfigDict


class Settings(BaseSettings):
    # Dip screening
    dip_alpha: float = 0.05
    dip_replicates: int = 1000

    # Grouping
    grouping_method: str = "hdbscan"
    rank_method: str = "spearman"
    dbscan_eps: float = 0.1
    hdbscan_min_cluster_size: int = 2
    hdbscan_min_samples: int = 2

    # Link analysis
    edge_alpha: float = 0.1
    link_method: str = "pagerank"
    damping: float = 0.85
    link_tol: float = 1e-10

    # Indices
    cdbw_reps: int = 10
    cdbw_shrink_factors: List[float] = [0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8]

    # Selection
    rescue_alpha: float = 0.05
    seed: int = 0

    # Runtime
    threads: int = 1
    log_level: str = "INFO"
    matrix_format: str = "binary"
    report_name: str = "report.json"

    model_config = SettingsConfigDict(
        env_file=".env",
        env_prefix="ACE_",
        case_sensitive=False,
        extra="ignore",
    )


settings = Settings()
