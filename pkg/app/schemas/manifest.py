# app/schemas/manifest.py
from typing import List, Optional

from pydantic import BaseModel, ConfigDict


class TrialEntry(BaseModel):
    """Schema for one trial entry of a bundle manifest"""
    model_config = ConfigDict(extra="forbid")

    id: str
    embedding: str
    labels: str


class ManifestMetadata(BaseModel):
    """Schema for optional dataset metadata checked at load time"""
    dataset: Optional[str] = None
    n: Optional[int] = None
    k: Optional[int] = None


class BundleManifest(BaseModel):
    """Schema for manifest.json; paths are relative to the manifest's directory"""
    model_config = ConfigDict(extra="forbid")

    trials: List[TrialEntry]
    raw_input: Optional[str] = None
    truth: Optional[str] = None
    metadata: Optional[ManifestMetadata] = None
