"""Pydantic request/response models for the catalog service."""

from __future__ import annotations

from typing import Optional

from pydantic import BaseModel, Field


class SourceCreate(BaseModel):
    location: str
    type: str
    name: str
    owner: str
    administrator: Optional[str] = None
    stream_origin_id: Optional[str] = None


class SourceCreated(BaseModel):
    id: str


class IngestRequest(BaseModel):
    mode: str = "batch"
    comment: str = ""
    defined_duration: Optional[float] = None
    windows: int = Field(default=1, ge=1)


class IngestRun(BaseModel):
    ingest_id: str
    dataset_id: Optional[str]


class IngestResponse(BaseModel):
    runs: list[IngestRun]


class DatasetSummary(BaseModel):
    id: str
    name: str
    type: str
    description: str
    tags: list[str]
    sensitivity_level: int
    version: int
    ingested_at: str


class AttributeView(BaseModel):
    id: str
    name: str
    kind: str
    redacted: bool
    stats: Optional[dict] = None


class EntityView(BaseModel):
    id: str
    name: str
    redacted: bool
    row_count: Optional[int] = None
    attribute_count: Optional[int] = None
    attributes: list[AttributeView]


class DatasetDetail(DatasetSummary):
    format: Optional[str] = None
    lake_path: str
    content_hash: str
    size_bytes: int
    entities: list[EntityView]
    veracity: Optional[dict] = None


class LineageDataset(BaseModel):
    id: str
    name: str
    version: int


class LineageIngest(BaseModel):
    id: str
    mode: str
    ingestion_start_time: str
    ingestion_end_time: str
    defined_duration: Optional[float] = None
    output_log: str
    error_log: str
    comment: str
    source_code_url: str
    tool_version: str
    config_hash: str
    user: Optional[str] = None


class LineageSource(BaseModel):
    id: str
    name: str
    type: str
    location: str
    owner: str
    administrator: Optional[str] = None


class StreamOrigin(BaseModel):
    id: str
    name: str
    location: str


class LineageView(BaseModel):
    dataset: LineageDataset
    ingest: Optional[LineageIngest] = None
    source: Optional[LineageSource] = None
    stream_origin: Optional[StreamOrigin] = None


class RelationshipEntry(BaseModel):
    id: str
    dataset_id: str
    dataset_name: str
    kind: str
    value: Optional[float] = None
    name: Optional[str] = None
    description: Optional[str] = None


class TagRequest(BaseModel):
    description: Optional[str] = None
    tags: list[str] = Field(default_factory=list)


class SensitivityRequest(BaseModel):
    level: int = Field(ge=0)
    target_id: Optional[str] = None


class RelationshipCreate(BaseModel):
    dataset1: str
    dataset2: str
    kind: str
    value: float
    name: Optional[str] = None
    description: Optional[str] = None


class CreatedResponse(BaseModel):
    id: str


class StatsResponse(BaseModel):
    nodes: dict[str, int]
    edges: dict[str, int]


class GlobalDictEntry(BaseModel):
    key: str
    value: str


class UserView(BaseModel):
    name: str
    clearance: int
