"""Request/response models for the review service."""

from __future__ import annotations

from pydantic import BaseModel, Field


class UploadBody(BaseModel):
    package: dict
    map: dict


class UploadResponse(BaseModel):
    id: str


class BlockView(BaseModel):
    kind: str
    automation: str
    state: dict
    ready: bool
    regen_attempts: int = 0
    last_job_id: str | None = None


class BlocksResponse(BaseModel):
    scenario_id: str
    blocks: list[BlockView]


class JobView(BaseModel):
    id: str
    scenario_id: str
    kind: str
    state: str  # Queued | Running | Done | Failed
    reason: str | None = None
    trace_id: str | None = None
    started_at: str | None = None
    finished_at: str | None = None


class GenerateResponse(BaseModel):
    job_id: str


class RejectBody(BaseModel):
    feedback: str = Field(min_length=1)


class EditBody(BaseModel):
    content: str


class SelectOptionBody(BaseModel):
    index: int


class StateResponse(BaseModel):
    kind: str
    state: dict
    stale_descendants: list[str] = []
