"""Wire models for the HTTP API. Timestamps travel as RFC 3339 UTC strings."""

from __future__ import annotations

from pydantic import BaseModel, Field


class TurbineOut(BaseModel):
    turbine_id: str
    models: list[str]


class ResidualPoint(BaseModel):
    t: str
    actual: float
    predicted: float | None = None
    residual: float | None = None
    n_members: int


class LabelOut(BaseModel):
    label_id: str
    turbine_id: str
    model_id: str
    start: str
    end: str
    drift_type: str
    cause: str
    severity: int
    confidence: str
    expert_id: str
    created_at: str
    note: str = ""
    supersedes: str | None = None


class EventOut(BaseModel):
    detector: str
    t: str
    sample_index: int
    statistic: float


class ResidualPage(BaseModel):
    turbine_id: str
    model_id: str
    start: str | None = Field(default=None, alias="from")
    end: str | None = Field(default=None, alias="to")
    total_points: int
    points: list[ResidualPoint]
    labels: list[LabelOut] | None = None
    events: list[EventOut] | None = None

    model_config = {"populate_by_name": True}


class LabelIn(BaseModel):
    turbine_id: str
    model_id: str
    start: str
    end: str
    drift_type: str
    cause: str
    severity: int
    confidence: str
    expert_id: str
    note: str = ""
    supersedes: str | None = None
    idempotency_key: str | None = None


class LabelList(BaseModel):
    labels: list[LabelOut]


class DetectRequest(BaseModel):
    turbine_id: str
    model_id: str
    detectors: dict[str, dict] = Field(default_factory=dict)
    idempotency_key: str | None = None


class DetectResponse(BaseModel):
    run_id: str
    turbine_id: str
    model_id: str
    events: dict[str, list[EventOut]]


class EvaluateRequest(BaseModel):
    run_id: str
    label_source: str = "expert"
    tolerance_s: float = 0.0
    consensus_threshold: float = 0.5


class EvalRow(BaseModel):
    detector: str
    precision: float | None
    sensitivity: float | None
    tp: int
    fp: int
    fn: int
    tolerance_s: float


class EvaluateResponse(BaseModel):
    run_id: str
    label_source: str
    results: list[EvalRow]


class ExpertIn(BaseModel):
    expert_id: str
    display_name: str = ""


class ExpertOut(BaseModel):
    expert_id: str
    display_name: str


class ExpertList(BaseModel):
    experts: list[ExpertOut]


class ApiErrorBody(BaseModel):
    code: str
    message: str
    correlation_id: str
    field: str | None = None
