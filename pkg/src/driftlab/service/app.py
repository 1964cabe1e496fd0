"""HTTP service over a data directory.

Every endpoint delegates to the core library against the files under the
configured data directory; the service itself computes no science, so any
response can be reproduced with a direct library call on the same files.
Mutating endpoints accept a client idempotency key: retries with the same
key return the same label_id/run_id without duplicating work.
"""

from __future__ import annotations

import time
import uuid
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from fastapi import FastAPI, Query, Request
from fastapi.exceptions import RequestValidationError
from fastapi.responses import JSONResponse
from fastapi.staticfiles import StaticFiles

from .. import errors
from ..detectors import DetectionEvent, DetectorConfig, run_detectors
from ..downsample import lttb_indices
from ..ensemble import ResidualSeries
from ..evaluation import (
    LabelledPeriod,
    match_triggers,
    merge_overlapping,
    precision_sensitivity,
)
from ..labels import DriftLabel, ExpertInfo, consensus
from ..storage import DataDir
from ..timestamps import format_rfc3339, parse_rfc3339
from . import schemas

_IDEMPOTENCY_NS = uuid.UUID("6ba7b811-9dad-11d1-80b4-00c04fd430c8")

_UNPROCESSABLE = (
    errors.ValidationError,
    errors.ConfigError,
    errors.FormatError,
    errors.OrderingError,
    errors.RangeError,
    errors.OverlappingPeriodsError,
    errors.InsufficientDataError,
    errors.InsufficientSamplesError,
    errors.EmptyInputError,
    errors.ShapeMismatchError,
    errors.DuplicateTimestampError,
    errors.NoUsableModelError,
)


@dataclass(frozen=True)
class ServiceConfig:
    data_dir: Path
    read_only: bool = False
    ui_dir: Path | None = None


def _status_for(exc: errors.DriftLabError) -> int:
    if isinstance(exc, errors.NotFoundError):
        return 404
    if isinstance(exc, (errors.UnknownExpertError, errors.ReadOnlyError)):
        return 403
    if isinstance(exc, _UNPROCESSABLE):
        return 422
    return 400


def _label_out(label: DriftLabel) -> schemas.LabelOut:
    return schemas.LabelOut(
        label_id=label.label_id,
        turbine_id=label.turbine_id,
        model_id=label.model_id,
        start=format_rfc3339(label.start),
        end=format_rfc3339(label.end),
        drift_type=label.drift_type,
        cause=label.cause,
        severity=label.severity,
        confidence=label.confidence,
        expert_id=label.expert_id,
        created_at=format_rfc3339(label.created_at),
        note=label.note,
        supersedes=label.supersedes,
    )


def _event_out(event: DetectionEvent) -> schemas.EventOut:
    return schemas.EventOut(
        detector=event.detector,
        t=format_rfc3339(event.timestamp),
        sample_index=event.sample_index,
        statistic=event.statistic,
    )


def _parse_detector_map(detectors: dict[str, dict]) -> list[DetectorConfig]:
    configs = []
    for kind, params in detectors.items():
        params = dict(params)
        transform = params.pop("transform", "standardized")
        configs.append(DetectorConfig(kind=kind, params=params, transform=transform))
    return configs


def create_app(
    data_dir: str | Path, read_only: bool = False, ui_dir: str | Path | None = None
) -> FastAPI:
    config = ServiceConfig(
        data_dir=Path(data_dir),
        read_only=read_only,
        ui_dir=Path(ui_dir) if ui_dir else None,
    )
    data = DataDir(config.data_dir)
    store = data.label_store()

    app = FastAPI(title="driftlab", version="0.1.0")
    app.state.config = config
    app.state.data = data
    app.state.label_store = store

    @app.exception_handler(errors.DriftLabError)
    async def driftlab_error_handler(request: Request, exc: errors.DriftLabError):
        body = schemas.ApiErrorBody(
            code=exc.code,
            message=str(exc),
            correlation_id=uuid.uuid4().hex,
            field=getattr(exc, "field", None),
        )
        return JSONResponse(status_code=_status_for(exc), content=body.model_dump())

    @app.exception_handler(RequestValidationError)
    async def request_validation_handler(request: Request, exc: RequestValidationError):
        first = exc.errors()[0] if exc.errors() else {}
        loc = first.get("loc", ())
        field = str(loc[-1]) if loc else None
        body = schemas.ApiErrorBody(
            code="validation_error",
            message=first.get("msg", "invalid request"),
            correlation_id=uuid.uuid4().hex,
            field=field,
        )
        return JSONResponse(status_code=422, content=body.model_dump())

    def guard_writes():
        if config.read_only:
            raise errors.ReadOnlyError("service is running read-only")

    # ---- read endpoints ---------------------------------------------------

    @app.get("/turbines", response_model=list[schemas.TurbineOut])
    def list_turbines():
        return [
            schemas.TurbineOut(turbine_id=t, models=data.list_models(t))
            for t in data.list_turbines()
        ]

    @app.get("/experts", response_model=schemas.ExpertList)
    def list_experts():
        return schemas.ExpertList(
            experts=[
                schemas.ExpertOut(expert_id=e.expert_id, display_name=e.display_name)
                for e in store.list_experts()
            ]
        )

    @app.get(
        "/turbines/{turbine_id}/models/{model_id}/residuals",
        response_model=schemas.ResidualPage,
        response_model_exclude_none=True,
    )
    def get_residuals(
        turbine_id: str,
        model_id: str,
        from_: str | None = Query(default=None, alias="from"),
        to: str | None = Query(default=None),
        max_points: int = Query(default=2000, ge=2),
        overlay: str = Query(default=""),
        run_id: str | None = Query(default=None),
    ):
        residuals = data.load_residuals(turbine_id, model_id)
        lo = parse_rfc3339(from_) if from_ else int(residuals.timestamps[0])
        hi = parse_rfc3339(to) if to else int(residuals.timestamps[-1])
        if from_ and to and lo >= hi:
            raise errors.ValidationError("'from' must precede 'to'", field="to")
        mask = (residuals.timestamps >= lo) & (residuals.timestamps <= hi)
        idx = np.flatnonzero(mask)
        points: list[schemas.ResidualPoint] = []
        if len(idx):
            sub_ts = residuals.timestamps[idx]
            sub_res = residuals.residual[idx]
            keep = idx[lttb_indices(sub_ts, sub_res, max_points)]
            for i in keep:
                covered = residuals.n_members[i] > 0
                points.append(
                    schemas.ResidualPoint(
                        t=format_rfc3339(int(residuals.timestamps[i])),
                        actual=float(residuals.actual[i]),
                        predicted=float(residuals.predicted[i]) if covered else None,
                        residual=float(residuals.residual[i]) if covered else None,
                        n_members=int(residuals.n_members[i]),
                    )
                )
        layers = {part.strip() for part in overlay.split(",") if part.strip()}
        unknown = layers - {"labels", "events"}
        if unknown:
            raise errors.ValidationError(
                f"unknown overlay layer(s): {sorted(unknown)}", field="overlay"
            )
        page = schemas.ResidualPage(
            turbine_id=turbine_id,
            model_id=model_id,
            **{"from": format_rfc3339(lo), "to": format_rfc3339(hi)},
            total_points=int(mask.sum()),
            points=points,
        )
        if "labels" in layers:
            page.labels = [
                _label_out(lb)
                for lb in store.query_labels(
                    turbine_id=turbine_id, model_id=model_id, start=lo, end=hi
                )
            ]
        if "events" in layers:
            if not run_id:
                raise errors.ValidationError(
                    "events overlay requires run_id", field="run_id"
                )
            _, run_events = data.load_run(run_id)
            page.events = [
                _event_out(ev)
                for evs in run_events.values()
                for ev in evs
                if lo <= ev.timestamp <= hi
            ]
        return page

    @app.get("/labels", response_model=schemas.LabelList)
    def get_labels(
        turbine_id: str | None = None,
        model_id: str | None = None,
        expert_id: str | None = None,
        from_: str | None = Query(default=None, alias="from"),
        to: str | None = Query(default=None),
        cause: str | None = None,
    ):
        found = store.query_labels(
            turbine_id=turbine_id,
            model_id=model_id,
            expert_id=expert_id,
            start=parse_rfc3339(from_) if from_ else None,
            end=parse_rfc3339(to) if to else None,
            cause=cause,
        )
        return schemas.LabelList(labels=[_label_out(lb) for lb in found])

    # ---- mutating endpoints -------------------------------------------------

    @app.post("/experts", response_model=schemas.ExpertOut, status_code=201)
    def post_expert(payload: schemas.ExpertIn):
        guard_writes()
        info = store.register_expert(
            ExpertInfo(expert_id=payload.expert_id, display_name=payload.display_name)
        )
        return schemas.ExpertOut(
            expert_id=info.expert_id, display_name=info.display_name
        )

    @app.post("/labels", response_model=schemas.LabelOut, status_code=201)
    def post_label(payload: schemas.LabelIn):
        guard_writes()
        label = DriftLabel(
            label_id="",
            turbine_id=payload.turbine_id,
            model_id=payload.model_id,
            start=parse_rfc3339(payload.start),
            end=parse_rfc3339(payload.end),
            drift_type=payload.drift_type,
            cause=payload.cause,
            severity=payload.severity,
            confidence=payload.confidence,
            expert_id=payload.expert_id,
            created_at=int(time.time()),
            note=payload.note,
            supersedes=payload.supersedes,
        )
        label_id = None
        if payload.idempotency_key:
            label_id = uuid.uuid5(
                _IDEMPOTENCY_NS, f"label:{payload.idempotency_key}"
            ).hex
        stored = store.append_label(label, label_id=label_id)
        return _label_out(stored)

    @app.post("/detect", response_model=schemas.DetectResponse, status_code=201)
    def post_detect(payload: schemas.DetectRequest):
        guard_writes()
        configs = _parse_detector_map(payload.detectors)
        if payload.idempotency_key:
            run_id = uuid.uuid5(_IDEMPOTENCY_NS, f"run:{payload.idempotency_key}").hex[
                :16
            ]
            if data.run_dir(run_id).exists():
                _, events = data.load_run(run_id)
                return schemas.DetectResponse(
                    run_id=run_id,
                    turbine_id=payload.turbine_id,
                    model_id=payload.model_id,
                    events={
                        kind: [_event_out(e) for e in evs]
                        for kind, evs in events.items()
                    },
                )
        else:
            run_id = uuid.uuid4().hex[:16]
        residuals = data.load_residuals(payload.turbine_id, payload.model_id)
        events = run_detectors(configs, residuals) if configs else {}
        data.save_run(run_id, payload.turbine_id, payload.model_id, configs, events)
        return schemas.DetectResponse(
            run_id=run_id,
            turbine_id=payload.turbine_id,
            model_id=payload.model_id,
            events={
                kind: [_event_out(e) for e in evs] for kind, evs in events.items()
            },
        )

    @app.post("/evaluate", response_model=schemas.EvaluateResponse)
    def post_evaluate(payload: schemas.EvaluateRequest):
        meta, run_events = data.load_run(payload.run_id)
        turbine_id = meta["turbine_id"]
        model_id = meta["model_id"]
        periods = _periods_for_source(
            payload.label_source,
            turbine_id,
            model_id,
            payload.consensus_threshold,
        )
        results = []
        for kind in sorted(run_events):
            counts = match_triggers(periods, run_events[kind], payload.tolerance_s)
            row = precision_sensitivity(counts, kind)
            results.append(
                schemas.EvalRow(
                    detector=kind,
                    precision=row.precision,
                    sensitivity=row.sensitivity,
                    tp=counts.tp,
                    fp=counts.fp,
                    fn=counts.fn,
                    tolerance_s=counts.tolerance_s,
                )
            )
        return schemas.EvaluateResponse(
            run_id=payload.run_id,
            label_source=payload.label_source,
            results=results,
        )

    def _periods_for_source(
        source: str, turbine_id: str, model_id: str, threshold: float
    ) -> list[LabelledPeriod]:
        if source == "expert":
            found = store.query_labels(turbine_id=turbine_id, model_id=model_id)
            if not found:
                raise errors.EmptyInputError("no expert labels for this turbine/model")
            return [
                LabelledPeriod(start=lb.start, end=lb.end, source="expert")
                for lb in found
            ]
        if source == "consensus":
            found = store.query_labels(turbine_id=turbine_id, model_id=model_id)
            if not found:
                raise errors.EmptyInputError("no expert labels for this turbine/model")
            merged = consensus(found, overlap_threshold=threshold)
            return merge_overlapping(
                [
                    LabelledPeriod(start=p.start, end=p.end, source="consensus")
                    for p in merged
                ]
            )
        if source == "ground_truth":
            truth = data.load_truth(turbine_id)
            return merge_overlapping(
                [
                    LabelledPeriod(
                        start=inj.start, end=inj.end, source="injected_ground_truth"
                    )
                    for inj in truth
                ]
            )
        raise errors.ValidationError(
            "label_source must be expert, consensus or ground_truth",
            field="label_source",
        )

    if config.ui_dir and config.ui_dir.is_dir():
        app.mount("/ui", StaticFiles(directory=config.ui_dir, html=True), name="ui")

    return app
