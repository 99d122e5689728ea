"""HTTP catalog service: ingestion triggers, keyword search, dataset detail,
lineage, relationships and annotation endpoints.

Identity is a trusted ``X-User`` header resolved against the configured users
table; requests without it run as ``anonymous`` with clearance 0. Datasets
above the caller's clearance are reported as 404 so they never leak.
"""

from __future__ import annotations

from pathlib import Path
from typing import Optional

from fastapi import FastAPI, Header, HTTPException, Query
from fastapi.staticfiles import StaticFiles

from .. import catalog, enrichment, ingestion
from ..graph import GraphError, MissingNodeError
from ..lake import Lake
from . import schemas

DEFAULT_USER = "anonymous"


def create_app(lake: Lake) -> FastAPI:
    app = FastAPI(title="lakecat catalog", version="0.1.0")

    def caller(x_user: Optional[str]) -> str:
        return x_user or DEFAULT_USER

    @app.post("/sources", response_model=schemas.SourceCreated, status_code=201)
    def create_source(body: schemas.SourceCreate):
        try:
            source_id = lake.connect_source(
                location=body.location,
                source_type=body.type,
                name=body.name,
                owner=body.owner,
                administrator=body.administrator,
                stream_origin=body.stream_origin_id,
            )
        except ingestion.InvalidConnectionError as exc:
            raise HTTPException(status_code=422, detail=str(exc))
        except MissingNodeError as exc:
            raise HTTPException(status_code=404, detail=str(exc))
        if source_id is None:
            raise HTTPException(status_code=422, detail=f"source at {body.location!r} is unreachable")
        return schemas.SourceCreated(id=source_id)

    @app.post("/sources/{source_id}/ingest", response_model=schemas.IngestResponse)
    def trigger_ingest(source_id: str, body: schemas.IngestRequest, x_user: Optional[str] = Header(default=None)):
        user = caller(x_user)
        try:
            if body.mode == "real-time":
                if body.defined_duration is None:
                    raise ingestion.PreconditionError("definedDuration is required for real-time ingestion")
                runs = lake.run_realtime(source_id, body.defined_duration, body.windows, user=user)
            else:
                runs = [lake.ingest(source_id, body.comment, body.mode, user, body.defined_duration)]
        except ingestion.PreconditionError as exc:
            raise HTTPException(status_code=400, detail=str(exc))
        except MissingNodeError as exc:
            raise HTTPException(status_code=404, detail=str(exc))
        except ingestion.IngestionError as exc:
            raise HTTPException(status_code=422, detail=str(exc))
        return schemas.IngestResponse(
            runs=[schemas.IngestRun(ingest_id=i, dataset_id=d) for i, d in runs]
        )

    @app.get("/datasets", response_model=list[schemas.DatasetSummary])
    def search_datasets(q: str = Query(default=""), x_user: Optional[str] = Header(default=None)):
        return lake.search(q, user=caller(x_user))

    @app.get("/datasets/{dataset_id}", response_model=schemas.DatasetDetail)
    def dataset_detail(dataset_id: str, x_user: Optional[str] = Header(default=None)):
        try:
            return lake.dataset_detail(dataset_id, user=caller(x_user))
        except catalog.NotFoundError as exc:
            raise HTTPException(status_code=404, detail=str(exc))

    @app.get("/datasets/{dataset_id}/lineage", response_model=schemas.LineageView)
    def dataset_lineage(dataset_id: str, x_user: Optional[str] = Header(default=None)):
        try:
            return lake.lineage(dataset_id, user=caller(x_user))
        except catalog.NotFoundError as exc:
            raise HTTPException(status_code=404, detail=str(exc))

    @app.get("/datasets/{dataset_id}/relationships", response_model=list[schemas.RelationshipEntry])
    def dataset_relationships(dataset_id: str, x_user: Optional[str] = Header(default=None)):
        try:
            return lake.relationships(dataset_id, user=caller(x_user))
        except catalog.NotFoundError as exc:
            raise HTTPException(status_code=404, detail=str(exc))

    @app.post("/datasets/{dataset_id}/tags", response_model=schemas.DatasetSummary)
    def annotate_dataset(dataset_id: str, body: schemas.TagRequest, x_user: Optional[str] = Header(default=None)):
        user = caller(x_user)
        try:
            catalog.dataset_detail(lake.store, dataset_id, lake.clearance(user))
            lake.annotate(dataset_id, description=body.description, tags=body.tags)
        except (catalog.NotFoundError, MissingNodeError, enrichment.EnrichmentError) as exc:
            raise HTTPException(status_code=404, detail=str(exc))
        summaries = {s["id"]: s for s in lake.search("", user=user)}
        return summaries[dataset_id]

    @app.post("/datasets/{dataset_id}/sensitivity", response_model=schemas.CreatedResponse)
    def mark_dataset(dataset_id: str, body: schemas.SensitivityRequest, x_user: Optional[str] = Header(default=None)):
        user = caller(x_user)
        target = body.target_id or dataset_id
        try:
            catalog.dataset_detail(lake.store, dataset_id, lake.clearance(user))
            mark_id = lake.mark_sensitivity(target, body.level, user=user)
        except catalog.NotFoundError as exc:
            raise HTTPException(status_code=404, detail=str(exc))
        except (enrichment.UnknownLevelError, enrichment.InvalidTargetError) as exc:
            raise HTTPException(status_code=400, detail=str(exc))
        except MissingNodeError as exc:
            raise HTTPException(status_code=404, detail=str(exc))
        return schemas.CreatedResponse(id=mark_id)

    @app.post("/relationships", response_model=schemas.CreatedResponse, status_code=201)
    def declare_relationship(body: schemas.RelationshipCreate):
        try:
            rel_id = lake.input_relationship(
                body.dataset1, body.dataset2, body.kind, body.value, body.name, body.description
            )
        except MissingNodeError as exc:
            raise HTTPException(status_code=404, detail=str(exc))
        except enrichment.EnrichmentError as exc:
            raise HTTPException(status_code=400, detail=str(exc))
        return schemas.CreatedResponse(id=rel_id)

    @app.get("/stats", response_model=schemas.StatsResponse)
    def stats():
        return lake.stats()

    @app.get("/global-dict", response_model=list[schemas.GlobalDictEntry])
    def global_dict():
        return lake.global_dict_entries()

    @app.post("/global-dict", response_model=schemas.CreatedResponse)
    def global_dict_set(body: schemas.GlobalDictEntry):
        try:
            entry_id = lake.global_dict_set(body.key, body.value)
        except GraphError as exc:
            raise HTTPException(status_code=400, detail=str(exc))
        return schemas.CreatedResponse(id=entry_id)

    @app.get("/users", response_model=list[schemas.UserView])
    def users():
        return [
            schemas.UserView(name=name, clearance=clearance)
            for name, clearance in sorted(lake.config.users.items())
        ]

    ui_dist = lake.config.ui_dist or "frontend/dist"
    if Path(ui_dist).is_dir():
        app.mount("/ui", StaticFiles(directory=ui_dist, html=True), name="ui")

    return app
