"""HTTP API over the app facade; the web UI and remote CLI consume only this."""

from __future__ import annotations

from typing import Any

from fastapi import Body, FastAPI, Request
from fastapi.responses import JSONResponse
from pydantic import BaseModel, Field

from .app import App
from .errors import (
    BusyRepository,
    ConflictingRequest,
    NotFound,
    ProviderError,
    RateLimited,
    RepoPersonaError,
    StaleVersion,
    UnknownJob,
)
from .hosting import SyncRequest
from .util import from_rfc3339


class AnalyzeBody(BaseModel):
    url: str
    persona_count: int = 4
    external_urls: list[str] = Field(default_factory=list)
    additional_context: str = ""


class MergeBody(BaseModel):
    ids: list[str]
    guidance: str | None = None


class GenerateBody(BaseModel):
    count: int = 1
    mode: str = "additional"  # additional | regenerate


class AssociationsBody(BaseModel):
    add: list[str] = Field(default_factory=list)
    remove: list[str] = Field(default_factory=list)


class SyncBody(BaseModel):
    mode: str = "all_new"
    ids: list[int] = Field(default_factory=list)
    labels: list[str] = Field(default_factory=list)
    since: str | None = None
    until: str | None = None
    limit: int = 20
    state: str = "open"
    auto_map: bool = True

    def to_request(self) -> SyncRequest:
        return SyncRequest(
            mode=self.mode,
            ids=tuple(self.ids),
            labels=tuple(self.labels),
            since=from_rfc3339(self.since),
            until=from_rfc3339(self.until),
            limit=self.limit,
            state=self.state,
        )


def _status_for(exc: RepoPersonaError) -> int:
    if isinstance(exc, (BusyRepository, StaleVersion, ConflictingRequest)):
        return 409
    if isinstance(exc, (NotFound, UnknownJob)):
        return 404
    if isinstance(exc, (ProviderError, RateLimited)):
        return 502
    return 400


def create_service(app: App) -> FastAPI:
    api = FastAPI(title="repopersona", version="0.1.0")

    @api.exception_handler(RepoPersonaError)
    async def domain_error(_request: Request, exc: RepoPersonaError) -> JSONResponse:
        return JSONResponse(
            status_code=_status_for(exc),
            content={"error": type(exc).__name__, "detail": str(exc)},
        )

    # -- repositories and jobs -------------------------------------------------

    @api.post("/repos", status_code=202)
    def create_repo(body: AnalyzeBody) -> dict[str, str]:
        return app.submit_analyze(
            body.url,
            persona_count=body.persona_count,
            external_urls=body.external_urls,
            additional_context=body.additional_context,
        )

    @api.get("/repos")
    def list_repos() -> list[dict[str, Any]]:
        out = []
        for record in app.store.list_repos():
            payload = record.to_json()
            payload["mapping_status"] = app.mapping_status(record.id)
            out.append(payload)
        return out

    @api.get("/repos/{repo_id}")
    def get_repo(repo_id: str) -> dict[str, Any]:
        payload = app.store.get_repo(repo_id).to_json()
        payload["mapping_status"] = app.mapping_status(repo_id)
        payload["active_personas"] = len(app.store.personas(repo_id))
        return payload

    @api.get("/jobs/{job_id}")
    def job_status(job_id: str) -> dict[str, Any]:
        return app.job_status(job_id)

    # -- personas -----------------------------------------------------------------

    @api.get("/repos/{repo_id}/personas")
    def personas(repo_id: str, include_archived: bool = False) -> list[dict[str, Any]]:
        app.store.get_repo(repo_id)
        return app.persona_payload(repo_id, include_archived=include_archived)

    @api.put("/personas/{persona_id}")
    def edit_persona(persona_id: str, body: dict[str, Any] = Body(...)) -> dict[str, Any]:
        patch = dict(body)
        version = patch.pop("version", None)
        persona = app.personas.edit_persona(
            persona_id, patch, expected_version=version
        )
        found = app.store.get_persona(persona_id)
        assert found is not None
        payload = persona.to_json()
        payload["version"] = found[1].version
        return payload

    @api.delete("/personas/{persona_id}", status_code=204)
    def delete_persona(persona_id: str) -> None:
        app.personas.delete_persona(persona_id)

    @api.post("/personas/merge")
    def merge_personas(body: MergeBody) -> dict[str, Any]:
        merged = app.personas.merge_personas(body.ids, body.guidance)
        return merged.to_json()

    @api.post("/repos/{repo_id}/personas/generate", status_code=202)
    def generate_more(repo_id: str, body: GenerateBody) -> dict[str, str]:
        job_id = app.submit_generate_more(repo_id, body.count, body.mode)
        return {"repo_id": repo_id, "job_id": job_id}

    # -- issues ----------------------------------------------------------------------

    @api.get("/repos/{repo_id}/issues")
    def issues(
        repo_id: str,
        view: str = "github",
        state: str | None = None,
        confidence_band: str | None = None,
        persona_id: str | None = None,
    ) -> dict[str, Any]:
        return app.issue_list_payload(
            repo_id,
            view,
            state=state,
            confidence_band=confidence_band,
            persona_id=persona_id,
        )

    @api.get("/repos/{repo_id}/issues/{number}")
    def issue_detail(repo_id: str, number: int) -> dict[str, Any]:
        return app.issue_detail(repo_id, number)

    @api.put("/repos/{repo_id}/issues/{number}/associations")
    def override_associations(
        repo_id: str, number: int, body: AssociationsBody
    ) -> dict[str, Any]:
        mapping = app.mapping.override_associations(repo_id, number, body.add, body.remove)
        return mapping.to_json()

    @api.post("/repos/{repo_id}/issues/sync", status_code=202)
    def sync_issues(repo_id: str, body: SyncBody) -> dict[str, str]:
        job_id = app.submit_sync(repo_id, body.to_request(), auto_map=body.auto_map)
        return {"repo_id": repo_id, "job_id": job_id}

    # -- analytics ----------------------------------------------------------------------

    @api.get("/repos/{repo_id}/analytics")
    def analytics(repo_id: str) -> dict[str, Any]:
        return app.analytics(repo_id)

    return api
