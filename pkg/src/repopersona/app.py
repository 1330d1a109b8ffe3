"""Composition root: wires the store, providers, engines, and job executors.

Both front doors (HTTP service and CLI local mode) drive this facade, so the
workflows behave identically regardless of transport.
"""

from __future__ import annotations

import os
from pathlib import Path
from typing import Any

from . import corpus as corpus_mod
from .analytics import compute_summary, mapping_status
from .config import Config
from .errors import (
    EmptyCorpus,
    InvalidParams,
    NoReadme,
    RepoPersonaError,
    UnknownIssue,
    UnknownRepository,
)
from .hosting import DirectoryTransport, HostingClient, HttpTransport, SyncRequest
from .jobs import JobContext, JobRunner
from .mapping import MappingEngine
from .model import (
    PERSONA_COUNT_MAX,
    PERSONA_COUNT_MIN,
    IssueRecord,
    Persona,
    ResourceDocument,
    band_of,
)
from .personas import PersonaEngine
from .providers import CallLedger, Completer, MockImageProvider, MockTextProvider, TextProvider
from .store import RepoRecord, Store, repo_id_for
from .util import utcnow


class App:
    def __init__(
        self,
        store: Store,
        client: HostingClient,
        provider: TextProvider | None,
        *,
        image_provider: Any | None = None,
        images_enabled: bool = False,
        config: Config | None = None,
        workers: int = 2,
    ) -> None:
        self.store = store
        self.client = client
        self.config = config or Config()
        self.ledger = CallLedger(sink=store.record_call)
        self.completer = (
            Completer(
                provider,
                self.ledger,
                max_concurrent=self.config.provider_max_concurrent,
                retries=self.config.provider_retries,
            )
            if provider is not None
            else None
        )
        self.personas = PersonaEngine(
            store,
            self.completer,
            image_provider=image_provider,
            images_enabled=images_enabled,
            config=self.config,
        )
        self.mapping = MappingEngine(store, self.completer, config=self.config)
        self.runner = JobRunner(store, self.config, workers=workers)
        self.runner.register("generation", self._run_generation, self._validate_generation)
        self.runner.register("sync", self._run_sync, self._validate_sync)
        self.runner.register("mapping", self._run_mapping, self._validate_mapping)
        self.runner.recover()
        self.runner.start()

    @classmethod
    def local(
        cls,
        data_dir: str | None = None,
        *,
        fixture_dir: str | None = None,
        provider_fixtures: str | None = None,
        images_enabled: bool = False,
        config: Config | None = None,
    ) -> "App":
        """Build a self-contained instance: embedded store, offline providers."""
        db_path = ":memory:"
        if data_dir:
            Path(data_dir).mkdir(parents=True, exist_ok=True)
            db_path = os.path.join(data_dir, "repopersona.sqlite3")
        transport = DirectoryTransport(fixture_dir) if fixture_dir else HttpTransport()
        provider = MockTextProvider(provider_fixtures) if provider_fixtures else None
        return cls(
            Store(db_path),
            HostingClient(transport),
            provider,
            image_provider=MockImageProvider() if images_enabled else None,
            images_enabled=images_enabled,
            config=config,
        )

    def close(self) -> None:
        self.runner.shutdown()
        self.store.close()

    # -- workflow 1: analyze -----------------------------------------------------

    def submit_analyze(
        self,
        url: str,
        persona_count: int = 4,
        external_urls: list[str] | None = None,
        additional_context: str = "",
        mode: str = "initial",
    ) -> dict[str, str]:
        """Register the repository and enqueue a generation job."""
        ref = self.client.fetch_repo(url)
        repo_id = repo_id_for(ref)
        existing = None
        try:
            existing = self.store.get_repo(repo_id)
        except UnknownRepository:
            pass
        record = RepoRecord(
            id=repo_id,
            url=url,
            ref=ref,
            created_at=existing.created_at if existing else utcnow(),
            last_synced_at=existing.last_synced_at if existing else None,
        )
        self.store.save_repo(record)
        job_id = self.runner.submit(
            "generation",
            {
                "repo_id": repo_id,
                "persona_count": persona_count,
                "external_urls": list(external_urls or []),
                "additional_context": additional_context,
                "mode": mode,
            },
        )
        return {"repo_id": repo_id, "job_id": job_id}

    def submit_generate_more(self, repo_id: str, count: int, mode: str = "additional") -> str:
        self.store.get_repo(repo_id)  # raises UnknownRepository
        return self.runner.submit(
            "generation",
            {
                "repo_id": repo_id,
                "persona_count": count,
                "external_urls": [],
                "additional_context": "",
                "mode": mode,
            },
        )

    def _validate_generation(self, params: dict[str, Any]) -> None:
        count = params.get("persona_count")
        if not isinstance(count, int) or not (PERSONA_COUNT_MIN <= count <= PERSONA_COUNT_MAX):
            raise InvalidParams(
                f"persona_count must be an integer in [{PERSONA_COUNT_MIN},{PERSONA_COUNT_MAX}]"
            )
        if params.get("mode", "initial") not in ("initial", "additional", "regenerate"):
            raise InvalidParams(f"unknown generation mode {params.get('mode')!r}")
        self.store.get_repo(params["repo_id"])

    def _run_generation(self, ctx: JobContext) -> dict[str, Any]:
        params = ctx.params
        repo = self.store.get_repo(params["repo_id"])
        mode = params.get("mode", "initial")
        n = params["persona_count"]

        ctx.enter_stage("fetch_readme")
        readme: ResourceDocument | None = None
        try:
            readme = self.client.fetch_readme(repo.ref)
        except NoReadme:
            ctx.warn("repository has no README; relying on user-provided documents")
        ctx.complete_stage("fetch_readme")

        ctx.enter_stage("external_docs")
        warnings: list[str] = []
        user_docs, fetch_warnings = corpus_mod.fetch_user_docs(
            self.client, params.get("external_urls", [])
        )
        warnings.extend(fetch_warnings)
        if params.get("additional_context"):
            user_docs.append(corpus_mod.context_document(params["additional_context"]))
        if readme is None and not user_docs:
            raise EmptyCorpus("no README and no user-provided documents")
        discovery_readme = readme or ResourceDocument(
            source_kind="readme", locator="README.md", content_text=""
        )
        plan = corpus_mod.discover_links(
            self.personas._require_completer(), discovery_readme, repo.ref, job_id=ctx.job_id
        )
        links = corpus_mod.select_plan_links(plan, self.config.max_plan_links)
        ctx.progress("external_docs", 0.4)
        plan_docs, link_warnings = corpus_mod.fetch_plan_documents(
            self.client, repo.ref, links, fanout=self.config.fetch_fanout
        )
        warnings.extend(link_warnings)
        corpus = corpus_mod.build_corpus(
            repo.ref, readme, plan_docs, user_docs, warnings=warnings, config=self.config
        )
        self.store.save_corpus(repo.id, corpus)
        for warning in corpus.warnings:
            ctx.warn(warning)
        ctx.complete_stage("external_docs")

        ctx.enter_stage("analyze_domain")
        insights, domain = self.personas.analyze(corpus, job_id=ctx.job_id)
        ctx.complete_stage("analyze_domain")

        ctx.enter_stage("generate_personas")
        active = self.store.personas(repo.id)
        if mode == "regenerate":
            created = self.personas.regenerate_all(repo.id, corpus, n, job_id=ctx.job_id)
        else:
            existing = active if mode == "additional" else []
            created = self.personas.create_from_analysis(
                repo.id, insights, domain, n, existing=existing, job_id=ctx.job_id
            )
        for warning in self.personas.warnings:
            ctx.warn(warning)
        self.personas.warnings.clear()
        ctx.complete_stage("generate_personas")
        return {"persona_ids": [p.id for p in created], "count": len(created)}

    # -- workflow 3: sync and mapping jobs ----------------------------------------

    def submit_sync(self, repo_id: str, request: SyncRequest, *, auto_map: bool = True) -> str:
        return self.runner.submit(
            "sync",
            {"repo_id": repo_id, "request": request.to_json(), "auto_map": auto_map},
        )

    def _validate_sync(self, params: dict[str, Any]) -> None:
        self.store.get_repo(params["repo_id"])
        try:
            SyncRequest.from_json(params.get("request", {}))
        except (RepoPersonaError, ValueError, TypeError) as exc:
            raise InvalidParams(f"bad sync request: {exc}") from exc

    def _run_sync(self, ctx: JobContext) -> dict[str, Any]:
        params = ctx.params
        repo = self.store.get_repo(params["repo_id"])
        request = SyncRequest.from_json(params["request"])
        ctx.enter_stage("fetch_issues")
        if request.mode == "all_new" and request.since is None and repo.last_synced_at:
            request = SyncRequest.from_json(
                {**request.to_json(), "since": repo.last_synced_at.isoformat()}
            )
        records = self.client.fetch_issues(repo.ref, request)
        with self.store.repo_lock(repo.id):
            for record in records:
                self.store.save_issue(repo.id, record)
            self.store.save_repo(
                RepoRecord(
                    id=repo.id,
                    url=repo.url,
                    ref=repo.ref,
                    created_at=repo.created_at,
                    last_synced_at=utcnow(),
                )
            )
        result: dict[str, Any] = {"synced": len(records)}
        ctx.set_percent(50 if params.get("auto_map", True) else 95)
        if params.get("auto_map", True):
            ctx.enter_stage("map_issues")
            mapped, errors = self.mapping.map_unmapped(
                repo.id,
                job_id=ctx.job_id,
                progress=lambda done, total: ctx.set_percent(50 + int(45 * done / total)),
            )
            result.update({"mapped": mapped, "mapping_errors": errors})
            for error in errors:
                ctx.warn(error)
        return result

    def submit_mapping(self, repo_id: str, *, force_remap_ai: bool = False) -> str:
        return self.runner.submit(
            "mapping", {"repo_id": repo_id, "force_remap_ai": force_remap_ai}
        )

    def _validate_mapping(self, params: dict[str, Any]) -> None:
        self.store.get_repo(params["repo_id"])
        if not self.store.personas(params["repo_id"]):
            raise InvalidParams("mapping needs at least one active persona")

    def _run_mapping(self, ctx: JobContext) -> dict[str, Any]:
        params = ctx.params
        ctx.enter_stage("map_issues")
        mapped, errors = self.mapping.map_unmapped(
            params["repo_id"],
            force_remap_ai=params.get("force_remap_ai", False),
            job_id=ctx.job_id,
            progress=lambda done, total: ctx.set_percent(int(95 * done / total)),
        )
        for error in errors:
            ctx.warn(error)
        return {"mapped": mapped, "mapping_errors": errors}

    # -- read-side payloads ---------------------------------------------------------

    def job_status(self, job_id: str) -> dict[str, Any]:
        return self.runner.status(job_id)

    def analytics(self, repo_id: str) -> dict[str, Any]:
        return compute_summary(self.store, repo_id).to_json()

    def mapping_status(self, repo_id: str) -> dict[str, int]:
        self.store.get_repo(repo_id)
        return mapping_status(self.store, repo_id)

    def persona_payload(self, repo_id: str, *, include_archived: bool = False) -> list[dict[str, Any]]:
        out = []
        for persona in self.store.personas(repo_id, include_archived=include_archived):
            found = self.store.get_persona(persona.id, include_archived=True)
            assert found is not None
            _p, envelope = found
            payload = persona.to_json()
            payload["version"] = envelope.version
            payload["archived"] = envelope.tombstone
            out.append(payload)
        return out

    def issue_rows(
        self,
        repo_id: str,
        *,
        state: str | None = None,
        confidence_band: str | None = None,
        persona_id: str | None = None,
    ) -> list[dict[str, Any]]:
        self.store.get_repo(repo_id)
        active = {p.id: p for p in self.store.personas(repo_id)}
        mappings = self.store.mappings(repo_id)
        rows = []
        for issue in self.store.issues(repo_id):
            if state and issue.state != state:
                continue
            mapping = mappings.get(issue.number)
            badges = []
            if mapping is not None:
                for assoc in mapping.visible_associations():
                    persona = active.get(assoc.persona_id)
                    if persona is None:
                        continue
                    badges.append(
                        {
                            "persona_id": persona.id,
                            "name": persona.name,
                            "occupation": persona.occupation,
                            "percent": round(assoc.relevance_score * 100),
                            "band": band_of(assoc.relevance_score),
                            "origin": assoc.origin,
                            "rationale": assoc.rationale,
                            "impact_level": assoc.impact_level,
                        }
                    )
            issue_band = band_of(mapping.confidence) if (mapping and badges) else "unmatched"
            if confidence_band and issue_band != confidence_band:
                continue
            if persona_id and all(b["persona_id"] != persona_id for b in badges):
                continue
            row = issue.to_json()
            row["badges"] = badges
            row["band"] = issue_band
            row["confidence"] = mapping.confidence if mapping else None
            rows.append(row)
        return rows

    def issue_list_payload(self, repo_id: str, view: str = "github", **filters: Any) -> dict[str, Any]:
        rows = self.issue_rows(repo_id, **filters)
        if view == "github":
            return {"view": "github", "issues": rows}
        if view != "persona":
            raise RepoPersonaError(f"unknown issue view {view!r}")
        groups = []
        for persona in self.store.personas(repo_id):
            mine = [r for r in rows if any(b["persona_id"] == persona.id for b in r["badges"])]
            groups.append(
                {
                    "persona": {
                        "id": persona.id,
                        "name": persona.name,
                        "occupation": persona.occupation,
                        "avatar": persona.avatar.to_json() if persona.avatar else None,
                    },
                    "count": len(mine),
                    "issues": mine,
                }
            )
        unmatched = [r for r in rows if not r["badges"]]
        return {"view": "persona", "groups": groups, "unmatched_issues": unmatched}

    def issue_detail(self, repo_id: str, number: int) -> dict[str, Any]:
        issue = self.store.get_issue(repo_id, number)
        if issue is None:
            raise UnknownIssue(f"issue #{number} not found")
        mapping = self.store.mappings(repo_id).get(number)
        active = {p.id: p for p in self.store.personas(repo_id)}
        cards = []
        if mapping is not None:
            for assoc in mapping.visible_associations():
                persona = active.get(assoc.persona_id)
                if persona is None:
                    continue
                cards.append(
                    {
                        "persona": persona.to_json(),
                        "origin": assoc.origin,
                        "percent": round(assoc.relevance_score * 100),
                        "band": band_of(assoc.relevance_score),
                        "rationale": assoc.rationale,
                        "matched_goals": list(assoc.matched_goals),
                        "matched_pain_points": list(assoc.matched_pain_points),
                        "use_case_fit": assoc.use_case_fit,
                        "impact_level": assoc.impact_level,
                    }
                )
        return {
            "issue": issue.to_json(),
            "mapping": mapping.to_json() if mapping else None,
            "personas": cards,
            "all_personas": self.persona_payload(repo_id),
        }
