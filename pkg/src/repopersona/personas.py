"""Persona lifecycle: generation chain, edit, merge, custom create, regenerate."""

from __future__ import annotations

from dataclasses import replace
import uuid
from statistics import fmean
from typing import Any

from .avatars import assign_avatar
from .config import Config
from .errors import (
    FewerThanTwo,
    InvalidPatch,
    InvalidPersona,
    ParseError,
    ProviderError,
    RepoPersonaError,
    UnknownPersona,
)
from .model import (
    PERSONA_COUNT_MAX,
    PERSONA_COUNT_MIN,
    DomainAnalysis,
    Persona,
    ResourceCorpus,
    UserInsights,
    validate_persona,
)
from .prompts import GenerationContext, persona_descriptions, render_prompt
from .providers import Completer, ImageProvider
from .store import Store
from .util import stable_hash, utcnow

EDITABLE_FIELDS = frozenset(
    {
        "name",
        "age",
        "occupation",
        "location",
        "quote",
        "tagline",
        "background",
        "personality_traits",
        "goals",
        "pain_points",
        "technical_skills",
        "experience_level",
        "confidence_score",
        "avatar",
    }
)

_LIST_FIELDS = {"personality_traits", "goals", "pain_points", "technical_skills"}


class PersonaEngine:
    def __init__(
        self,
        store: Store,
        completer: Completer | None,
        *,
        image_provider: ImageProvider | None = None,
        images_enabled: bool = False,
        config: Config | None = None,
    ) -> None:
        self.store = store
        self.completer = completer
        self.image_provider = image_provider
        self.images_enabled = images_enabled
        self.config = config or Config()
        self.warnings: list[str] = []

    # -- generation chain -------------------------------------------------------

    def _require_completer(self) -> Completer:
        if self.completer is None:
            raise ProviderError("no completion provider configured")
        return self.completer

    def analyze(
        self, corpus: ResourceCorpus, *, job_id: str | None = None
    ) -> tuple[UserInsights, DomainAnalysis]:
        """User-insight and domain-analysis calls over the corpus."""
        completer = self._require_completer()
        if not corpus.documents:
            raise RepoPersonaError("cannot analyze an empty corpus")
        corpus_text = corpus.as_prompt_text()
        insights = completer.complete_parsed(
            render_prompt(
                "user_insights",
                {"owner_repo": corpus.repo.full_name, "corpus_text": corpus_text},
            ),
            job_id=job_id,
        )
        domain = completer.complete_parsed(
            render_prompt("domain_analysis", {"repository_content": corpus_text}),
            job_id=job_id,
        )
        return insights, domain

    def create_from_analysis(
        self,
        repo_id: str,
        insights: UserInsights,
        domain: DomainAnalysis,
        n: int,
        *,
        existing: list[Persona] | None = None,
        job_id: str | None = None,
    ) -> list[Persona]:
        """Persona-generation call, then id/avatar assignment and storage."""
        completer = self._require_completer()
        if not (PERSONA_COUNT_MIN <= n <= PERSONA_COUNT_MAX):
            raise RepoPersonaError(
                f"persona count must be in [{PERSONA_COUNT_MIN},{PERSONA_COUNT_MAX}]"
            )
        context = GenerationContext(
            domain_analysis=domain.to_json(),
            user_insights=insights.to_json(),
            existing_personas=[
                {"name": p.name, "tagline": p.tagline} for p in (existing or [])
            ],
        )
        drafts = completer.complete_parsed(
            render_prompt(
                "persona_generation",
                {"persona_count": n, "domain_analysis_json": context.as_json_value()},
            ),
            job_id=job_id,
        )
        if len(drafts) != n:
            raise ParseError(f"asked for {n} personas, provider returned {len(drafts)}")

        personas = []
        batch_stamp = utcnow()  # one stamp per batch keeps store ordering stable
        with self.store.repo_lock(repo_id):
            for index, draft in enumerate(drafts):
                persona = draft.with_changes(
                    id="p-" + stable_hash([repo_id, draft.name, draft.occupation, index], 10),
                    created_at=batch_stamp,
                    updated_at=batch_stamp,
                )
                persona = self._with_avatar(persona, job_id=job_id)
                violations = validate_persona(persona)
                if violations:
                    raise InvalidPersona(violations)
                self.store.save_persona(repo_id, persona)
                personas.append(persona)
        return personas

    def generate_personas(
        self,
        repo_id: str,
        corpus: ResourceCorpus,
        n: int,
        *,
        existing: list[Persona] | None = None,
        job_id: str | None = None,
    ) -> list[Persona]:
        """Full chain: user insights, domain analysis, persona generation."""
        if not (PERSONA_COUNT_MIN <= n <= PERSONA_COUNT_MAX):
            raise RepoPersonaError(
                f"persona count must be in [{PERSONA_COUNT_MIN},{PERSONA_COUNT_MAX}]"
            )
        insights, domain = self.analyze(corpus, job_id=job_id)
        return self.create_from_analysis(
            repo_id, insights, domain, n, existing=existing, job_id=job_id
        )

    def _with_avatar(self, persona: Persona, *, job_id: str | None = None) -> Persona:
        mode = "generated_image" if (self.images_enabled and self.image_provider) else "parameterized_url"
        avatar, warnings = assign_avatar(
            persona,
            mode,
            completer=self.completer,
            image_provider=self.image_provider,
            job_id=job_id,
        )
        self.warnings.extend(warnings)
        return persona.with_changes(avatar=avatar)

    # -- refinement ops ------------------------------------------------------------

    def _get_active(self, persona_id: str) -> tuple[Persona, int, str]:
        found = self.store.get_persona(persona_id)
        if found is None:
            raise UnknownPersona(f"persona {persona_id} not found")
        persona, envelope = found
        return persona, envelope.version, envelope.repo_id

    def merge_personas(
        self,
        ids: list[str],
        guidance: str | None = None,
        *,
        job_id: str | None = None,
    ) -> Persona:
        """Synthesize one persona from several; sources are archived, not deleted."""
        completer = self._require_completer()
        distinct = list(dict.fromkeys(ids))
        if len(distinct) < 2:
            raise FewerThanTwo("merging needs at least two distinct personas")
        sources = []
        repo_ids = set()
        for pid in distinct:
            persona, _version, repo_id = self._get_active(pid)
            sources.append(persona)
            repo_ids.add(repo_id)
        if len(repo_ids) != 1:
            raise RepoPersonaError("cannot merge personas across repositories")
        repo_id = repo_ids.pop()

        context = {
            "persona_count": len(sources),
            "persona_descriptions": persona_descriptions(sources),
        }
        if guidance:
            context["guidance"] = guidance
        draft = completer.complete_parsed(render_prompt("merge", context), job_id=job_id)

        merged = draft.with_changes(
            id="p-" + stable_hash([repo_id, "merged", sorted(distinct)], 10),
            provenance="merged",
            source_persona_ids=tuple(distinct),
            confidence_score=round(fmean(p.confidence_score for p in sources), 4),
        )
        merged = self._with_avatar(merged, job_id=job_id)
        violations = validate_persona(merged)
        if violations:
            raise InvalidPersona(violations)
        with self.store.repo_lock(repo_id):
            self.store.save_persona(repo_id, merged)
            for source in sources:
                self.store.archive_persona(source.id)
                self._tombstone_associations(repo_id, source.id)
        return merged

    def edit_persona(
        self, persona_id: str, patch: dict[str, Any], *, expected_version: int | None = None
    ) -> Persona:
        persona, version, repo_id = self._get_active(persona_id)
        unknown = set(patch) - EDITABLE_FIELDS
        if unknown:
            raise InvalidPatch([f"field not editable: {name}" for name in sorted(unknown)])

        changes: dict[str, Any] = {}
        for key, value in patch.items():
            if key in _LIST_FIELDS:
                changes[key] = tuple(str(v) for v in (value or []))
            elif key == "age":
                changes[key] = int(value)
            elif key == "confidence_score":
                changes[key] = float(value)
            elif key == "avatar":
                from .model import AvatarRef

                changes[key] = AvatarRef.from_json(value) if value else None
            else:
                changes[key] = str(value)
        updated = persona.with_changes(**changes, edited=True, updated_at=utcnow())
        violations = validate_persona(updated)
        if violations:
            raise InvalidPatch(violations)
        with self.store.repo_lock(repo_id):
            self.store.save_persona(
                repo_id,
                updated,
                expected_version=expected_version if expected_version is not None else version,
            )
        return updated

    def create_custom_persona(self, repo_id: str, fields: dict[str, Any]) -> Persona:
        """Store a manually authored persona; human input counts as ground truth."""
        data = dict(fields)
        persona = Persona(
            id="p-" + uuid.uuid4().hex[:10],
            name=str(data.get("name", "")).strip(),
            age=int(data.get("age", 0) or 0),
            occupation=str(data.get("occupation", "")),
            location=str(data.get("location", "")),
            quote=str(data.get("quote", "")),
            tagline=str(data.get("tagline", "")),
            background=str(data.get("background", "")),
            personality_traits=tuple(data.get("personality_traits", ())),
            goals=tuple(data.get("goals", ())),
            pain_points=tuple(data.get("pain_points", ())),
            technical_skills=tuple(data.get("technical_skills", ())),
            experience_level=str(data.get("experience_level", "")),
            confidence_score=1.0,
            provenance="manual",
        )
        violations = validate_persona(persona)
        if violations:
            raise InvalidPersona(violations)
        persona = persona.with_changes(avatar=assign_avatar(persona, "parameterized_url")[0])
        with self.store.repo_lock(repo_id):
            self.store.save_persona(repo_id, persona)
        return persona

    def delete_persona(self, persona_id: str) -> None:
        """Archive the persona and tombstone its issue associations everywhere."""
        _persona, _version, repo_id = self._get_active(persona_id)
        with self.store.repo_lock(repo_id):
            self.store.archive_persona(persona_id)
            self._tombstone_associations(repo_id, persona_id)

    def regenerate_all(
        self,
        repo_id: str,
        corpus: ResourceCorpus,
        n: int,
        *,
        job_id: str | None = None,
    ) -> list[Persona]:
        """Replace pristine AI personas; manual, merged, and edited ones survive."""
        active = self.store.personas(repo_id)
        survivors = [p for p in active if p.provenance != "ai_generated" or p.edited]
        replaceable = [p for p in active if p.provenance == "ai_generated" and not p.edited]
        with self.store.repo_lock(repo_id):
            for persona in replaceable:
                self.store.archive_persona(persona.id)
                self._tombstone_associations(repo_id, persona.id)
        return self.generate_personas(
            repo_id, corpus, n, existing=survivors, job_id=job_id
        )

    def _tombstone_associations(self, repo_id: str, persona_id: str) -> None:
        for number, mapping in self.store.mappings(repo_id).items():
            assoc = mapping.association_for(persona_id)
            if assoc is None or assoc.tombstoned:
                continue
            new_assocs = tuple(
                replace(a, tombstoned=True) if a.persona_id == persona_id else a
                for a in mapping.associations
            )
            visible = [a for a in new_assocs if not a.tombstoned]
            primary = mapping.primary_persona_id
            if primary == persona_id:
                primary = max(visible, key=lambda a: a.relevance_score).persona_id if visible else None
            self.store.save_mapping(
                repo_id,
                replace(mapping, associations=new_assocs, primary_persona_id=primary),
            )
