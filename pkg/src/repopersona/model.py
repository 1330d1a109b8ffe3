"""Domain types shared by the pipeline, store, API, and CLI.

All types are immutable-by-convention value objects that serialize to the
canonical snake_case JSON wire format used by the HTTP API, the store, and
the provider fixtures.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from datetime import datetime
from typing import Any

from .errors import RepoPersonaError
from .util import from_rfc3339, to_rfc3339, utcnow

EXPERIENCE_LEVELS = ("beginner", "intermediate", "advanced", "expert")
PROVENANCES = ("ai_generated", "manual", "merged")
IMPACT_LEVELS = ("high", "medium", "low")
ISSUE_TYPES = ("bug", "feature", "enhancement")
ISSUE_TECH_LEVELS = ("beginner", "intermediate", "advanced")
ISSUE_STATES = ("open", "closed")
ASSOCIATION_ORIGINS = ("ai_suggested", "manual")

GENERATION_STAGES = (
    "queued",
    "fetch_readme",
    "external_docs",
    "analyze_domain",
    "generate_personas",
    "done",
    "failed",
)

AI_AGE_MIN = 25
AI_AGE_MAX = 65
PERSONA_COUNT_MIN = 1
PERSONA_COUNT_MAX = 10


@dataclass(frozen=True)
class RepositoryRef:
    """Identity and headline metadata of a hosted repository."""

    host: str
    owner: str
    name: str
    stars: int = 0
    forks: int = 0
    open_issue_count: int = 0
    default_branch: str = "main"

    def __post_init__(self) -> None:
        if not self.owner or not self.name:
            raise RepoPersonaError("repository owner and name must be nonempty")
        for label in ("stars", "forks", "open_issue_count"):
            if getattr(self, label) < 0:
                raise RepoPersonaError(f"{label} must be >= 0")

    @property
    def full_name(self) -> str:
        return f"{self.owner}/{self.name}"

    def to_json(self) -> dict[str, Any]:
        return {
            "host": self.host,
            "owner": self.owner,
            "name": self.name,
            "stars": self.stars,
            "forks": self.forks,
            "open_issue_count": self.open_issue_count,
            "default_branch": self.default_branch,
        }

    @classmethod
    def from_json(cls, data: dict[str, Any]) -> "RepositoryRef":
        return cls(
            host=data["host"],
            owner=data["owner"],
            name=data["name"],
            stars=int(data.get("stars", 0)),
            forks=int(data.get("forks", 0)),
            open_issue_count=int(data.get("open_issue_count", 0)),
            default_branch=data.get("default_branch", "main"),
        )


@dataclass(frozen=True)
class AvatarRef:
    """Pointer to a persona's avatar: a generated image or a deterministic URL."""

    kind: str  # generated_image | parameterized_url
    locator: str
    seed_inputs: dict[str, str] = field(default_factory=dict)

    def __post_init__(self) -> None:
        if self.kind not in ("generated_image", "parameterized_url"):
            raise RepoPersonaError(f"unknown avatar kind {self.kind!r}")
        if not self.locator:
            raise RepoPersonaError("avatar locator must be nonempty")

    def to_json(self) -> dict[str, Any]:
        return {"kind": self.kind, "locator": self.locator, "seed_inputs": dict(self.seed_inputs)}

    @classmethod
    def from_json(cls, data: dict[str, Any]) -> "AvatarRef":
        return cls(
            kind=data["kind"],
            locator=data["locator"],
            seed_inputs=dict(data.get("seed_inputs", {})),
        )


@dataclass(frozen=True)
class Persona:
    id: str
    name: str
    age: int
    occupation: str
    location: str
    quote: str
    tagline: str
    background: str
    personality_traits: tuple[str, ...]
    goals: tuple[str, ...]
    pain_points: tuple[str, ...]
    technical_skills: tuple[str, ...]
    experience_level: str
    confidence_score: float
    provenance: str = "ai_generated"
    edited: bool = False
    source_persona_ids: tuple[str, ...] = ()
    avatar: AvatarRef | None = None
    created_at: datetime = field(default_factory=utcnow)
    updated_at: datetime = field(default_factory=utcnow)

    def with_changes(self, **changes: Any) -> "Persona":
        return replace(self, **changes)

    def to_json(self) -> dict[str, Any]:
        return {
            "id": self.id,
            "name": self.name,
            "age": self.age,
            "occupation": self.occupation,
            "location": self.location,
            "quote": self.quote,
            "tagline": self.tagline,
            "background": self.background,
            "personality_traits": list(self.personality_traits),
            "goals": list(self.goals),
            "pain_points": list(self.pain_points),
            "technical_skills": list(self.technical_skills),
            "experience_level": self.experience_level,
            "confidence_score": self.confidence_score,
            "provenance": self.provenance,
            "edited": self.edited,
            "source_persona_ids": list(self.source_persona_ids),
            "avatar": self.avatar.to_json() if self.avatar else None,
            "created_at": to_rfc3339(self.created_at),
            "updated_at": to_rfc3339(self.updated_at),
        }

    @classmethod
    def from_json(cls, data: dict[str, Any]) -> "Persona":
        avatar = data.get("avatar")
        return cls(
            id=data["id"],
            name=data["name"],
            age=int(data["age"]),
            occupation=data.get("occupation", ""),
            location=data.get("location", ""),
            quote=data.get("quote", ""),
            tagline=data.get("tagline", ""),
            background=data.get("background", ""),
            personality_traits=tuple(data.get("personality_traits", [])),
            goals=tuple(data.get("goals", [])),
            pain_points=tuple(data.get("pain_points", [])),
            technical_skills=tuple(data.get("technical_skills", [])),
            experience_level=data["experience_level"],
            confidence_score=float(data["confidence_score"]),
            provenance=data.get("provenance", "ai_generated"),
            edited=bool(data.get("edited", False)),
            source_persona_ids=tuple(data.get("source_persona_ids", [])),
            avatar=AvatarRef.from_json(avatar) if avatar else None,
            created_at=from_rfc3339(data.get("created_at")) or utcnow(),
            updated_at=from_rfc3339(data.get("updated_at")) or utcnow(),
        )


def validate_persona(p: Persona) -> list[str]:
    """Collect every violated persona invariant; an empty list means valid.

    The age range applies only to pristine AI output: manually created,
    merged, or subsequently edited personas may model users of any
    positive age.
    """
    violations: list[str] = []
    if not p.name.strip():
        violations.append("name must be nonempty")
    if not p.occupation.strip():
        violations.append("occupation must be nonempty")
    if p.provenance == "ai_generated" and not p.edited:
        if not (AI_AGE_MIN <= p.age <= AI_AGE_MAX):
            violations.append(f"age out of [{AI_AGE_MIN},{AI_AGE_MAX}]")
    elif p.age <= 0:
        violations.append("age must be positive")
    if not p.goals:
        violations.append("goals must be nonempty")
    if not p.pain_points:
        violations.append("pain_points must be nonempty")
    if not (0.0 <= p.confidence_score <= 1.0):
        violations.append("confidence_score out of [0,1]")
    if p.experience_level not in EXPERIENCE_LEVELS:
        violations.append(f"experience_level not one of {'/'.join(EXPERIENCE_LEVELS)}")
    if p.provenance not in PROVENANCES:
        violations.append(f"provenance not one of {'/'.join(PROVENANCES)}")
    if p.provenance == "merged":
        if len(p.source_persona_ids) < 2:
            violations.append("merged persona needs >= 2 source_persona_ids")
    elif p.source_persona_ids:
        violations.append("source_persona_ids only allowed for merged personas")
    return violations


def band_of(confidence: float) -> str:
    """Categorical band for a confidence value in [0,1].

    Boundaries belong to the upper band: 0.8 is high, 0.6 medium, 0.4 low.
    """
    if not (0.0 <= confidence <= 1.0):
        raise RepoPersonaError(f"confidence {confidence} out of [0,1]")
    if confidence >= 0.8:
        return "high"
    if confidence >= 0.6:
        return "medium"
    if confidence >= 0.4:
        return "low"
    return "unmatched"


@dataclass(frozen=True)
class ResourceDocument:
    source_kind: str  # readme | internal_link | external_link | user_provided
    locator: str
    content_text: str = ""
    expected_content: str = ""
    user_relevance: str = ""
    priority: int = 3
    fetched_at: datetime = field(default_factory=utcnow)

    def __post_init__(self) -> None:
        if self.source_kind not in ("readme", "internal_link", "external_link", "user_provided"):
            raise RepoPersonaError(f"unknown document source_kind {self.source_kind!r}")
        if not (1 <= self.priority <= 5):
            raise RepoPersonaError("document priority out of [1,5]")

    def to_json(self) -> dict[str, Any]:
        return {
            "source_kind": self.source_kind,
            "locator": self.locator,
            "content_text": self.content_text,
            "expected_content": self.expected_content,
            "user_relevance": self.user_relevance,
            "priority": self.priority,
            "fetched_at": to_rfc3339(self.fetched_at),
        }

    @classmethod
    def from_json(cls, data: dict[str, Any]) -> "ResourceDocument":
        return cls(
            source_kind=data["source_kind"],
            locator=data["locator"],
            content_text=data.get("content_text", ""),
            expected_content=data.get("expected_content", ""),
            user_relevance=data.get("user_relevance", ""),
            priority=int(data.get("priority", 3)),
            fetched_at=from_rfc3339(data.get("fetched_at")) or utcnow(),
        )


@dataclass(frozen=True)
class ResourceCorpus:
    repo: RepositoryRef
    documents: tuple[ResourceDocument, ...]
    total_chars: int
    truncated: bool
    warnings: tuple[str, ...] = ()

    def __post_init__(self) -> None:
        readmes = [d for d in self.documents if d.source_kind == "readme"]
        if len(readmes) > 1:
            raise RepoPersonaError("corpus may contain at most one readme document")

    def as_prompt_text(self) -> str:
        """Render every document into the single text block the prompts consume."""
        blocks = []
        for doc in self.documents:
            blocks.append(f"=== {doc.source_kind}: {doc.locator} ===\n{doc.content_text}")
        return "\n\n".join(blocks)

    def to_json(self) -> dict[str, Any]:
        return {
            "repo": self.repo.to_json(),
            "documents": [d.to_json() for d in self.documents],
            "total_chars": self.total_chars,
            "truncated": self.truncated,
            "warnings": list(self.warnings),
        }

    @classmethod
    def from_json(cls, data: dict[str, Any]) -> "ResourceCorpus":
        return cls(
            repo=RepositoryRef.from_json(data["repo"]),
            documents=tuple(ResourceDocument.from_json(d) for d in data.get("documents", [])),
            total_chars=int(data["total_chars"]),
            truncated=bool(data["truncated"]),
            warnings=tuple(data.get("warnings", [])),
        )


@dataclass(frozen=True)
class UserInsights:
    user_types: tuple[str, ...]
    primary_use_cases: tuple[str, ...]
    user_needs: tuple[str, ...]
    pain_points: tuple[str, ...]
    community_insights: str
    persona_recommendations: tuple[str, ...]

    def to_json(self) -> dict[str, Any]:
        return {
            "user_types": list(self.user_types),
            "primary_use_cases": list(self.primary_use_cases),
            "user_needs": list(self.user_needs),
            "pain_points": list(self.pain_points),
            "community_insights": self.community_insights,
            "persona_recommendations": list(self.persona_recommendations),
        }

    @classmethod
    def from_json(cls, data: dict[str, Any]) -> "UserInsights":
        return cls(
            user_types=tuple(data["user_types"]),
            primary_use_cases=tuple(data["primary_use_cases"]),
            user_needs=tuple(data["user_needs"]),
            pain_points=tuple(data["pain_points"]),
            community_insights=data["community_insights"],
            persona_recommendations=tuple(data["persona_recommendations"]),
        )


@dataclass(frozen=True)
class DomainAnalysis:
    domain_summary: str
    key_features: tuple[dict[str, str], ...]  # {name, description}
    user_characteristics: tuple[dict[str, str], ...]  # {trait, context}
    additional_insights: tuple[str, ...]

    def to_json(self) -> dict[str, Any]:
        return {
            "domain_summary": self.domain_summary,
            "key_features": [dict(f) for f in self.key_features],
            "user_characteristics": [dict(c) for c in self.user_characteristics],
            "additional_insights": list(self.additional_insights),
        }

    @classmethod
    def from_json(cls, data: dict[str, Any]) -> "DomainAnalysis":
        return cls(
            domain_summary=data["domain_summary"],
            key_features=tuple(dict(f) for f in data["key_features"]),
            user_characteristics=tuple(dict(c) for c in data.get("user_characteristics", [])),
            additional_insights=tuple(data.get("additional_insights", [])),
        )


@dataclass(frozen=True)
class IssueRecord:
    number: int
    title: str
    body: str
    labels: tuple[str, ...]
    state: str
    created_at: datetime
    updated_at: datetime
    synced_at: datetime = field(default_factory=utcnow)

    def __post_init__(self) -> None:
        if self.number <= 0:
            raise RepoPersonaError("issue number must be positive")
        if self.state not in ISSUE_STATES:
            raise RepoPersonaError(f"issue state must be one of {'/'.join(ISSUE_STATES)}")

    def to_json(self) -> dict[str, Any]:
        return {
            "number": self.number,
            "title": self.title,
            "body": self.body,
            "labels": list(self.labels),
            "state": self.state,
            "created_at": to_rfc3339(self.created_at),
            "updated_at": to_rfc3339(self.updated_at),
            "synced_at": to_rfc3339(self.synced_at),
        }

    @classmethod
    def from_json(cls, data: dict[str, Any]) -> "IssueRecord":
        return cls(
            number=int(data["number"]),
            title=data.get("title", ""),
            body=data.get("body", ""),
            labels=tuple(data.get("labels", [])),
            state=data["state"],
            created_at=from_rfc3339(data["created_at"]) or utcnow(),
            updated_at=from_rfc3339(data.get("updated_at") or data["created_at"]) or utcnow(),
            synced_at=from_rfc3339(data.get("synced_at")) or utcnow(),
        )


@dataclass(frozen=True)
class PersonaAssociation:
    """One persona attached to one issue, with the evidence behind the match."""

    persona_id: str
    origin: str  # ai_suggested | manual
    relevance_score: float
    rationale: str
    matched_goals: tuple[str, ...] = ()
    matched_pain_points: tuple[str, ...] = ()
    use_case_fit: str = ""
    impact_level: str = "medium"
    tombstoned: bool = False

    def __post_init__(self) -> None:
        if self.origin not in ASSOCIATION_ORIGINS:
            raise RepoPersonaError(f"unknown association origin {self.origin!r}")
        if not (0.0 <= self.relevance_score <= 1.0):
            raise RepoPersonaError("relevance_score out of [0,1]")
        if self.impact_level not in IMPACT_LEVELS:
            raise RepoPersonaError(f"unknown impact_level {self.impact_level!r}")

    def to_json(self) -> dict[str, Any]:
        return {
            "origin": self.origin,
            "relevance_score": self.relevance_score,
            "matched_goals": list(self.matched_goals),
            "matched_pain_points": list(self.matched_pain_points),
            "use_case_fit": self.use_case_fit,
            "impact_level": self.impact_level,
            "rationale": self.rationale,
            "tombstoned": self.tombstoned,
        }

    @classmethod
    def from_json(cls, persona_id: str, data: dict[str, Any]) -> "PersonaAssociation":
        return cls(
            persona_id=persona_id,
            origin=data.get("origin", "ai_suggested"),
            relevance_score=float(data["relevance_score"]),
            rationale=data.get("rationale", ""),
            matched_goals=tuple(data.get("matched_goals", [])),
            matched_pain_points=tuple(data.get("matched_pain_points", [])),
            use_case_fit=data.get("use_case_fit", ""),
            impact_level=data.get("impact_level", "medium"),
            tombstoned=bool(data.get("tombstoned", False)),
        )


@dataclass(frozen=True)
class AnalysisNotes:
    issue_type: str = "bug"
    technical_level: str = "intermediate"
    urgency_indicators: tuple[str, ...] = ()

    def __post_init__(self) -> None:
        if self.issue_type not in ISSUE_TYPES:
            raise RepoPersonaError(f"unknown issue_type {self.issue_type!r}")
        if self.technical_level not in ISSUE_TECH_LEVELS:
            raise RepoPersonaError(f"unknown technical_level {self.technical_level!r}")

    def to_json(self) -> dict[str, Any]:
        return {
            "issue_type": self.issue_type,
            "technical_level": self.technical_level,
            "urgency_indicators": list(self.urgency_indicators),
        }

    @classmethod
    def from_json(cls, data: dict[str, Any]) -> "AnalysisNotes":
        return cls(
            issue_type=data.get("issue_type", "bug"),
            technical_level=data.get("technical_level", "intermediate"),
            urgency_indicators=tuple(data.get("urgency_indicators", [])),
        )


@dataclass(frozen=True)
class IssuePersonaMapping:
    issue_number: int
    associations: tuple[PersonaAssociation, ...]
    primary_persona_id: str | None
    confidence: float
    reasoning: str
    analysis_notes: AnalysisNotes = field(default_factory=AnalysisNotes)
    mapped_at: datetime = field(default_factory=utcnow)

    def __post_init__(self) -> None:
        if not (0.0 <= self.confidence <= 1.0):
            raise RepoPersonaError("mapping confidence out of [0,1]")
        ids = {a.persona_id for a in self.associations}
        if self.primary_persona_id is not None and self.primary_persona_id not in ids:
            raise RepoPersonaError("primary_persona_id not among associations")
        if len(ids) != len(self.associations):
            raise RepoPersonaError("duplicate persona association on one issue")

    def visible_associations(self) -> tuple[PersonaAssociation, ...]:
        return tuple(a for a in self.associations if not a.tombstoned)

    def association_for(self, persona_id: str) -> PersonaAssociation | None:
        for a in self.associations:
            if a.persona_id == persona_id:
                return a
        return None

    def to_json(self) -> dict[str, Any]:
        return {
            "issue_number": self.issue_number,
            "matched_persona_ids": [a.persona_id for a in self.visible_associations()],
            "primary_persona_id": self.primary_persona_id,
            "confidence": self.confidence,
            "reasoning": self.reasoning,
            "persona_rationales": {a.persona_id: a.to_json() for a in self.associations},
            "analysis_notes": self.analysis_notes.to_json(),
            "mapped_at": to_rfc3339(self.mapped_at),
        }

    @classmethod
    def from_json(cls, data: dict[str, Any]) -> "IssuePersonaMapping":
        associations = tuple(
            PersonaAssociation.from_json(pid, raw)
            for pid, raw in data.get("persona_rationales", {}).items()
        )
        return cls(
            issue_number=int(data["issue_number"]),
            associations=associations,
            primary_persona_id=data.get("primary_persona_id"),
            confidence=float(data.get("confidence", 0.0)),
            reasoning=data.get("reasoning", ""),
            analysis_notes=AnalysisNotes.from_json(data.get("analysis_notes", {})),
            mapped_at=from_rfc3339(data.get("mapped_at")) or utcnow(),
        )


@dataclass(frozen=True)
class AnalyticsSummary:
    total_issues: int
    active_personas: int
    coverage_rate: float
    repo_stars: int
    label_distribution: dict[str, int]
    persona_coverage: dict[str, int]

    def to_json(self) -> dict[str, Any]:
        return {
            "total_issues": self.total_issues,
            "active_personas": self.active_personas,
            "coverage_rate": self.coverage_rate,
            "repo_stars": self.repo_stars,
            "label_distribution": dict(self.label_distribution),
            "persona_coverage": dict(self.persona_coverage),
        }

    @classmethod
    def from_json(cls, data: dict[str, Any]) -> "AnalyticsSummary":
        return cls(
            total_issues=int(data["total_issues"]),
            active_personas=int(data["active_personas"]),
            coverage_rate=float(data["coverage_rate"]),
            repo_stars=int(data.get("repo_stars", 0)),
            label_distribution=dict(data.get("label_distribution", {})),
            persona_coverage=dict(data.get("persona_coverage", {})),
        )
