"""Parse and validate provider output for each pipeline stage.

Raw completions may wrap their JSON in prose or code fences; extraction
tolerates that. Validation is strict about structure, ranges, and enums
(naming the first violation), lenient about scalar types and unknown fields.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from typing import Any, Iterable

from .errors import ParseError
from .model import (
    AI_AGE_MAX,
    AI_AGE_MIN,
    AnalysisNotes,
    DomainAnalysis,
    EXPERIENCE_LEVELS,
    IMPACT_LEVELS,
    ISSUE_TECH_LEVELS,
    ISSUE_TYPES,
    IssuePersonaMapping,
    Persona,
    PersonaAssociation,
    UserInsights,
)

_FENCE_RE = re.compile(r"```(?:[a-zA-Z]+)?\s*(.*?)```", re.DOTALL)


@dataclass(frozen=True)
class PlannedLink:
    """One link the discovery stage proposes to fetch."""

    locator: str  # repo-relative path (internal) or absolute URL (external)
    internal: bool
    expected_content: str
    user_relevance: str
    priority: int


@dataclass(frozen=True)
class LinkPlan:
    internal: tuple[PlannedLink, ...]
    external: tuple[PlannedLink, ...]
    reasoning: str

    def in_plan_order(self) -> tuple[PlannedLink, ...]:
        return self.internal + self.external


def extract_json(raw: str) -> Any:
    """Pull the first JSON value out of a completion, ignoring wrapper prose."""
    if raw is None or not raw.strip():
        raise ParseError("empty response")
    candidates = []
    fenced = _FENCE_RE.search(raw)
    if fenced:
        candidates.append(fenced.group(1))
    candidates.append(raw)

    decoder = json.JSONDecoder()
    for text in candidates:
        text = text.strip()
        try:
            return json.loads(text)
        except ValueError:
            pass
        for pos, ch in enumerate(text):
            if ch not in "{[":
                continue
            try:
                value, _end = decoder.raw_decode(text, pos)
            except ValueError:
                continue
            return value
    raise ParseError("no JSON value found in response")


def parse_stage_output(
    stage: str,
    raw: str,
    allowed_persona_ids: Iterable[str] | None = None,
) -> Any:
    """Parse a completion for ``stage`` into its typed value.

    Never raises anything but ParseError for bad input, whatever the bytes.
    """
    try:
        data = extract_json(raw)
    except ParseError:
        raise
    except Exception as exc:  # defensive: extraction must be total
        raise ParseError(f"unreadable response: {exc}") from exc

    try:
        if stage == "link_discovery":
            return _parse_link_plan(data)
        if stage == "user_insights":
            return _parse_user_insights(data)
        if stage == "domain_analysis":
            return _parse_domain_analysis(data)
        if stage == "persona_generation":
            return _parse_personas(data)
        if stage == "merge":
            return _parse_merged_persona(data)
        if stage == "issue_mapping":
            return _parse_issue_mapping(data, allowed_persona_ids)
    except ParseError:
        raise
    except Exception as exc:
        raise ParseError(f"{stage}: {exc}") from exc
    raise ParseError(f"no parser for stage {stage!r}")


# ---------------------------------------------------------------------------
# field coercion helpers


def _need_object(data: Any, stage: str) -> dict[str, Any]:
    if not isinstance(data, dict):
        raise ParseError(f"{stage}: top-level JSON must be an object")
    return data

def _text(value: Any) -> str:
    if isinstance(value, str):
        return value
    if value is None:
        return ""
    if isinstance(value, (dict, list)):
        return json.dumps(value, ensure_ascii=False)
    return str(value)


def _str_list(value: Any, label: str) -> tuple[str, ...]:
    if value is None:
        return ()
    if not isinstance(value, list):
        raise ParseError(f"{label} must be a list")
    return tuple(_text(item) for item in value)


def _number(value: Any, label: str) -> float:
    try:
        return float(value)
    except (TypeError, ValueError):
        raise ParseError(f"{label} is not a number") from None


def _int(value: Any, label: str) -> int:
    try:
        return int(round(float(value)))
    except (TypeError, ValueError):
        raise ParseError(f"{label} is not an integer") from None


def _enum(value: Any, allowed: tuple[str, ...], label: str) -> str:
    text = _text(value).strip().lower()
    if text not in allowed:
        raise ParseError(f"{label} must be one of {'/'.join(allowed)}, got {value!r}")
    return text


# ---------------------------------------------------------------------------
# stage parsers


def _parse_planned_link(raw: dict[str, Any], internal: bool, label: str) -> PlannedLink:
    if not isinstance(raw, dict):
        raise ParseError(f"{label} entries must be objects")
    locator = _text(raw.get("path") if internal else raw.get("url")).strip()
    if not locator:
        raise ParseError(f"{label} entry missing {'path' if internal else 'url'}")
    priority = _int(raw.get("priority", 3), f"{label} priority")
    if not (1 <= priority <= 5):
        raise ParseError(f"{label} priority {priority} out of [1,5]")
    # Models sometimes put full URLs in the internal list; reclassify.
    if internal and locator.lower().startswith(("http://", "https://")):
        internal = False
    if internal:
        locator = locator.lstrip("/")
        if not locator:
            raise ParseError(f"{label} entry has empty path")
    return PlannedLink(
        locator=locator,
        internal=internal,
        expected_content=_text(raw.get("expected_content")),
        user_relevance=_text(raw.get("user_relevance")),
        priority=priority,
    )


def _parse_link_plan(data: Any) -> LinkPlan:
    obj = _need_object(data, "link_discovery")
    internal_raw = obj.get("internal_links", [])
    external_raw = obj.get("external_links", [])
    if not isinstance(internal_raw, list) or not isinstance(external_raw, list):
        raise ParseError("link lists must be arrays")
    internal: list[PlannedLink] = []
    external: list[PlannedLink] = []
    for entry in internal_raw:
        link = _parse_planned_link(entry, True, "internal_links")
        (internal if link.internal else external).append(link)
    for entry in external_raw:
        link = _parse_planned_link(entry, False, "external_links")
        if not link.locator.lower().startswith(("http://", "https://")):
            raise ParseError("external_links entries must be absolute URLs")
        external.append(link)
    reasoning = _text(obj.get("reasoning")).strip()
    if not reasoning:
        raise ParseError("reasoning must be nonempty")
    return LinkPlan(internal=tuple(internal), external=tuple(external), reasoning=reasoning)


def _parse_user_insights(data: Any) -> UserInsights:
    obj = _need_object(data, "user_insights")
    for key in (
        "user_types",
        "primary_use_cases",
        "user_needs",
        "pain_points",
        "community_insights",
        "persona_recommendations",
    ):
        if key not in obj:
            raise ParseError(f"user_insights: missing field '{key}'")
    return UserInsights(
        user_types=_str_list(obj["user_types"], "user_types"),
        primary_use_cases=_str_list(obj["primary_use_cases"], "primary_use_cases"),
        user_needs=_str_list(obj["user_needs"], "user_needs"),
        pain_points=_str_list(obj["pain_points"], "pain_points"),
        community_insights=_text(obj["community_insights"]),
        persona_recommendations=_str_list(
            obj["persona_recommendations"], "persona_recommendations"
        ),
    )


def _parse_domain_analysis(data: Any) -> DomainAnalysis:
    obj = _need_object(data, "domain_analysis")
    if "domain_summary" not in obj:
        raise ParseError("domain_analysis: missing field 'domain_summary'")
    features_raw = obj.get("key_features")
    if not isinstance(features_raw, list) or not features_raw:
        raise ParseError("key_features must be a nonempty list")
    features = []
    for entry in features_raw:
        if not isinstance(entry, dict) or not _text(entry.get("name")).strip():
            raise ParseError("key_features entries need a 'name'")
        features.append(
            {"name": _text(entry["name"]), "description": _text(entry.get("description"))}
        )
    characteristics = []
    for entry in obj.get("user_characteristics", []) or []:
        if not isinstance(entry, dict):
            raise ParseError("user_characteristics entries must be objects")
        characteristics.append(
            {"trait": _text(entry.get("trait")), "context": _text(entry.get("context"))}
        )
    return DomainAnalysis(
        domain_summary=_text(obj["domain_summary"]),
        key_features=tuple(features),
        user_characteristics=tuple(characteristics),
        additional_insights=_str_list(obj.get("additional_insights"), "additional_insights"),
    )


def _parse_persona_fields(raw: dict[str, Any], *, ai_output: bool) -> Persona:
    for key in ("name", "age", "occupation", "goals", "pain_points", "experience_level"):
        if key not in raw:
            raise ParseError(f"persona missing field '{key}'")
    name = _text(raw["name"]).strip()
    if not name:
        raise ParseError("persona name must be nonempty")
    age = _int(raw["age"], "persona age")
    if ai_output and not (AI_AGE_MIN <= age <= AI_AGE_MAX):
        raise ParseError(f"persona age {age} out of [{AI_AGE_MIN},{AI_AGE_MAX}]")
    if age <= 0:
        raise ParseError("persona age must be positive")
    goals = _str_list(raw["goals"], "goals")
    pains = _str_list(raw["pain_points"], "pain_points")
    if not goals:
        raise ParseError("persona goals must be nonempty")
    if not pains:
        raise ParseError("persona pain_points must be nonempty")
    confidence = _number(raw.get("confidence_score", 0.7), "confidence_score")
    if not (0.0 <= confidence <= 1.0):
        raise ParseError(f"confidence_score {confidence} out of [0,1]")
    return Persona(
        id="",
        name=name,
        age=age,
        occupation=_text(raw["occupation"]),
        location=_text(raw.get("location")),
        quote=_text(raw.get("quote")),
        tagline=_text(raw.get("tagline")),
        background=_text(raw.get("background")),
        personality_traits=_str_list(raw.get("personality_traits"), "personality_traits"),
        goals=goals,
        pain_points=pains,
        technical_skills=_str_list(raw.get("technical_skills"), "technical_skills"),
        experience_level=_enum(raw["experience_level"], EXPERIENCE_LEVELS, "experience_level"),
        confidence_score=confidence,
        provenance="ai_generated",
    )


def _parse_personas(data: Any) -> list[Persona]:
    obj = _need_object(data, "persona_generation")
    personas_raw = obj.get("personas")
    if not isinstance(personas_raw, list) or not personas_raw:
        raise ParseError("personas must be a nonempty list")
    personas = []
    for entry in personas_raw:
        if not isinstance(entry, dict):
            raise ParseError("personas entries must be objects")
        personas.append(_parse_persona_fields(entry, ai_output=True))
    return personas


def _parse_merged_persona(data: Any) -> Persona:
    obj = _need_object(data, "merge")
    # Merged profiles may model any adult age the synthesis picks; the strict
    # generation age window applies only to fresh AI personas.
    persona = _parse_persona_fields(obj, ai_output=False)
    return persona.with_changes(provenance="merged", confidence_score=persona.confidence_score)


def _parse_issue_mapping(
    data: Any, allowed_persona_ids: Iterable[str] | None
) -> "ParsedMapping":
    obj = _need_object(data, "issue_mapping")
    if "matched_persona_ids" not in obj:
        raise ParseError("issue_mapping: missing field 'matched_persona_ids'")
    matched_raw = obj["matched_persona_ids"]
    if not isinstance(matched_raw, list):
        raise ParseError("matched_persona_ids must be a list")
    matched = [_text(v).strip() for v in matched_raw]
    if any(not m for m in matched):
        raise ParseError("matched_persona_ids entries must be nonempty")
    if len(set(matched)) != len(matched):
        raise ParseError("matched_persona_ids contains duplicates")

    allowed = set(allowed_persona_ids) if allowed_persona_ids is not None else None
    if allowed is not None:
        for pid in matched:
            if pid not in allowed:
                raise ParseError(f"matched persona id {pid!r} is not an available persona")

    primary_raw = obj.get("primary_persona_id")
    primary = _text(primary_raw).strip() if primary_raw is not None else None
    if primary == "":
        primary = None
    if primary is not None and primary not in matched:
        raise ParseError("primary_persona_id not among matched_persona_ids")
    if primary is None and matched:
        primary = matched[0]

    confidence = _number(obj.get("confidence", 0.0), "confidence")
    if not (0.0 <= confidence <= 1.0):
        raise ParseError(f"confidence {confidence} out of [0,1]")

    rationales_raw = obj.get("persona_rationales", {})
    if not isinstance(rationales_raw, dict):
        raise ParseError("persona_rationales must be an object")
    rationales_raw = {_text(k).strip(): v for k, v in rationales_raw.items()}

    associations = []
    for pid in matched:
        entry = rationales_raw.get(pid)
        if not isinstance(entry, dict):
            raise ParseError(f"missing persona_rationales entry for {pid!r}")
        rationale = _text(entry.get("rationale")).strip()
        if not rationale:
            raise ParseError(f"rationale for persona {pid!r} must be nonempty")
        relevance = _number(entry.get("relevance_score", confidence), "relevance_score")
        if not (0.0 <= relevance <= 1.0):
            raise ParseError(f"relevance_score {relevance} out of [0,1]")
        associations.append(
            PersonaAssociation(
                persona_id=pid,
                origin="ai_suggested",
                relevance_score=relevance,
                rationale=rationale,
                matched_goals=_str_list(entry.get("matched_goals"), "matched_goals"),
                matched_pain_points=_str_list(
                    entry.get("matched_pain_points"), "matched_pain_points"
                ),
                use_case_fit=_text(entry.get("use_case_fit")),
                impact_level=_enum(
                    entry.get("impact_level", "medium"), IMPACT_LEVELS, "impact_level"
                ),
            )
        )

    notes_raw = obj.get("analysis_notes", {})
    if not isinstance(notes_raw, dict):
        raise ParseError("analysis_notes must be an object")
    notes = AnalysisNotes(
        issue_type=_enum(notes_raw.get("issue_type", "bug"), ISSUE_TYPES, "issue_type"),
        technical_level=_enum(
            notes_raw.get("technical_level", "intermediate"),
            ISSUE_TECH_LEVELS,
            "technical_level",
        ),
        urgency_indicators=_str_list(
            notes_raw.get("urgency_indicators"), "urgency_indicators"
        ),
    )
    return ParsedMapping(
        associations=tuple(associations),
        primary_persona_id=primary,
        confidence=confidence,
        reasoning=_text(obj.get("reasoning")),
        analysis_notes=notes,
    )


@dataclass(frozen=True)
class ParsedMapping:
    """Mapping-stage output before it is bound to a concrete issue number."""

    associations: tuple[PersonaAssociation, ...]
    primary_persona_id: str | None
    confidence: float
    reasoning: str
    analysis_notes: AnalysisNotes = field(default_factory=AnalysisNotes)

    def bind(self, issue_number: int) -> IssuePersonaMapping:
        return IssuePersonaMapping(
            issue_number=issue_number,
            associations=self.associations,
            primary_persona_id=self.primary_persona_id,
            confidence=self.confidence,
            reasoning=self.reasoning,
            analysis_notes=self.analysis_notes,
        )
