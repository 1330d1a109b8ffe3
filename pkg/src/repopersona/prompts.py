"""Prompt rendering: substitute placeholder values into the stage templates."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Any, Mapping

from . import templates
from .errors import MissingPlaceholder, RepoPersonaError
from .model import IssueRecord, Persona
from .util import stable_hash

# Deterministic styling pools for headshot prompts. Which entry applies is a
# stable function of persona attributes, so re-rendering never flips the image
# request for an unchanged persona.
_EXPRESSIONS = ("Warm, confident", "Focused, thoughtful", "Relaxed, approachable")
_CLOTHING = {
    "beginner": "casual everyday clothes",
    "intermediate": "smart casual attire",
    "advanced": "business casual attire",
    "expert": "professional attire",
}
_SETTINGS = (
    "Bright home office backdrop",
    "Modern workplace environment",
    "Softly lit studio backdrop",
)
_PHOTO_STYLES = ("Soft natural light", "Shallow depth of field", "Balanced studio lighting")


@dataclass(frozen=True)
class PromptBundle:
    """A fully rendered prompt for one pipeline stage."""

    stage: str
    system_text: str
    user_text: str
    context_key: str  # stable hash of the substituted placeholder values

    @property
    def expected_schema(self) -> str:
        return self.stage


def context_key(stage: str, context: Mapping[str, Any]) -> str:
    """Stable fixture key for a stage invocation: hash of substituted values."""
    values = {k: str(v) for k, v in sorted(context.items())}
    return stable_hash({"stage": stage, "values": values})


def render_prompt(stage: str, context: Mapping[str, Any]) -> PromptBundle:
    """Render the stage template with every placeholder substituted.

    Empty strings are legal substitutions; a missing key is not. The merge
    stage accepts an optional ``guidance`` entry appended as a trailing
    "User guidance:" line rather than substituted into the template body.
    """
    if stage not in templates.STAGE_PLACEHOLDERS:
        raise RepoPersonaError(f"unknown prompt stage {stage!r}")
    placeholders = templates.STAGE_PLACEHOLDERS[stage]
    system_text, user_text = templates.STAGE_TEXTS[stage]

    context = dict(context)
    guidance = None
    if stage == "merge":
        guidance = context.pop("guidance", None)

    if stage == "headshot":
        occupation = context.get("occupation")
        if occupation is None:
            raise MissingPlaceholder("headshot prompt needs 'occupation'")
        user_text = templates.HEADSHOT_TEMPLATES[_headshot_template_index(str(occupation))]

    for key, marker in placeholders.items():
        if key not in context:
            raise MissingPlaceholder(f"stage {stage!r} needs context key {key!r}")
        value = context[key]
        user_text = user_text.replace(marker, str(value))
        system_text = system_text.replace(marker, str(value))

    if guidance:
        user_text = f"{user_text}\n\nUser guidance: {guidance}"

    return PromptBundle(
        stage=stage,
        system_text=system_text,
        user_text=user_text,
        context_key=context_key(stage, context),
    )


def _headshot_template_index(occupation: str) -> int:
    return int(stable_hash(occupation), 16) % len(templates.HEADSHOT_TEMPLATES)


def headshot_context(persona: Persona) -> dict[str, str]:
    """Derive the image-prompt attributes from a persona.

    No gender is ever inferred from names or traits; the hint is always a
    neutral "person".
    """
    pick = int(stable_hash([persona.occupation, list(persona.personality_traits)]), 16)
    return {
        "gender_hint": "a person",
        "age": str(persona.age),
        "occupation": persona.occupation,
        "expression": _EXPRESSIONS[pick % len(_EXPRESSIONS)],
        "clothing_style": _CLOTHING.get(persona.experience_level, "smart casual attire"),
        "setting": _SETTINGS[pick // 3 % len(_SETTINGS)],
        "photography_style": _PHOTO_STYLES[pick // 9 % len(_PHOTO_STYLES)],
    }


def issue_block(issue: IssueRecord) -> str:
    """Format an issue the way the mapping prompt expects: title, body, labels."""
    labels = ", ".join(issue.labels) if issue.labels else "(none)"
    return f"Title: {issue.title}\nBody: {issue.body}\nLabels: {labels}"


def personas_json(personas: list[Persona] | tuple[Persona, ...]) -> str:
    """Compact persona array embedded into the mapping prompt."""
    rows = []
    for p in personas:
        rows.append(
            {
                "id": p.id,
                "name": p.name,
                "age": p.age,
                "occupation": p.occupation,
                "location": p.location,
                "quote": p.quote,
                "tagline": p.tagline,
                "background": p.background,
                "personality_traits": list(p.personality_traits),
                "goals": list(p.goals),
                "pain_points": list(p.pain_points),
                "technical_skills": list(p.technical_skills),
                "experience_level": p.experience_level,
            }
        )
    return json.dumps(rows, indent=1, ensure_ascii=False)


def persona_descriptions(personas: list[Persona] | tuple[Persona, ...]) -> str:
    """Plain-text persona profiles substituted into the merge prompt."""
    blocks = []
    for p in personas:
        lines = [
            f"Name: {p.name}",
            f"Age: {p.age}",
            f"Occupation: {p.occupation}",
            f"Location: {p.location}",
            f"Quote: {p.quote}",
            f"Tagline: {p.tagline}",
            f"Background: {p.background}",
            f"Personality traits: {'; '.join(p.personality_traits)}",
            f"Goals: {'; '.join(p.goals)}",
            f"Pain points: {'; '.join(p.pain_points)}",
            f"Technical skills: {'; '.join(p.technical_skills)}",
            f"Experience level: {p.experience_level}",
        ]
        blocks.append("\n".join(lines))
    return "\n\n".join(blocks)


@dataclass
class GenerationContext:
    """Everything the persona-generation prompt needs beyond the count."""

    domain_analysis: dict[str, Any]
    user_insights: dict[str, Any]
    existing_personas: list[dict[str, str]] = field(default_factory=list)

    def as_json_value(self) -> str:
        """Value substituted for the domain-analysis placeholder.

        User-insight output rides along inside the substituted JSON so the
        generation call sees both upstream analyses; when topping up an
        existing persona set, active names and taglines are included so new
        personas do not duplicate them.
        """
        payload: dict[str, Any] = dict(self.domain_analysis)
        payload["user_insights"] = self.user_insights
        if self.existing_personas:
            payload["existing_personas_to_avoid_duplicating"] = self.existing_personas
        return json.dumps(payload, indent=1, ensure_ascii=False)
