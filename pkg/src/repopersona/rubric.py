"""Evidence-based issue/persona scoring on the 0-100 point rubric.

``rubric_score`` turns an explicit flag vector into points; the ``derive_*``
helpers estimate those flags from text overlap so the whole system stays
runnable with no completion provider configured.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, fields

from .errors import RepoPersonaError
from .model import IssueRecord, Persona
from .util import token_set, tokenize

# (flag, points) in rubric order; deductions are negative.
COMPONENTS: tuple[tuple[str, int], ...] = (
    ("goal_mentions_feature", 20),
    ("pain_point_describes", 20),
    ("primary_workflow", 15),
    ("blocks_goal", 15),
    ("tech_level_match", 10),
    ("context_explains_urgency", 10),
    ("tone_alignment", 10),
    ("easy_workaround", -20),
    ("technical_mismatch", -30),
    ("rarely_uses_feature", -40),
)

MATCH_THRESHOLD_POINTS = 40  # below this an offline match is suppressed

_CODE_MARKER_RE = re.compile(r"```|Traceback|0x[0-9a-fA-F]+|\bstack trace\b", re.IGNORECASE)
_TECH_TERMS = frozenset(
    """api sdk cli backend frontend database server config jsonxml yaml docker build
    compile thread memory null exception regression endpoint token protocol schema
    runtime kernel dependency compiler""".split()
)
_URGENCY_TERMS = (
    "crash", "data loss", "urgent", "blocked", "blocking", "broken", "cannot",
    "can't", "unusable", "critical", "fails", "deadline", "production",
)
_FEATURE_TERMS = ("feature request", "feature", "add ", "support for", "would be nice", "proposal")
_ENHANCEMENT_TERMS = ("improve", "enhancement", "better", "polish", "refactor", "speed up")

_LEVEL_RANK = {"beginner": 0, "intermediate": 1, "advanced": 2, "expert": 3}


@dataclass(frozen=True)
class EvidenceFlags:
    goal_mentions_feature: bool = False
    pain_point_describes: bool = False
    primary_workflow: bool = False
    blocks_goal: bool = False
    tech_level_match: bool = False
    context_explains_urgency: bool = False
    tone_alignment: bool = False
    easy_workaround: bool = False
    technical_mismatch: bool = False
    rarely_uses_feature: bool = False

    @classmethod
    def from_bits(cls, bits: int) -> "EvidenceFlags":
        names = [f.name for f in fields(cls)]
        return cls(**{name: bool(bits >> i & 1) for i, name in enumerate(names)})


def rubric_score(flags: EvidenceFlags) -> tuple[int, dict[str, int]]:
    """Points in [0,100] plus the per-component breakdown of triggered flags."""
    breakdown: dict[str, int] = {}
    raw = 0
    for name, points in COMPONENTS:
        if getattr(flags, name):
            breakdown[name] = points
            raw += points
    return max(0, min(100, raw)), breakdown


def rubric_to_confidence(points: int) -> float:
    if not (0 <= points <= 100):
        raise RepoPersonaError(f"rubric points {points} out of [0,100]")
    return points / 100.0


# ---------------------------------------------------------------------------
# offline heuristics


def _overlap(phrase: str, issue_tokens: set[str]) -> int:
    return len(set(tokenize(phrase)) & issue_tokens)


def estimate_issue_tech_level(issue: IssueRecord) -> str:
    text = f"{issue.title}\n{issue.body}"
    tech_hits = len(token_set(text) & _TECH_TERMS)
    if _CODE_MARKER_RE.search(text) or tech_hits >= 4:
        return "advanced"
    if tech_hits >= 1:
        return "intermediate"
    return "beginner"


def classify_issue_type(issue: IssueRecord) -> str:
    text = f"{issue.title} {issue.body}".lower()
    labels = " ".join(issue.labels).lower()
    if "bug" in labels:
        return "bug"
    if "enhancement" in labels or any(t in text for t in _ENHANCEMENT_TERMS):
        return "enhancement"
    if "feature" in labels or any(t in text for t in _FEATURE_TERMS):
        return "feature"
    return "bug"


def urgency_indicators(issue: IssueRecord) -> tuple[str, ...]:
    text = f"{issue.title} {issue.body}".lower()
    return tuple(term for term in _URGENCY_TERMS if term in text)


def derive_evidence(issue: IssueRecord, persona: Persona) -> EvidenceFlags:
    """Estimate the flag vector from token overlap and the level lattice."""
    issue_tokens = token_set(f"{issue.title}\n{issue.body}\n{' '.join(issue.labels)}")

    goal_overlaps = [_overlap(g, issue_tokens) for g in persona.goals]
    pain_overlaps = [_overlap(p, issue_tokens) for p in persona.pain_points]
    profile_tokens = token_set(
        " ".join((persona.occupation, persona.tagline, *persona.technical_skills))
    )

    persona_rank = min(_LEVEL_RANK.get(persona.experience_level, 1), 2)
    issue_rank = _LEVEL_RANK[estimate_issue_tech_level(issue)]
    level_gap = abs(persona_rank - issue_rank)

    goal_hit = max(goal_overlaps, default=0)
    pain_hit = max(pain_overlaps, default=0)
    any_overlap = goal_hit + pain_hit + len(profile_tokens & issue_tokens)

    return EvidenceFlags(
        goal_mentions_feature=goal_hit >= 2,
        pain_point_describes=pain_hit >= 2,
        primary_workflow=len(profile_tokens & issue_tokens) >= 2,
        blocks_goal=goal_hit >= 3,
        tech_level_match=level_gap <= 1,
        context_explains_urgency=bool(urgency_indicators(issue)) and (goal_hit >= 2 or pain_hit >= 2),
        tone_alignment=(persona_rank >= 2) == bool(_CODE_MARKER_RE.search(issue.body)),
        easy_workaround=persona.experience_level == "expert" and issue_rank == 0,
        technical_mismatch=level_gap >= 2,
        rarely_uses_feature=any_overlap == 0,
    )
