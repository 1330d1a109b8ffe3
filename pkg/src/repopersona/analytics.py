"""Dashboard aggregates: summary metrics, label distribution, persona coverage."""

from __future__ import annotations

from collections import Counter

from .model import AnalyticsSummary
from .store import Store

NO_LABEL_BUCKET = "(none)"


def visible_persona_ids(store: Store, repo_id: str, issue_number: int) -> set[str]:
    """Personas visibly associated with one issue: not tombstoned, not archived."""
    mapping = store.mapping_for(repo_id, issue_number)
    if mapping is None:
        return set()
    active = {p.id for p in store.personas(repo_id)}
    return {a.persona_id for a in mapping.visible_associations() if a.persona_id in active}


def mapping_status(store: Store, repo_id: str) -> dict[str, int]:
    """The personas-screen panel: total, unmapped, and mapped issue counts."""
    issues = store.issues(repo_id)
    mappings = store.mappings(repo_id)
    mapped = sum(1 for issue in issues if issue.number in mappings)
    return {"total": len(issues), "unmapped": len(issues) - mapped, "mapped": mapped}


def compute_summary(store: Store, repo_id: str) -> AnalyticsSummary:
    """Aggregate the dashboard metrics from a store snapshot.

    Coverage counts issues with at least one visible association; issues
    without labels land in an explicit "(none)" bucket so the distribution
    accounts for every issue.
    """
    repo = store.get_repo(repo_id)  # raises UnknownRepository
    issues = store.issues(repo_id)
    personas = store.personas(repo_id)
    active_ids = {p.id for p in personas}
    mappings = store.mappings(repo_id)

    covered = 0
    label_distribution: Counter[str] = Counter()
    persona_coverage: dict[str, int] = {pid: 0 for pid in active_ids}
    for issue in issues:
        for label in issue.labels or (NO_LABEL_BUCKET,):
            label_distribution[label] += 1
        mapping = mappings.get(issue.number)
        if mapping is None:
            continue
        visible = {
            a.persona_id for a in mapping.visible_associations() if a.persona_id in active_ids
        }
        if visible:
            covered += 1
        for pid in visible:
            persona_coverage[pid] += 1

    total = len(issues)
    return AnalyticsSummary(
        total_issues=total,
        active_personas=len(personas),
        coverage_rate=covered / total if total else 0.0,
        repo_stars=repo.ref.stars,
        label_distribution=dict(label_distribution),
        persona_coverage=persona_coverage,
    )
