"""Map issues to personas: provider-backed, with a deterministic offline scorer."""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import replace
from typing import Callable

from .config import Config
from .errors import ConflictingRequest, RepoPersonaError, UnknownPersona
from .model import (
    AnalysisNotes,
    IssuePersonaMapping,
    IssueRecord,
    Persona,
    PersonaAssociation,
)
from .prompts import issue_block, personas_json, render_prompt
from .providers import Completer
from .rubric import (
    MATCH_THRESHOLD_POINTS,
    classify_issue_type,
    derive_evidence,
    estimate_issue_tech_level,
    rubric_score,
    rubric_to_confidence,
    urgency_indicators,
)
from .store import Store

MANUAL_RATIONALE = "manually associated"


class MappingEngine:
    """Issue-persona mapping with human-override precedence.

    With no completion provider configured, mapping falls back to the
    deterministic rubric scorer, so the system stays fully runnable offline.
    """

    def __init__(
        self,
        store: Store,
        completer: Completer | None = None,
        *,
        config: Config | None = None,
    ) -> None:
        self.store = store
        self.completer = completer
        self.config = config or Config()

    # -- single-issue mapping ----------------------------------------------------

    def map_issue(
        self,
        repo_id: str,
        issue: IssueRecord,
        personas: list[Persona],
        *,
        job_id: str | None = None,
        save: bool = True,
    ) -> IssuePersonaMapping:
        if not personas:
            raise RepoPersonaError("cannot map issues without active personas")
        if self.completer is not None:
            mapping = self._map_with_provider(issue, personas, job_id=job_id)
        else:
            mapping = self._map_with_rubric(issue, personas)
        if save:
            mapping = self._merge_preserving_overrides(repo_id, mapping)
            with self.store.repo_lock(repo_id):
                self.store.save_mapping(repo_id, mapping)
        return mapping

    def _map_with_provider(
        self, issue: IssueRecord, personas: list[Persona], *, job_id: str | None
    ) -> IssuePersonaMapping:
        bundle = render_prompt(
            "issue_mapping",
            {"issue_block": issue_block(issue), "personas_json": personas_json(personas)},
        )
        parsed = self.completer.complete_parsed(
            bundle,
            job_id=job_id,
            allowed_persona_ids=[p.id for p in personas],
        )
        return parsed.bind(issue.number)

    def _map_with_rubric(
        self, issue: IssueRecord, personas: list[Persona]
    ) -> IssuePersonaMapping:
        associations = []
        for persona in personas:
            flags = derive_evidence(issue, persona)
            points, breakdown = rubric_score(flags)
            if points < MATCH_THRESHOLD_POINTS:
                continue
            rationale_bits = [name.replace("_", " ") for name in breakdown if breakdown[name] > 0]
            associations.append(
                PersonaAssociation(
                    persona_id=persona.id,
                    origin="ai_suggested",
                    relevance_score=rubric_to_confidence(points),
                    rationale=(
                        f"Rubric evidence ({points} points): {', '.join(rationale_bits)}"
                    ),
                    matched_goals=tuple(
                        g for g in persona.goals if flags.goal_mentions_feature
                    )[:2],
                    matched_pain_points=tuple(
                        p for p in persona.pain_points if flags.pain_point_describes
                    )[:2],
                    use_case_fit="estimated from documented goals and pain points",
                    impact_level="high" if points >= 80 else "medium" if points >= 60 else "low",
                )
            )
        associations.sort(key=lambda a: -a.relevance_score)
        best = associations[0] if associations else None
        return IssuePersonaMapping(
            issue_number=issue.number,
            associations=tuple(associations),
            primary_persona_id=best.persona_id if best else None,
            confidence=best.relevance_score if best else 0.0,
            reasoning=(
                "Offline rubric scoring over documented goals, pain points, and skills."
                if associations
                else "No persona cleared the rubric threshold; left unmatched."
            ),
            analysis_notes=AnalysisNotes(
                issue_type=classify_issue_type(issue),
                technical_level=estimate_issue_tech_level(issue),
                urgency_indicators=urgency_indicators(issue),
            ),
        )

    def _merge_preserving_overrides(
        self, repo_id: str, fresh: IssuePersonaMapping
    ) -> IssuePersonaMapping:
        """Fold a new AI mapping into what curation already decided.

        Manual associations always survive; AI suggestions a human removed
        stay tombstoned even if the model proposes them again.
        """
        previous = self.store.mapping_for(repo_id, fresh.issue_number)
        if previous is None:
            return fresh
        kept: dict[str, PersonaAssociation] = {}
        for assoc in previous.associations:
            if assoc.origin == "manual":
                kept[assoc.persona_id] = assoc
            elif assoc.tombstoned:
                kept[assoc.persona_id] = assoc  # human removed it; do not resurrect
        merged = [kept.pop(a.persona_id, a) for a in fresh.associations]
        merged.extend(kept.values())
        visible = [a for a in merged if not a.tombstoned]
        primary = fresh.primary_persona_id
        if primary is None or all(a.persona_id != primary or a.tombstoned for a in merged):
            primary = max(visible, key=lambda a: a.relevance_score).persona_id if visible else None
        return replace(
            fresh, associations=tuple(merged), primary_persona_id=primary
        )

    # -- bulk mapping ------------------------------------------------------------

    def unmapped_issues(self, repo_id: str, *, force_remap_ai: bool = False) -> list[IssueRecord]:
        mappings = self.store.mappings(repo_id)
        issues = self.store.issues(repo_id)
        if force_remap_ai:
            return issues
        return [i for i in issues if i.number not in mappings]

    def map_unmapped(
        self,
        repo_id: str,
        *,
        force_remap_ai: bool = False,
        job_id: str | None = None,
        progress: Callable[[int, int], None] | None = None,
    ) -> tuple[int, list[str]]:
        """Map every issue lacking a mapping; per-issue failures never abort."""
        personas = self.store.personas(repo_id)
        if not personas:
            raise RepoPersonaError("cannot map issues without active personas")
        todo = self.unmapped_issues(repo_id, force_remap_ai=force_remap_ai)
        if not todo:
            return 0, []
        errors: list[str] = []
        done = 0

        def map_one(issue: IssueRecord) -> str | None:
            try:
                self.map_issue(repo_id, issue, personas, job_id=job_id)
                return None
            except RepoPersonaError as exc:
                return f"issue #{issue.number}: {exc}"

        with ThreadPoolExecutor(max_workers=max(1, self.config.mapping_fanout)) as pool:
            for issue, failure in zip(todo, pool.map(map_one, todo)):
                if failure is None:
                    done += 1
                else:
                    errors.append(failure)
                if progress is not None:
                    progress(done + len(errors), len(todo))
        return done, errors

    # -- manual overrides -----------------------------------------------------------

    def override_associations(
        self,
        repo_id: str,
        issue_number: int,
        add: list[str],
        remove: list[str],
    ) -> IssuePersonaMapping:
        """Apply a manual add/remove request from the associations dialog."""
        add = list(dict.fromkeys(add))
        remove = list(dict.fromkeys(remove))
        overlap = set(add) & set(remove)
        if overlap:
            raise ConflictingRequest(f"cannot both add and remove: {sorted(overlap)}")
        if self.store.get_issue(repo_id, issue_number) is None:
            raise RepoPersonaError(f"issue #{issue_number} is not synced")
        for pid in add + remove:
            if self.store.get_persona(pid) is None:
                raise UnknownPersona(f"persona {pid} not found")

        mapping = self.store.mapping_for(repo_id, issue_number)
        if mapping is None:
            mapping = IssuePersonaMapping(
                issue_number=issue_number,
                associations=(),
                primary_persona_id=None,
                confidence=0.0,
                reasoning="manual associations only",
            )

        by_id = {a.persona_id: a for a in mapping.associations}
        for pid in remove:
            assoc = by_id.get(pid)
            if assoc is None or assoc.tombstoned:
                raise ConflictingRequest(f"persona {pid} is not associated with issue #{issue_number}")
            by_id[pid] = replace(assoc, tombstoned=True)
        for pid in add:
            assoc = by_id.get(pid)
            if assoc is not None and not assoc.tombstoned:
                raise ConflictingRequest(f"persona {pid} is already associated with issue #{issue_number}")
            by_id[pid] = PersonaAssociation(
                persona_id=pid,
                origin="manual",
                relevance_score=1.0,
                rationale=MANUAL_RATIONALE,
                impact_level="medium",
            )

        associations = tuple(by_id.values())
        visible = [a for a in associations if not a.tombstoned]
        primary = mapping.primary_persona_id
        if primary is None or primary not in {a.persona_id for a in visible}:
            primary = max(visible, key=lambda a: a.relevance_score).persona_id if visible else None
        updated = replace(mapping, associations=associations, primary_persona_id=primary)
        with self.store.repo_lock(repo_id):
            self.store.save_mapping(repo_id, updated)
        return updated
