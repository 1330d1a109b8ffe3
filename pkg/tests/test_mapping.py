from __future__ import annotations

import itertools
import json

import pytest

from conftest import (
    GHOSTSCRIPT_URL,
    HOSTING_FIXTURES,
    PROVIDER_FIXTURES,
    load_ghostscript_personas,
    make_issue,
    make_persona,
    seed_repo,
)
from repopersona.errors import ConflictingRequest, RepoPersonaError, UnknownPersona
from repopersona.hosting import DirectoryTransport, HostingClient, SyncRequest
from repopersona.mapping import MANUAL_RATIONALE, MappingEngine
from repopersona.providers import CallLedger, Completer, MockTextProvider, ScriptedTextProvider
from repopersona.rubric import (
    COMPONENTS,
    EvidenceFlags,
    classify_issue_type,
    derive_evidence,
    estimate_issue_tech_level,
    rubric_score,
    rubric_to_confidence,
)
from repopersona.store import RepoRecord, Store, repo_id_for


class TestRubricScore:
    def test_all_positive_flags_hit_one_hundred(self):
        flags = EvidenceFlags(
            goal_mentions_feature=True,
            pain_point_describes=True,
            primary_workflow=True,
            blocks_goal=True,
            tech_level_match=True,
            context_explains_urgency=True,
            tone_alignment=True,
        )
        points, breakdown = rubric_score(flags)
        assert points == 100
        assert sum(breakdown.values()) == 100

    def test_no_flags_is_zero(self):
        points, breakdown = rubric_score(EvidenceFlags())
        assert points == 0 and breakdown == {}

    def test_spot_vector_from_spec(self):
        flags = EvidenceFlags(
            goal_mentions_feature=True,
            pain_point_describes=True,
            primary_workflow=True,
            technical_mismatch=True,
        )
        points, breakdown = rubric_score(flags)
        assert points == 25  # 20 + 20 + 15 - 30
        assert breakdown["technical_mismatch"] == -30

    def test_matches_component_sum_oracle_on_all_1024_vectors(self):
        attained: set[int] = set()
        clamp_engaged = 0
        for bits in range(1 << len(COMPONENTS)):
            flags = EvidenceFlags.from_bits(bits)
            raw = sum(points for (name, points), i in zip(COMPONENTS, range(10)) if bits >> i & 1)
            expected = max(0, min(100, raw))
            points, breakdown = rubric_score(flags)
            assert points == expected, bits
            assert sum(breakdown.values()) == raw
            attained.add(points)
            clamp_engaged += raw < 0
        assert {0, 100} <= attained  # both clamp bounds are hit
        assert clamp_engaged > 0  # negative sums really get clamped

    def test_rubric_to_confidence_linear(self):
        assert rubric_to_confidence(100) == 1.0
        assert rubric_to_confidence(0) == 0.0
        assert rubric_to_confidence(85) == 0.85
        with pytest.raises(RepoPersonaError):
            rubric_to_confidence(101)


class TestHeuristics:
    def test_issue_tech_level_from_markers(self):
        plain = make_issue(1, title="Love the colors", body="The theme is pretty.", labels=())
        stacky = make_issue(2, body="```\nTraceback (most recent call last)\n```")
        assert estimate_issue_tech_level(plain) == "beginner"
        assert estimate_issue_tech_level(stacky) == "advanced"

    def test_issue_type_classification(self):
        assert classify_issue_type(make_issue(1, labels=("bug",))) == "bug"
        assert classify_issue_type(make_issue(1, title="Add support for tags", labels=())) == "feature"
        assert classify_issue_type(make_issue(1, title="Improve startup speed", labels=())) == "enhancement"

    def test_derived_flags_reward_goal_overlap(self):
        persona = make_persona(
            goals=("Organize sheet music collection quickly",),
            pain_points=("Slow uploads ruin rehearsal prep",),
            technical_skills=("tablets",),
        )
        relevant = make_issue(
            5,
            title="Organize collection by composer",
            body="Sorting my sheet music collection takes forever.",
        )
        unrelated = make_issue(6, title="Login button color", body="Button looks off.")
        hit = derive_evidence(relevant, persona)
        miss = derive_evidence(unrelated, persona)
        assert hit.goal_mentions_feature and not miss.goal_mentions_feature
        assert miss.rarely_uses_feature


class TestMapIssueWithProvider:
    def _engine(self, store, response: str) -> MappingEngine:
        completer = Completer(ScriptedTextProvider({"issue_mapping": [response]}), CallLedger())
        return MappingEngine(store, completer)

    def test_sheetable_issue_55_maps_to_the_educator(self, offline_app):
        app = offline_app
        submitted = app.submit_analyze("https://github.com/SheetAble/SheetAble", 4)
        assert app.runner.wait(submitted["job_id"])["stage"] == "done"
        repo_id = submitted["repo_id"]
        sync_id = app.submit_sync(repo_id, SyncRequest(), auto_map=False)
        assert app.runner.wait(sync_id)["stage"] == "done"

        issue = app.store.get_issue(repo_id, 55)
        personas = app.store.personas(repo_id)
        mapping = app.mapping.map_issue(repo_id, issue, personas)
        educator = next(p for p in personas if p.occupation == "Music Educator")
        assert mapping.primary_persona_id == educator.id
        assert mapping.confidence == pytest.approx(0.85)
        assoc = mapping.association_for(educator.id)
        assert assoc.origin == "ai_suggested" and assoc.rationale

    def test_ghostscript_issue_30_maps_two_personas(self, store):
        client = HostingClient(DirectoryTransport(HOSTING_FIXTURES))
        ref = client.fetch_repo(GHOSTSCRIPT_URL)
        repo_id = repo_id_for(ref)
        store.save_repo(RepoRecord(id=repo_id, url=GHOSTSCRIPT_URL, ref=ref))
        load_ghostscript_personas(store, repo_id)
        personas = store.personas(repo_id)  # store order matches the recorded context
        issue = client.fetch_issues(ref, SyncRequest(mode="by_ids", ids=(30,)))[0]
        store.save_issue(repo_id, issue)

        completer = Completer(MockTextProvider(PROVIDER_FIXTURES), CallLedger())
        engine = MappingEngine(store, completer)
        mapping = engine.map_issue(repo_id, issue, personas)
        scores = {a.persona_id: a.relevance_score for a in mapping.visible_associations()}
        assert scores == {"p-liwei": pytest.approx(0.9), "p-carlosmendes": pytest.approx(0.7)}
        assert mapping.primary_persona_id == "p-liwei"

    def test_empty_match_list_stores_unmatched_mapping(self, store):
        repo_id = seed_repo(store)
        persona = make_persona(id="p-1")
        store.save_persona(repo_id, persona)
        issue = make_issue(9)
        store.save_issue(repo_id, issue)
        response = json.dumps(
            {
                "matched_persona_ids": [],
                "primary_persona_id": None,
                "confidence": 0.0,
                "reasoning": "nobody fits",
                "persona_rationales": {},
                "analysis_notes": {
                    "issue_type": "bug",
                    "technical_level": "beginner",
                    "urgency_indicators": [],
                },
            }
        )
        mapping = self._engine(store, response).map_issue(repo_id, issue, [persona])
        assert mapping.visible_associations() == ()
        from repopersona.analytics import compute_summary

        assert compute_summary(store, repo_id).coverage_rate == 0.0

    def test_mapping_requires_personas(self, store):
        repo_id = seed_repo(store)
        engine = MappingEngine(store, None)
        with pytest.raises(RepoPersonaError):
            engine.map_issue(repo_id, make_issue(1), [])


class TestOfflineRubricFallback:
    def test_matches_only_above_threshold_and_records_rationale(self, store):
        repo_id = seed_repo(store)
        strong = make_persona(
            id="p-strong",
            goals=("Organize sheet music library for rehearsals",),
            pain_points=("Sheet uploads fail during rehearsal prep",),
            technical_skills=("tablet", "library"),
            occupation="Orchestra librarian",
            experience_level="intermediate",
        )
        weak = make_persona(
            id="p-weak",
            goals=("Review quarterly budgets",),
            pain_points=("Slow expense reports",),
            technical_skills=("spreadsheets",),
            occupation="Accountant",
            experience_level="beginner",
        )
        for p in (strong, weak):
            store.save_persona(repo_id, p)
        issue = make_issue(
            12,
            title="Sheet music library ignores rehearsal ordering",
            body="Organizing the sheet music library for rehearsals is broken; uploads fail.",
        )
        store.save_issue(repo_id, issue)

        engine = MappingEngine(store, None)  # no provider: rubric fallback
        mapping = engine.map_issue(repo_id, issue, [strong, weak])
        ids = {a.persona_id for a in mapping.visible_associations()}
        assert ids == {"p-strong"}
        assoc = mapping.association_for("p-strong")
        assert assoc.rationale.startswith("Rubric evidence")
        assert 0.4 <= assoc.relevance_score <= 1.0

    def test_fallback_makes_zero_provider_calls(self, store):
        repo_id = seed_repo(store)
        persona = make_persona(id="p-1")
        store.save_persona(repo_id, persona)
        issue = make_issue(5)
        store.save_issue(repo_id, issue)
        engine = MappingEngine(store, None)
        engine.map_issue(repo_id, issue, [persona])
        assert store.call_counts() == {}


class TestMapUnmapped:
    def _seed(self, store, issue_count: int = 3):
        repo_id = seed_repo(store)
        persona = make_persona(id="p-1", goals=("g",), pain_points=("p",))
        store.save_persona(repo_id, persona)
        for n in range(1, issue_count + 1):
            store.save_issue(repo_id, make_issue(n, title=f"Issue {n}"))
        return repo_id, persona

    def _response_for_all(self) -> str:
        return json.dumps(
            {
                "matched_persona_ids": ["p-1"],
                "primary_persona_id": "p-1",
                "confidence": 0.7,
                "reasoning": "fits",
                "persona_rationales": {
                    "p-1": {
                        "relevance_score": 0.7,
                        "matched_goals": [],
                        "matched_pain_points": [],
                        "use_case_fit": "",
                        "impact_level": "medium",
                        "rationale": "fits the goal",
                    }
                },
                "analysis_notes": {
                    "issue_type": "bug",
                    "technical_level": "beginner",
                    "urgency_indicators": [],
                },
            }
        )

    def test_maps_every_unmapped_issue_once(self, store):
        repo_id, _ = self._seed(store, 3)
        ledger = CallLedger()
        completer = Completer(
            ScriptedTextProvider({"issue_mapping": [self._response_for_all()] * 3}), ledger
        )
        engine = MappingEngine(store, completer)
        mapped, errors = engine.map_unmapped(repo_id)
        assert (mapped, errors) == (3, [])
        assert ledger.count(call_type="text") == 3

    def test_noop_when_everything_mapped(self, store):
        repo_id, _ = self._seed(store, 2)
        ledger = CallLedger()
        completer = Completer(
            ScriptedTextProvider({"issue_mapping": [self._response_for_all()] * 2}), ledger
        )
        engine = MappingEngine(store, completer)
        engine.map_unmapped(repo_id)
        mapped, errors = engine.map_unmapped(repo_id)
        assert (mapped, errors) == (0, [])
        assert ledger.count(call_type="text") == 2  # no second wave of calls

    def test_one_malformed_response_fails_only_that_issue(self, store):
        repo_id, _ = self._seed(store, 3)
        responses = [self._response_for_all(), "{definitely not json", self._response_for_all()]
        # the malformed response is replayed on the repair re-ask as well
        responses.insert(2, "{still not json")
        completer = Completer(ScriptedTextProvider({"issue_mapping": responses}), CallLedger())
        engine = MappingEngine(store, completer)
        engine.config = engine.config.__class__(mapping_fanout=1)  # keep response order stable
        mapped, errors = engine.map_unmapped(repo_id)
        assert mapped == 2
        assert len(errors) == 1 and "#2" in errors[0]
        assert store.mapping_for(repo_id, 2) is None  # partial progress persists for the rest
        assert store.mapping_for(repo_id, 1) is not None


class TestFaultInjectedFixtureSet:
    def test_one_of_twenty_malformed_responses_maps_nineteen(self, tmp_path):
        import shutil

        from repopersona.app import App

        # corrupt exactly one recorded mapping fixture, then replay the full run
        fixture_copy = tmp_path / "providers"
        shutil.copytree(PROVIDER_FIXTURES, fixture_copy)
        mapping_fixtures = sorted(fixture_copy.glob("issue_mapping__*.json"))
        assert len(mapping_fixtures) >= 20
        broken = mapping_fixtures[7]
        payload = json.loads(broken.read_text())
        payload["response_text"] = "{mangled beyond repair"
        broken.write_text(json.dumps(payload))

        app = App.local(
            None, fixture_dir=HOSTING_FIXTURES, provider_fixtures=str(fixture_copy)
        )
        try:
            submitted = app.submit_analyze("https://github.com/SheetAble/SheetAble", 4)
            assert app.runner.wait(submitted["job_id"], timeout=30)["stage"] == "done"
            sync_id = app.submit_sync(submitted["repo_id"], SyncRequest(), auto_map=True)
            snapshot = app.runner.wait(sync_id, timeout=60)
            assert snapshot["stage"] == "done"  # the job completes, with warnings
            assert snapshot["result"]["mapped"] == 19
            assert len(snapshot["result"]["mapping_errors"]) == 1
            assert snapshot["warnings"]
            assert len(app.store.mappings(submitted["repo_id"])) == 19
        finally:
            app.close()


class TestOverrides:
    def _seed(self, store):
        repo_id = seed_repo(store)
        for pid in ("p-a", "p-b", "p-c"):
            store.save_persona(repo_id, make_persona(id=pid, name=pid))
        store.save_issue(repo_id, make_issue(7))
        engine = MappingEngine(store, None)
        return repo_id, engine

    def _seed_ai_mapping(self, store, repo_id, engine):
        response_personas = [store.get_persona("p-a")[0], store.get_persona("p-b")[0]]
        mapping = json.dumps(
            {
                "matched_persona_ids": ["p-a", "p-b"],
                "primary_persona_id": "p-a",
                "confidence": 0.8,
                "reasoning": "both fit",
                "persona_rationales": {
                    "p-a": {"relevance_score": 0.8, "impact_level": "high", "rationale": "ra"},
                    "p-b": {"relevance_score": 0.6, "impact_level": "medium", "rationale": "rb"},
                },
                "analysis_notes": {
                    "issue_type": "bug",
                    "technical_level": "beginner",
                    "urgency_indicators": [],
                },
            }
        )
        completer = Completer(ScriptedTextProvider({"issue_mapping": [mapping]}), CallLedger())
        provider_engine = MappingEngine(store, completer)
        provider_engine.map_issue(
            repo_id, store.get_issue(repo_id, 7), response_personas
        )

    def test_manual_add_labeled_and_full_relevance(self, store):
        repo_id, engine = self._seed(store)
        self._seed_ai_mapping(store, repo_id, engine)
        mapping = engine.override_associations(repo_id, 7, add=["p-c"], remove=[])
        visible = {a.persona_id: a for a in mapping.visible_associations()}
        assert set(visible) == {"p-a", "p-b", "p-c"}
        assert visible["p-c"].origin == "manual"
        assert visible["p-c"].relevance_score == 1.0
        assert visible["p-c"].rationale == MANUAL_RATIONALE
        assert {visible["p-a"].origin, visible["p-b"].origin} == {"ai_suggested"}

    def test_remove_then_readd_returns_as_manual(self, store):
        repo_id, engine = self._seed(store)
        self._seed_ai_mapping(store, repo_id, engine)
        engine.override_associations(repo_id, 7, add=[], remove=["p-a"])
        mapping = engine.override_associations(repo_id, 7, add=["p-a"], remove=[])
        assoc = mapping.association_for("p-a")
        assert assoc.origin == "manual" and not assoc.tombstoned

    def test_removing_unassociated_persona_conflicts(self, store):
        repo_id, engine = self._seed(store)
        with pytest.raises(ConflictingRequest):
            engine.override_associations(repo_id, 7, add=[], remove=["p-c"])

    def test_add_and_remove_same_persona_conflicts(self, store):
        repo_id, engine = self._seed(store)
        with pytest.raises(ConflictingRequest):
            engine.override_associations(repo_id, 7, add=["p-a"], remove=["p-a"])

    def test_unknown_persona_rejected(self, store):
        repo_id, engine = self._seed(store)
        with pytest.raises(UnknownPersona):
            engine.override_associations(repo_id, 7, add=["p-ghost"], remove=[])

    def test_state_machine_against_reference_model(self, store):
        # enumerate all add/remove sequences of length <= 4 over two personas
        # and compare visible associations with an order-free reference model
        operations = [("add", "p-a"), ("add", "p-b"), ("remove", "p-a"), ("remove", "p-b")]
        for length in range(1, 5):
            for sequence in itertools.product(operations, repeat=length):
                local = Store()
                try:
                    repo_id = seed_repo(local)
                    for pid in ("p-a", "p-b"):
                        local.save_persona(repo_id, make_persona(id=pid, name=pid))
                    local.save_issue(repo_id, make_issue(7))
                    engine = MappingEngine(local, None)

                    model: dict[str, str] = {}  # pid -> visible origin
                    for op, pid in sequence:
                        expect_conflict = (op == "add" and pid in model) or (
                            op == "remove" and pid not in model
                        )
                        try:
                            engine.override_associations(
                                repo_id,
                                7,
                                add=[pid] if op == "add" else [],
                                remove=[pid] if op == "remove" else [],
                            )
                            assert not expect_conflict, (sequence, op, pid)
                            if op == "add":
                                model[pid] = "manual"
                            else:
                                model.pop(pid)
                        except ConflictingRequest:
                            assert expect_conflict, (sequence, op, pid)

                    mapping = local.mapping_for(repo_id, 7)
                    visible = (
                        {a.persona_id: a.origin for a in mapping.visible_associations()}
                        if mapping
                        else {}
                    )
                    assert visible == model, sequence
                finally:
                    local.close()

    def test_manual_add_survives_forced_remap(self, store):
        repo_id, engine = self._seed(store)
        self._seed_ai_mapping(store, repo_id, engine)
        engine.override_associations(repo_id, 7, add=["p-c"], remove=["p-a"])

        remap = json.dumps(
            {
                "matched_persona_ids": ["p-a"],
                "primary_persona_id": "p-a",
                "confidence": 0.9,
                "reasoning": "fresh run",
                "persona_rationales": {
                    "p-a": {"relevance_score": 0.9, "impact_level": "high", "rationale": "again"}
                },
                "analysis_notes": {
                    "issue_type": "bug",
                    "technical_level": "beginner",
                    "urgency_indicators": [],
                },
            }
        )
        completer = Completer(ScriptedTextProvider({"issue_mapping": [remap]}), CallLedger())
        provider_engine = MappingEngine(store, completer)
        mapped, errors = provider_engine.map_unmapped(repo_id, force_remap_ai=True)
        assert (mapped, errors) == (1, [])
        mapping = store.mapping_for(repo_id, 7)
        visible = {a.persona_id: a.origin for a in mapping.visible_associations()}
        assert visible["p-c"] == "manual"  # manual add survived
        assert "p-a" not in visible  # manual removal survived the re-map too


class TestReferentialIntegrity:
    def test_deleting_persona_tombstones_associations_everywhere(self, store):
        from repopersona.personas import PersonaEngine

        repo_id = seed_repo(store)
        keep = make_persona(id="p-keep")
        drop = make_persona(id="p-drop")
        for p in (keep, drop):
            store.save_persona(repo_id, p)
        store.save_issue(repo_id, make_issue(1))
        engine = MappingEngine(store, None)
        engine.override_associations(repo_id, 1, add=["p-keep", "p-drop"], remove=[])

        PersonaEngine(store, None).delete_persona("p-drop")
        mapping = store.mapping_for(repo_id, 1)
        visible = {a.persona_id for a in mapping.visible_associations()}
        assert visible == {"p-keep"}
        assert store.get_persona("p-drop") is None
        assert store.get_persona("p-drop", include_archived=True) is not None
