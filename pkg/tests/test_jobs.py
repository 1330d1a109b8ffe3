from __future__ import annotations

import threading
import time

import pytest

from conftest import HOSTING_FIXTURES, PROVIDER_FIXTURES, SHEETABLE_URL, make_persona, seed_repo
from repopersona.app import App
from repopersona.errors import BusyRepository, InvalidParams, UnknownJob
from repopersona.hosting import DirectoryTransport, HostingClient, SyncRequest
from repopersona.jobs import JobRunner
from repopersona.providers import MockTextProvider
from repopersona.store import Store


def offline(app_kwargs=None, **local_kwargs):
    return App.local(
        None,
        fixture_dir=HOSTING_FIXTURES,
        provider_fixtures=PROVIDER_FIXTURES,
        **local_kwargs,
    )


class GatedMockProvider(MockTextProvider):
    """Mock provider that blocks on a gate before a chosen stage answers."""

    def __init__(self, fixtures_dir, hold_stage: str):
        super().__init__(fixtures_dir)
        self.hold_stage = hold_stage
        self.reached = threading.Event()
        self.release = threading.Event()

    def complete(self, bundle):
        if bundle.stage == self.hold_stage:
            self.reached.set()
            assert self.release.wait(timeout=30)
        return super().complete(bundle)


class TestSubmitContract:
    def test_submit_returns_before_any_provider_call(self):
        provider = GatedMockProvider(PROVIDER_FIXTURES, "link_discovery")
        app = App(
            Store(),
            HostingClient(DirectoryTransport(HOSTING_FIXTURES)),
            provider,
        )
        try:
            started = time.monotonic()
            submitted = app.submit_analyze(SHEETABLE_URL, 4)
            elapsed = time.monotonic() - started
            assert elapsed < 0.5  # enqueue only; the repo fetch dominates
            assert app.store.call_counts(submitted["job_id"]) == {}
            provider.reached.wait(timeout=5)
            provider.release.set()
            assert app.runner.wait(submitted["job_id"], timeout=30)["stage"] == "done"
        finally:
            provider.release.set()
            app.close()

    def test_duplicate_generation_for_same_repo_rejected(self):
        provider = GatedMockProvider(PROVIDER_FIXTURES, "user_insights")
        app = App(
            Store(),
            HostingClient(DirectoryTransport(HOSTING_FIXTURES)),
            provider,
        )
        try:
            first = app.submit_analyze(SHEETABLE_URL, 4)
            with pytest.raises(BusyRepository):
                app.submit_analyze(SHEETABLE_URL, 4)
            provider.release.set()
            app.runner.wait(first["job_id"], timeout=30)
            # after the first finishes the repository is free again
            second = app.submit_analyze(SHEETABLE_URL, 4)
            assert app.runner.wait(second["job_id"], timeout=30)["stage"] == "done"
        finally:
            provider.release.set()
            app.close()

    def test_concurrent_submitters_exactly_one_accepted(self):
        provider = GatedMockProvider(PROVIDER_FIXTURES, "user_insights")
        app = App(
            Store(),
            HostingClient(DirectoryTransport(HOSTING_FIXTURES)),
            provider,
        )
        results: list[str] = []
        errors: list[Exception] = []

        def submit():
            try:
                results.append(app.submit_analyze(SHEETABLE_URL, 4)["job_id"])
            except BusyRepository as exc:
                errors.append(exc)

        try:
            threads = [threading.Thread(target=submit) for _ in range(2)]
            for t in threads:
                t.start()
            for t in threads:
                t.join()
            assert len(results) == 1 and len(errors) == 1
            provider.release.set()
            app.runner.wait(results[0], timeout=30)
        finally:
            provider.release.set()
            app.close()

    def test_mapping_job_with_zero_personas_is_invalid(self):
        app = offline()
        try:
            ref = app.client.fetch_repo(SHEETABLE_URL)
            from repopersona.store import RepoRecord, repo_id_for

            repo_id = repo_id_for(ref)
            app.store.save_repo(RepoRecord(id=repo_id, url=SHEETABLE_URL, ref=ref))
            with pytest.raises(InvalidParams):
                app.submit_mapping(repo_id)
        finally:
            app.close()

    def test_persona_count_bounds_rejected_at_submit(self):
        app = offline()
        try:
            with pytest.raises(InvalidParams):
                app.submit_analyze(SHEETABLE_URL, 11)
            with pytest.raises(InvalidParams):
                app.submit_analyze(SHEETABLE_URL, 0)
        finally:
            app.close()

    def test_unknown_job(self):
        app = offline()
        try:
            with pytest.raises(UnknownJob):
                app.job_status("j-nope")
        finally:
            app.close()


class TestProgressContract:
    def test_stage_history_and_percent_monotonic(self):
        app = offline()
        try:
            submitted = app.submit_analyze(SHEETABLE_URL, 4)
            percents = []
            while True:
                snapshot = app.job_status(submitted["job_id"])
                percents.append(snapshot["percent"])
                if snapshot["stage"] in ("done", "failed"):
                    break
                time.sleep(0.005)
            assert snapshot["stage"] == "done"
            assert percents == sorted(percents)
            assert snapshot["stage_history"] == [
                "queued",
                "fetch_readme",
                "external_docs",
                "analyze_domain",
                "generate_personas",
                "done",
            ]
            assert snapshot["percent"] == 100
        finally:
            app.close()

    def test_mid_analyze_domain_percent_sits_in_its_band(self):
        provider = GatedMockProvider(PROVIDER_FIXTURES, "domain_analysis")
        app = App(
            Store(),
            HostingClient(DirectoryTransport(HOSTING_FIXTURES)),
            provider,
        )
        try:
            submitted = app.submit_analyze(SHEETABLE_URL, 4)
            assert provider.reached.wait(timeout=10)
            snapshot = app.job_status(submitted["job_id"])
            assert snapshot["stage"] == "analyze_domain"
            assert 45 <= snapshot["percent"] < 75
            provider.release.set()
            app.runner.wait(submitted["job_id"], timeout=30)
        finally:
            provider.release.set()
            app.close()

    def test_terminal_snapshots_are_immutable(self):
        app = offline()
        try:
            submitted = app.submit_analyze(SHEETABLE_URL, 4)
            done = app.runner.wait(submitted["job_id"], timeout=30)
            again = app.job_status(submitted["job_id"])
            assert done == again
            # direct updates after the terminal stage are ignored
            app.runner._update(submitted["job_id"], stage="queued", percent=1)
            assert app.job_status(submitted["job_id"]) == done
        finally:
            app.close()

    def test_failed_link_fetch_degrades_but_job_completes(self):
        import json as _json

        from repopersona.fixturerepo import FaultPlan
        from repopersona.providers import ScriptedTextProvider
        from test_personas import DOMAIN, INSIGHTS, generation_response

        plan = _json.dumps(
            {
                "internal_links": [],
                "external_links": [
                    {"url": "https://sheetable.net/", "expected_content": "",
                     "user_relevance": "", "priority": 5}
                ],
                "reasoning": "homepage",
            }
        )
        faults = FaultPlan(fail_substrings={"sheetable.net": 404})
        app = App(
            Store(),
            HostingClient(DirectoryTransport(HOSTING_FIXTURES, faults)),
            ScriptedTextProvider(
                {
                    "link_discovery": [plan],
                    "user_insights": [INSIGHTS],
                    "domain_analysis": [DOMAIN],
                    "persona_generation": [generation_response(4)],
                }
            ),
        )
        try:
            submitted = app.submit_analyze(SHEETABLE_URL, 4)
            snapshot = app.runner.wait(submitted["job_id"], timeout=30)
            # the dead homepage degrades to a warning; the run still finishes
            assert snapshot["stage"] == "done"
            assert any("sheetable.net" in w for w in snapshot["warnings"])
            assert snapshot["stage_history"][-2:] == ["generate_personas", "done"]
        finally:
            app.close()

    def test_missing_readme_and_no_docs_fails_with_empty_corpus(self):
        from repopersona.fixturerepo import FaultPlan

        faults = FaultPlan(readme_status=404)
        app = App(
            Store(),
            HostingClient(DirectoryTransport(HOSTING_FIXTURES, faults)),
            MockTextProvider(PROVIDER_FIXTURES),
        )
        try:
            submitted = app.submit_analyze(SHEETABLE_URL, 4)
            snapshot = app.runner.wait(submitted["job_id"], timeout=30)
            assert snapshot["stage"] == "failed"
            assert "EmptyCorpus" in snapshot["error"]
        finally:
            app.close()


class TestRestartRecovery:
    def test_queued_jobs_rerun_and_interrupted_jobs_fail(self, store):
        repo_id = seed_repo(store)
        store.save_persona(repo_id, make_persona(id="p-1"))
        store.save_job(
            repo_id,
            "j-queued",
            {
                "job_id": "j-queued",
                "kind": "mapping",
                "repo_id": repo_id,
                "params": {"repo_id": repo_id},
                "stage": "queued",
                "percent": 0,
                "error": None,
                "stage_history": ["queued"],
                "warnings": [],
                "result": None,
                "created_at": None,
                "started_at": None,
                "finished_at": None,
            },
        )
        store.save_job(
            repo_id,
            "j-interrupted",
            {
                "job_id": "j-interrupted",
                "kind": "mapping",
                "repo_id": repo_id,
                "params": {"repo_id": repo_id},
                "stage": "map_issues",
                "percent": 40,
                "error": None,
                "stage_history": ["queued", "map_issues"],
                "warnings": [],
                "result": None,
                "created_at": None,
                "started_at": None,
                "finished_at": None,
            },
        )

        runner = JobRunner(store, workers=1)
        from repopersona.mapping import MappingEngine

        engine = MappingEngine(store, None)

        def run_mapping(ctx):
            mapped, errors = engine.map_unmapped(ctx.params["repo_id"], job_id=ctx.job_id)
            return {"mapped": mapped}

        runner.register("mapping", run_mapping)
        runner.recover()
        runner.start()
        try:
            interrupted = runner.wait("j-interrupted", timeout=5)
            assert interrupted["stage"] == "failed"
            assert "interrupted by restart" in interrupted["error"]
            queued = runner.wait("j-queued", timeout=5)
            assert queued["stage"] == "done"  # re-ran after restart
        finally:
            runner.shutdown()


class TestSyncJob:
    def test_sync_fetches_and_auto_maps_by_default(self):
        app = offline()
        try:
            submitted = app.submit_analyze(SHEETABLE_URL, 4)
            app.runner.wait(submitted["job_id"], timeout=30)
            sync_id = app.submit_sync(submitted["repo_id"], SyncRequest())
            snapshot = app.runner.wait(sync_id, timeout=60)
            assert snapshot["stage"] == "done"
            assert snapshot["result"] == {"synced": 20, "mapped": 20, "mapping_errors": []}
            assert snapshot["stage_history"] == ["queued", "fetch_issues", "map_issues", "done"]
        finally:
            app.close()

    def test_second_all_new_sync_is_a_noop(self):
        app = offline()
        try:
            submitted = app.submit_analyze(SHEETABLE_URL, 4)
            app.runner.wait(submitted["job_id"], timeout=30)
            first = app.submit_sync(submitted["repo_id"], SyncRequest())
            app.runner.wait(first, timeout=60)
            second = app.submit_sync(submitted["repo_id"], SyncRequest())
            snapshot = app.runner.wait(second, timeout=60)
            assert snapshot["result"]["synced"] == 0
            assert snapshot["result"]["mapped"] == 0
        finally:
            app.close()
