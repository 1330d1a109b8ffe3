from __future__ import annotations

import time

import pytest
from fastapi.testclient import TestClient

from conftest import HOSTING_FIXTURES, PROVIDER_FIXTURES, SHEETABLE_URL
from repopersona.app import App
from repopersona.model import Persona, band_of, validate_persona
from repopersona.service import create_service


@pytest.fixture(scope="module")
def client():
    app = App.local(
        None,
        fixture_dir=HOSTING_FIXTURES,
        provider_fixtures=PROVIDER_FIXTURES,
    )
    with TestClient(create_service(app)) as client:
        client.app_state = app
        yield client
    app.close()


def wait_for_job(client: TestClient, job_id: str, timeout: float = 30.0) -> dict:
    deadline = time.monotonic() + timeout
    while time.monotonic() < deadline:
        snapshot = client.get(f"/jobs/{job_id}").json()
        if snapshot["stage"] in ("done", "failed"):
            return snapshot
        time.sleep(0.02)
    raise AssertionError(f"job {job_id} did not finish")


@pytest.fixture(scope="module")
def seeded(client):
    """Analyze + sync + map once; later tests read and refine this state."""
    response = client.post("/repos", json={"url": SHEETABLE_URL, "persona_count": 4})
    assert response.status_code == 202
    submitted = response.json()
    assert wait_for_job(client, submitted["job_id"])["stage"] == "done"
    sync = client.post(
        f"/repos/{submitted['repo_id']}/issues/sync", json={"mode": "all_new"}
    )
    assert sync.status_code == 202
    snapshot = wait_for_job(client, sync.json()["job_id"], timeout=60)
    assert snapshot["result"]["mapped"] == 20
    return submitted["repo_id"]


class TestWorkflowOne:
    def test_analyze_produces_four_personas(self, client, seeded):
        personas = client.get(f"/repos/{seeded}/personas").json()
        assert len(personas) == 4
        for payload in personas:
            assert "version" in payload and payload["archived"] is False
            assert validate_persona(Persona.from_json(payload)) == []

    def test_bad_persona_count_is_400(self, client):
        response = client.post("/repos", json={"url": SHEETABLE_URL, "persona_count": 11})
        assert response.status_code == 400

    def test_malformed_url_is_400(self, client):
        response = client.post("/repos", json={"url": "not a url"})
        assert response.status_code == 400

    def test_repo_dashboard_counts(self, client, seeded):
        payload = client.get(f"/repos/{seeded}").json()
        assert payload["mapping_status"]["total"] == 20
        assert payload["active_personas"] == 4
        assert payload["ref"]["stars"] == 1289

    def test_unknown_job_404(self, client):
        assert client.get("/jobs/j-missing").status_code == 404


class TestPersonaRoutes:
    def test_edit_round_trip_with_version(self, client, seeded):
        persona = client.get(f"/repos/{seeded}/personas").json()[0]
        response = client.put(
            f"/personas/{persona['id']}",
            json={"version": persona["version"], "location": "Berlin, Germany"},
        )
        assert response.status_code == 200
        updated = response.json()
        assert updated["location"] == "Berlin, Germany"
        assert updated["edited"] is True
        assert updated["version"] == persona["version"] + 1

    def test_stale_version_conflicts(self, client, seeded):
        persona = client.get(f"/repos/{seeded}/personas").json()[0]
        response = client.put(
            f"/personas/{persona['id']}", json={"version": 1, "location": "Oslo"}
        )
        assert response.status_code == 409

    def test_invalid_patch_is_400(self, client, seeded):
        persona = client.get(f"/repos/{seeded}/personas").json()[0]
        response = client.put(f"/personas/{persona['id']}", json={"goals": []})
        assert response.status_code == 400

    def test_unknown_persona_404(self, client, seeded):
        assert client.put("/personas/p-ghost", json={"location": "X"}).status_code == 404

    def test_generate_additional_persona(self, client, seeded):
        response = client.post(
            f"/repos/{seeded}/personas/generate", json={"count": 1, "mode": "additional"}
        )
        assert response.status_code == 202
        assert wait_for_job(client, response.json()["job_id"])["stage"] == "done"
        personas = client.get(f"/repos/{seeded}/personas").json()
        names = {p["name"] for p in personas}
        assert "Noah Becker" in names and len(personas) == 5

    def test_delete_archives_and_include_archived_reveals(self, client, seeded):
        personas = client.get(f"/repos/{seeded}/personas").json()
        noah = next(p for p in personas if p["name"] == "Noah Becker")
        assert client.delete(f"/personas/{noah['id']}").status_code == 204
        remaining = {p["id"] for p in client.get(f"/repos/{seeded}/personas").json()}
        assert noah["id"] not in remaining
        archived = client.get(
            f"/repos/{seeded}/personas", params={"include_archived": "true"}
        ).json()
        assert any(p["id"] == noah["id"] and p["archived"] for p in archived)

    def test_merge_replays_case_study(self, client, seeded):
        personas = client.get(f"/repos/{seeded}/personas").json()
        akira = next(p for p in personas if p["name"].startswith("Akira"))
        carlos = next(p for p in personas if p["name"].startswith("Carlos"))
        response = client.post(
            "/personas/merge",
            json={
                "ids": [akira["id"], carlos["id"]],
                "guidance": "keep it more software developer oriented",
            },
        )
        assert response.status_code == 200
        merged = response.json()
        assert merged["name"] == "Technical Integration Specialist"
        assert set(merged["source_persona_ids"]) == {akira["id"], carlos["id"]}
        active = client.get(f"/repos/{seeded}/personas").json()
        assert len(active) == 3  # 4 personas merged down by one

    def test_merge_fewer_than_two_is_400(self, client, seeded):
        persona = client.get(f"/repos/{seeded}/personas").json()[0]
        response = client.post(
            "/personas/merge", json={"ids": [persona["id"], persona["id"]]}
        )
        assert response.status_code == 400


class TestIssueRoutes:
    def test_github_view_badges_match_band_of(self, client, seeded):
        payload = client.get(f"/repos/{seeded}/issues", params={"view": "github"}).json()
        assert payload["view"] == "github"
        assert len(payload["issues"]) == 20
        badged = [row for row in payload["issues"] if row["badges"]]
        assert badged
        for row in badged:
            for badge in row["badges"]:
                assert badge["band"] == band_of(badge["percent"] / 100)
                assert badge["origin"] in ("ai_suggested", "manual")
                assert badge["rationale"]

    def test_persona_view_groups_with_counts(self, client, seeded):
        payload = client.get(f"/repos/{seeded}/issues", params={"view": "persona"}).json()
        groups = {g["persona"]["name"]: g for g in payload["groups"]}
        priya = groups["Priya Singh"]
        assert priya["count"] == len(priya["issues"]) > 0

    def test_state_and_band_filters(self, client, seeded):
        high = client.get(
            f"/repos/{seeded}/issues", params={"confidence_band": "high"}
        ).json()["issues"]
        assert high and all(row["band"] == "high" for row in high)
        closed = client.get(f"/repos/{seeded}/issues", params={"state": "closed"}).json()
        assert closed["issues"] == []  # only open issues were synced

    def test_persona_filter(self, client, seeded):
        personas = client.get(f"/repos/{seeded}/personas").json()
        fatima = next(p for p in personas if p["name"].startswith("Fatima"))
        payload = client.get(
            f"/repos/{seeded}/issues", params={"persona_id": fatima["id"]}
        ).json()
        assert payload["issues"]
        for row in payload["issues"]:
            assert any(b["persona_id"] == fatima["id"] for b in row["badges"])

    def test_issue_detail_carries_mapping_and_cards(self, client, seeded):
        detail = client.get(f"/repos/{seeded}/issues/55").json()
        assert detail["issue"]["number"] == 55
        assert detail["mapping"]["matched_persona_ids"]
        assert detail["personas"][0]["persona"]["name"]
        assert detail["personas"][0]["rationale"]

    def test_unknown_issue_404(self, client, seeded):
        assert client.get(f"/repos/{seeded}/issues/99999").status_code == 404

    def test_associations_add_unknown_persona_404(self, client, seeded):
        response = client.put(
            f"/repos/{seeded}/issues/55/associations",
            json={"add": ["p-ghost"], "remove": []},
        )
        assert response.status_code == 404

    def test_associations_add_and_remove(self, client, seeded):
        personas = client.get(f"/repos/{seeded}/personas").json()
        merged = next(p for p in personas if p["provenance"] == "merged")
        response = client.put(
            f"/repos/{seeded}/issues/55/associations",
            json={"add": [merged["id"]], "remove": []},
        )
        assert response.status_code == 200
        mapping = response.json()
        assert merged["id"] in mapping["matched_persona_ids"]
        assert mapping["persona_rationales"][merged["id"]]["origin"] == "manual"
        # removing it again tombstones rather than deletes
        response = client.put(
            f"/repos/{seeded}/issues/55/associations",
            json={"add": [], "remove": [merged["id"]]},
        )
        assert merged["id"] not in response.json()["matched_persona_ids"]
        assert merged["id"] in response.json()["persona_rationales"]

    def test_conflicting_override_409(self, client, seeded):
        personas = client.get(f"/repos/{seeded}/personas").json()
        pid = personas[0]["id"]
        response = client.put(
            f"/repos/{seeded}/issues/55/associations",
            json={"add": [pid], "remove": [pid]},
        )
        assert response.status_code == 409


class TestAnalyticsRoute:
    def test_summary_shape_and_consistency(self, client, seeded):
        summary = client.get(f"/repos/{seeded}/analytics").json()
        assert summary["total_issues"] == 20
        assert summary["active_personas"] == 3
        assert 0.0 <= summary["coverage_rate"] <= 1.0
        assert summary["repo_stars"] == 1289
        assert sum(summary["label_distribution"].values()) >= summary["total_issues"]

    def test_unknown_repo_404(self, client):
        assert client.get("/repos/r-ghost/analytics").status_code == 404


class TestBusyRepository:
    def test_second_generation_conflicts_while_first_runs(self):
        import threading

        from repopersona.hosting import DirectoryTransport, HostingClient
        from repopersona.providers import MockTextProvider
        from repopersona.store import Store

        class Gate(MockTextProvider):
            def __init__(self, path):
                super().__init__(path)
                self.release = threading.Event()

            def complete(self, bundle):
                assert self.release.wait(timeout=30)
                return super().complete(bundle)

        provider = Gate(PROVIDER_FIXTURES)
        app = App(Store(), HostingClient(DirectoryTransport(HOSTING_FIXTURES)), provider)
        try:
            with TestClient(create_service(app)) as client:
                first = client.post("/repos", json={"url": SHEETABLE_URL})
                assert first.status_code == 202
                second = client.post("/repos", json={"url": SHEETABLE_URL})
                assert second.status_code == 409
                provider.release.set()
                wait_for_job(client, first.json()["job_id"])
        finally:
            provider.release.set()
            app.close()
