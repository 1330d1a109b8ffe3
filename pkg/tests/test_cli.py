from __future__ import annotations

import json
import socket

import pytest
from click.testing import CliRunner

from conftest import HOSTING_FIXTURES, PROVIDER_FIXTURES, SHEETABLE_URL
from repopersona.cli import export_markdown, main


def run_cli(args, data_dir, **kwargs):
    base = [
        "--local",
        "--data-dir",
        str(data_dir),
        "--fixture-dir",
        HOSTING_FIXTURES,
        "--provider-fixtures",
        PROVIDER_FIXTURES,
        "--poll-interval",
        "0.05",
    ]
    return CliRunner().invoke(main, base + args, catch_exceptions=False, **kwargs)


@pytest.fixture(scope="module")
def analyzed_dir(tmp_path_factory):
    data_dir = tmp_path_factory.mktemp("cli-store")
    result = run_cli(
        ["analyze", SHEETABLE_URL, "--personas", "4", "--wait"], data_dir
    )
    assert result.exit_code == 0, result.output
    return data_dir


class TestAnalyze:
    def test_end_to_end_prints_personas_and_mapping_counts(self, analyzed_dir, tmp_path):
        result = run_cli(
            ["analyze", SHEETABLE_URL, "--personas", "4", "--wait"], tmp_path
        )
        assert result.exit_code == 0, result.output
        assert "mapped issues: 20" in result.output
        for name in ("Akira Nakamura", "Priya Singh", "Carlos Rodriguez", "Fatima Al-Shehri"):
            assert name in result.output

    def test_without_wait_prints_job_id_and_returns(self, tmp_path):
        result = run_cli(["analyze", SHEETABLE_URL, "--personas", "4"], tmp_path)
        assert result.exit_code == 0
        assert "generation job: j-" in result.output
        assert "mapped issues" not in result.output

    def test_persona_count_zero_exits_2(self, tmp_path):
        result = CliRunner().invoke(
            main, ["--local", "analyze", "x", "--personas", "0"]
        )
        assert result.exit_code == 2

    def test_malformed_url_exits_2(self, tmp_path):
        result = run_cli(["analyze", "not a url", "--personas", "4"], tmp_path)
        assert result.exit_code == 2

    def test_missing_provider_fixture_exits_4(self, tmp_path):
        result = CliRunner().invoke(
            main,
            [
                "--local",
                "--data-dir",
                str(tmp_path),
                "--fixture-dir",
                HOSTING_FIXTURES,
                "--provider-fixtures",
                str(tmp_path / "empty"),
                "--poll-interval",
                "0.05",
                "analyze",
                SHEETABLE_URL,
                "--wait",
            ],
            catch_exceptions=False,
        )
        assert result.exit_code == 4

    def test_local_mode_makes_zero_network_calls(self, tmp_path, monkeypatch):
        def refuse(*args, **kwargs):
            raise AssertionError("socket opened in --local offline mode")

        monkeypatch.setattr(socket, "socket", refuse)
        monkeypatch.setattr(socket, "create_connection", refuse)
        result = run_cli(
            ["analyze", SHEETABLE_URL, "--personas", "4", "--wait"], tmp_path
        )
        assert result.exit_code == 0, result.output


class TestPersonasCommands:
    def test_list_shows_ids_and_occupations(self, analyzed_dir):
        result = run_cli(["personas", "list"], analyzed_dir)
        assert result.exit_code == 0
        assert "Music Educator" in result.output

    def test_export_json_round_trips(self, analyzed_dir):
        result = run_cli(["personas", "export", "--format", "json"], analyzed_dir)
        assert result.exit_code == 0
        personas = json.loads(result.output)
        assert len(personas) == 4
        from repopersona.model import Persona, validate_persona

        assert all(validate_persona(Persona.from_json(p)) == [] for p in personas)

    def test_export_markdown_card_order(self, analyzed_dir):
        result = run_cli(["personas", "export", "--format", "markdown"], analyzed_dir)
        assert result.exit_code == 0
        text = result.output
        akira = text.index("## Akira Nakamura")
        block = text[akira:]
        positions = [
            block.index("![avatar]"),
            block.index("**Freelance Music Composer**"),
            block.index("> My scores are my livelihood"),
            block.index("### Goals & Motivations"),
            block.index("### Pain Points & Frustrations"),
        ]
        assert positions == sorted(positions)  # on-card field order preserved

    def test_edit_and_show(self, analyzed_dir):
        listing = run_cli(["personas", "export", "--format", "json"], analyzed_dir)
        persona = json.loads(listing.output)[0]
        result = run_cli(
            ["personas", "edit", persona["id"], "--set", "location=Berlin, Germany"],
            analyzed_dir,
        )
        assert result.exit_code == 0
        shown = run_cli(["personas", "show", persona["id"]], analyzed_dir)
        assert "Berlin, Germany" in shown.output

    def test_edit_clearing_goals_exits_2(self, analyzed_dir):
        listing = run_cli(["personas", "export", "--format", "json"], analyzed_dir)
        persona = json.loads(listing.output)[0]
        result = run_cli(
            ["personas", "edit", persona["id"], "--set", "goals=[]"], analyzed_dir
        )
        assert result.exit_code == 2


class TestIssuesCommands:
    def test_list_github_view_shows_badges(self, analyzed_dir):
        result = run_cli(["issues", "list", "--view", "github"], analyzed_dir)
        assert result.exit_code == 0
        assert "#55" in result.output
        assert "85%" in result.output and "high" in result.output

    def test_list_persona_view_groups(self, analyzed_dir):
        result = run_cli(["issues", "list", "--view", "persona"], analyzed_dir)
        assert result.exit_code == 0
        assert "Priya Singh (Music Educator):" in result.output

    def test_band_filter(self, analyzed_dir):
        result = run_cli(
            ["issues", "list", "--band", "low", "--json"], analyzed_dir
        )
        payload = json.loads(result.output)
        assert all(row["band"] == "low" for row in payload["issues"])

    def test_sync_noop_after_full_sync(self, analyzed_dir):
        result = run_cli(["issues", "sync", "--wait"], analyzed_dir)
        assert result.exit_code == 0
        assert '"synced": 0' in result.output

    def test_map_noop_when_everything_mapped(self, analyzed_dir):
        result = run_cli(["issues", "map", "--wait"], analyzed_dir)
        assert result.exit_code == 0
        assert '"mapped": 0' in result.output


class TestAnalyticsCommand:
    def test_json_outputs_schema_stable_summary(self, analyzed_dir):
        result = run_cli(["analytics", "--json"], analyzed_dir)
        assert result.exit_code == 0
        summary = json.loads(result.output)
        from repopersona.model import AnalyticsSummary

        parsed = AnalyticsSummary.from_json(summary)
        assert parsed.total_issues == 20
        assert parsed.coverage_rate == 1.0

    def test_human_readable_table(self, analyzed_dir):
        result = run_cli(["analytics"], analyzed_dir)
        assert result.exit_code == 0
        assert "coverage rate:   100%" in result.output


class TestRemoteMode:
    def test_unreachable_api_exits_3(self):
        result = CliRunner().invoke(
            main, ["--api", "http://127.0.0.1:1", "personas", "list"]
        )
        assert result.exit_code == 3

    def test_api_and_local_are_mutually_exclusive(self):
        result = CliRunner().invoke(main, ["--api", "http://x", "--local", "analytics"])
        assert result.exit_code == 2


def test_export_markdown_helper_tags_provenance():
    personas = [
        {
            "name": "A",
            "provenance": "manual",
            "occupation": "Dev",
            "age": 30,
            "location": "X",
            "experience_level": "expert",
            "quote": "",
            "tagline": "",
            "background": "",
            "avatar": None,
            "goals": ["g"],
            "pain_points": ["p"],
        }
    ]
    text = export_markdown(personas)
    assert "`Manual`" in text
