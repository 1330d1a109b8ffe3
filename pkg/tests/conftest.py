from __future__ import annotations

import json
from datetime import datetime, timezone
from pathlib import Path

import pytest

from repopersona.model import IssueRecord, Persona, RepositoryRef
from repopersona.store import RepoRecord, Store, repo_id_for

FIXTURES = Path(__file__).parent / "fixtures"
HOSTING_FIXTURES = str(FIXTURES / "hosting")
PROVIDER_FIXTURES = str(FIXTURES / "providers")
GOLDEN = FIXTURES / "golden"

SHEETABLE_URL = "https://github.com/SheetAble/SheetAble"
GHOSTSCRIPT_URL = "https://github.com/ArtifexSoftware/Ghostscript.NET"
EXCALIDRAW_URL = "https://github.com/excalidraw/excalidraw"


def ts(text: str) -> datetime:
    return datetime.fromisoformat(text.replace("Z", "+00:00")).astimezone(timezone.utc)


def make_persona(**overrides) -> Persona:
    base = dict(
        id="p-test",
        name="Test Person",
        age=34,
        occupation="Software Developer",
        location="Lisbon, Portugal",
        quote="It should just work.",
        tagline="Daily driver of the tool",
        background="Has used the tool for years.",
        personality_traits=("Pragmatic",),
        goals=("Get work done quickly",),
        pain_points=("Slow startup",),
        technical_skills=("Python",),
        experience_level="advanced",
        confidence_score=0.8,
    )
    base.update(overrides)
    return Persona(**base)


def make_issue(number: int, title: str = "Example issue", **overrides) -> IssueRecord:
    base = dict(
        number=number,
        title=title,
        body="Something broke.",
        labels=("bug",),
        state="open",
        created_at=ts("2024-01-01T00:00:00Z"),
        updated_at=ts("2024-01-01T00:00:00Z"),
    )
    base.update(overrides)
    return IssueRecord(**base)


def seed_repo(store: Store, owner: str = "octo", name: str = "example", stars: int = 10) -> str:
    ref = RepositoryRef(host="github.com", owner=owner, name=name, stars=stars)
    repo_id = repo_id_for(ref)
    store.save_repo(RepoRecord(id=repo_id, url=f"https://github.com/{owner}/{name}", ref=ref))
    return repo_id


def load_ghostscript_personas(store: Store, repo_id: str) -> list[Persona]:
    raw = json.loads((FIXTURES / "personas" / "ghostscript.json").read_text())
    personas = [Persona.from_json(p) for p in raw["personas"]]
    for persona in personas:
        store.save_persona(repo_id, persona)
    return personas


@pytest.fixture
def store():
    s = Store()
    yield s
    s.close()


@pytest.fixture
def offline_app():
    from repopersona.app import App

    app = App.local(
        None,
        fixture_dir=HOSTING_FIXTURES,
        provider_fixtures=PROVIDER_FIXTURES,
    )
    yield app
    app.close()


@pytest.fixture
def fixture_server():
    from repopersona.fixtureserver import FixtureServer

    with FixtureServer(HOSTING_FIXTURES) as server:
        yield server
