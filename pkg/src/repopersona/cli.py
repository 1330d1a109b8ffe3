"""Terminal front door for every workflow, in local or remote mode."""

from __future__ import annotations

import json
import sys
import time
from dataclasses import dataclass
from typing import Any

import click
import requests

from .app import App
from .errors import (
    InvalidParams,
    InvalidPersona,
    MalformedUrl,
    ProviderError,
    RateLimited,
    RepoPersonaError,
)
from .hosting import SyncRequest
from .util import from_rfc3339

EXIT_VALIDATION = 2
EXIT_REMOTE = 3
EXIT_PROVIDER = 4

TERMINAL = ("done", "failed")


class RemoteError(RepoPersonaError):
    def __init__(self, message: str, status: int | None = None) -> None:
        super().__init__(message)
        self.status = status


@dataclass
class Runtime:
    """Executes workflow calls either in-process or against a remote service."""

    app: App | None = None
    api_url: str | None = None
    poll_interval: float = 1.0

    # -- remote plumbing ------------------------------------------------------

    def _http(self, method: str, path: str, payload: dict | None = None, params: dict | None = None) -> Any:
        url = self.api_url.rstrip("/") + path
        try:
            resp = requests.request(method, url, json=payload, params=params, timeout=30)
        except requests.RequestException as exc:
            raise RemoteError(f"cannot reach service at {self.api_url}: {exc}") from exc
        if resp.status_code >= 400:
            try:
                detail = resp.json().get("detail", resp.text)
            except ValueError:
                detail = resp.text
            raise RemoteError(f"HTTP {resp.status_code}: {detail}", status=resp.status_code)
        if resp.status_code == 204 or not resp.text:
            return None
        return resp.json()

    # -- shared operations -------------------------------------------------------

    def analyze(self, url: str, count: int, doc_urls: list[str], context: str) -> dict:
        if self.app:
            return self.app.submit_analyze(url, count, doc_urls, context)
        return self._http(
            "POST",
            "/repos",
            {
                "url": url,
                "persona_count": count,
                "external_urls": doc_urls,
                "additional_context": context,
            },
        )

    def job_status(self, job_id: str) -> dict:
        if self.app:
            return self.app.job_status(job_id)
        return self._http("GET", f"/jobs/{job_id}")

    def wait_for(self, job_id: str) -> dict:
        while True:
            snapshot = self.job_status(job_id)
            if snapshot["stage"] in TERMINAL:
                return snapshot
            time.sleep(self.poll_interval)

    def repos(self) -> list[dict]:
        if self.app:
            return [r.to_json() for r in self.app.store.list_repos()]
        return self._http("GET", "/repos")

    def resolve_repo(self, selector: str | None) -> str:
        repos = self.repos()
        if selector:
            for repo in repos:
                ref = repo["ref"]
                if selector in (repo["id"], f"{ref['owner']}/{ref['name']}", ref["name"]):
                    return repo["id"]
            raise RemoteError(f"no tracked repository matches {selector!r}")
        if len(repos) == 1:
            return repos[0]["id"]
        if not repos:
            raise RemoteError("no repositories tracked yet; run `analyze` first")
        names = ", ".join(f"{r['ref']['owner']}/{r['ref']['name']}" for r in repos)
        raise RemoteError(f"multiple repositories tracked; pick one with --repo ({names})")

    def personas(self, repo_id: str, include_archived: bool = False) -> list[dict]:
        if self.app:
            return self.app.persona_payload(repo_id, include_archived=include_archived)
        return self._http(
            "GET",
            f"/repos/{repo_id}/personas",
            params={"include_archived": str(include_archived).lower()},
        )

    def edit_persona(self, persona_id: str, patch: dict) -> dict:
        if self.app:
            return self.app.personas.edit_persona(persona_id, patch).to_json()
        return self._http("PUT", f"/personas/{persona_id}", patch)

    def delete_persona(self, persona_id: str) -> None:
        if self.app:
            self.app.personas.delete_persona(persona_id)
            return
        self._http("DELETE", f"/personas/{persona_id}")

    def merge_personas(self, ids: list[str], guidance: str | None) -> dict:
        if self.app:
            return self.app.personas.merge_personas(ids, guidance).to_json()
        return self._http("POST", "/personas/merge", {"ids": ids, "guidance": guidance})

    def sync_issues(self, repo_id: str, request: SyncRequest, auto_map: bool) -> dict:
        if self.app:
            job_id = self.app.submit_sync(repo_id, request, auto_map=auto_map)
            return {"job_id": job_id}
        body = request.to_json()
        body["auto_map"] = auto_map
        return self._http("POST", f"/repos/{repo_id}/issues/sync", body)

    def submit_mapping(self, repo_id: str, force_remap_ai: bool) -> dict:
        if self.app:
            return {"job_id": self.app.submit_mapping(repo_id, force_remap_ai=force_remap_ai)}
        raise RemoteError("issue mapping job submission needs --local mode or the sync endpoint")

    def issues(self, repo_id: str, view: str, **filters: Any) -> dict:
        if self.app:
            return self.app.issue_list_payload(repo_id, view, **filters)
        params = {"view": view, **{k: v for k, v in filters.items() if v}}
        return self._http("GET", f"/repos/{repo_id}/issues", params=params)

    def analytics(self, repo_id: str) -> dict:
        if self.app:
            return self.app.analytics(repo_id)
        return self._http("GET", f"/repos/{repo_id}/analytics")


def _exit_code_for(exc: Exception) -> int:
    if isinstance(exc, RemoteError):
        if exc.status in (400, 422):
            return EXIT_VALIDATION
        if exc.status == 502:
            return EXIT_PROVIDER
        return EXIT_REMOTE
    if isinstance(exc, (ProviderError,)):
        return EXIT_PROVIDER
    if isinstance(exc, (MalformedUrl, InvalidPersona, InvalidParams, ValueError)):
        return EXIT_VALIDATION
    if isinstance(exc, RateLimited):
        return EXIT_REMOTE
    if isinstance(exc, RepoPersonaError):
        return EXIT_REMOTE
    return 1


def _run(fn, *args: Any, **kwargs: Any) -> Any:
    try:
        return fn(*args, **kwargs)
    except Exception as exc:  # noqa: BLE001 (single choke point for exit codes)
        click.echo(f"error: {exc}", err=True)
        sys.exit(_exit_code_for(exc))


pass_runtime = click.make_pass_decorator(Runtime)


@click.group()
@click.option("--api", "api_url", default=None, help="Base URL of a running service (remote mode).")
@click.option("--local", "local_mode", is_flag=True, help="Run the engine in-process.")
@click.option("--data-dir", default=None, help="Local mode: directory for the embedded store.")
@click.option(
    "--fixture-dir",
    default=None,
    envvar="REPOPERSONA_FIXTURE_DIR",
    help="Local mode: resolve repository and page fetches from this fixture directory.",
)
@click.option(
    "--provider-fixtures",
    default=None,
    envvar="REPOPERSONA_PROVIDER_FIXTURES",
    help="Local mode: replay completions from this fixture directory.",
)
@click.option("--image-avatars", is_flag=True, help="Local mode: enable image avatar calls.")
@click.option("--poll-interval", default=1.0, show_default=True, help="Seconds between job polls.")
@click.pass_context
def main(
    ctx: click.Context,
    api_url: str | None,
    local_mode: bool,
    data_dir: str | None,
    fixture_dir: str | None,
    provider_fixtures: str | None,
    image_avatars: bool,
    poll_interval: float,
) -> None:
    """Generate user personas from a repository and map its issues to them."""
    if api_url and local_mode:
        raise click.UsageError("--api and --local are mutually exclusive")
    if not api_url and not local_mode:
        local_mode = True  # default to the embedded engine
    runtime = Runtime(api_url=api_url, poll_interval=poll_interval)
    if local_mode:
        runtime.app = App.local(
            data_dir,
            fixture_dir=fixture_dir,
            provider_fixtures=provider_fixtures,
            images_enabled=image_avatars,
        )
        ctx.call_on_close(runtime.app.close)
    ctx.obj = runtime


@main.command()
@click.argument("repo_url")
@click.option("--personas", "count", type=click.IntRange(1, 10), default=4, show_default=True)
@click.option("--doc-url", "doc_urls", multiple=True, help="External documentation URL (repeatable).")
@click.option("--context", default="", help="Free-form description of the user base.")
@click.option("--wait", is_flag=True, help="Poll to completion, then sync and map issues.")
@pass_runtime
def analyze(runtime: Runtime, repo_url: str, count: int, doc_urls: tuple[str, ...], context: str, wait: bool) -> None:
    """Generate personas for REPO_URL, then map its issues."""

    def flow() -> None:
        submitted = runtime.analyze(repo_url, count, list(doc_urls), context)
        click.echo(f"repository: {submitted['repo_id']}")
        click.echo(f"generation job: {submitted['job_id']}")
        if not wait:
            return
        snapshot = runtime.wait_for(submitted["job_id"])
        if snapshot["stage"] == "failed":
            raise ProviderError(snapshot["error"]) if "Provider" in str(
                snapshot["error"]
            ) else RepoPersonaError(snapshot["error"])
        click.echo("generation complete; syncing issues")
        sync = runtime.sync_issues(submitted["repo_id"], SyncRequest(), auto_map=False)
        sync_snapshot = runtime.wait_for(sync["job_id"])
        if sync_snapshot["stage"] == "failed":
            raise RepoPersonaError(sync_snapshot["error"])
        mapping = runtime.submit_mapping(submitted["repo_id"], force_remap_ai=False)
        map_snapshot = runtime.wait_for(mapping["job_id"])
        if map_snapshot["stage"] == "failed":
            raise RepoPersonaError(map_snapshot["error"])
        result = map_snapshot.get("result") or {}
        click.echo(f"mapped issues: {result.get('mapped', 0)}")
        _print_personas_table(runtime.personas(submitted["repo_id"]))

    _run(flow)


def _print_personas_table(personas: list[dict]) -> None:
    if not personas:
        click.echo("no personas")
        return
    width = max(len(p["name"]) for p in personas)
    for p in personas:
        provenance = {"ai_generated": "AI", "manual": "manual", "merged": "merged"}[p["provenance"]]
        click.echo(
            f"{p['name']:<{width}}  {p['age']:>3}  {p['experience_level']:<12} "
            f"{provenance:<7} {p['occupation']}"
        )


@main.group()
def personas() -> None:
    """Inspect and refine the persona set."""


@personas.command("list")
@click.option("--repo", default=None)
@click.option("--include-archived", is_flag=True)
@pass_runtime
def personas_list(runtime: Runtime, repo: str | None, include_archived: bool) -> None:
    def flow() -> None:
        repo_id = runtime.resolve_repo(repo)
        rows = runtime.personas(repo_id, include_archived=include_archived)
        for p in rows:
            marker = " (archived)" if p.get("archived") else ""
            click.echo(f"{p['id']}  {p['name']} — {p['occupation']}{marker}")

    _run(flow)


@personas.command("show")
@click.argument("persona_id")
@click.option("--repo", default=None)
@pass_runtime
def personas_show(runtime: Runtime, persona_id: str, repo: str | None) -> None:
    def flow() -> None:
        repo_id = runtime.resolve_repo(repo)
        for p in runtime.personas(repo_id, include_archived=True):
            if p["id"] == persona_id:
                click.echo(json.dumps(p, indent=2))
                return
        raise RemoteError(f"persona {persona_id} not found")

    _run(flow)


@personas.command("edit")
@click.argument("persona_id")
@click.option("--set", "assignments", multiple=True, help="field=value (repeatable; JSON for lists)")
@pass_runtime
def personas_edit(runtime: Runtime, persona_id: str, assignments: tuple[str, ...]) -> None:
    def flow() -> None:
        patch: dict[str, Any] = {}
        for assignment in assignments:
            if "=" not in assignment:
                raise ValueError(f"--set needs field=value, got {assignment!r}")
            key, raw = assignment.split("=", 1)
            try:
                patch[key] = json.loads(raw)
            except ValueError:
                patch[key] = raw
        updated = runtime.edit_persona(persona_id, patch)
        click.echo(json.dumps(updated, indent=2))

    _run(flow)


@personas.command("merge")
@click.argument("persona_ids", nargs=-1, required=True)
@click.option("--guidance", default=None)
@pass_runtime
def personas_merge(runtime: Runtime, persona_ids: tuple[str, ...], guidance: str | None) -> None:
    def flow() -> None:
        merged = runtime.merge_personas(list(persona_ids), guidance)
        click.echo(f"merged into {merged['id']}: {merged['name']} — {merged['occupation']}")

    _run(flow)


@personas.command("delete")
@click.argument("persona_id")
@pass_runtime
def personas_delete(runtime: Runtime, persona_id: str) -> None:
    _run(runtime.delete_persona, persona_id)


@personas.command("export")
@click.option("--repo", default=None)
@click.option("--format", "fmt", type=click.Choice(["json", "markdown"]), default="json")
@pass_runtime
def personas_export(runtime: Runtime, repo: str | None, fmt: str) -> None:
    def flow() -> None:
        repo_id = runtime.resolve_repo(repo)
        rows = runtime.personas(repo_id)
        if fmt == "json":
            click.echo(json.dumps(rows, indent=2))
            return
        click.echo(export_markdown(rows))

    _run(flow)


def export_markdown(personas: list[dict]) -> str:
    """Persona cards in the on-card field order, ready for project docs."""
    blocks = []
    for p in personas:
        tag = {"ai_generated": "AI", "manual": "Manual", "merged": "Merged"}[p["provenance"]]
        lines = [f"## {p['name']}  `{tag}`"]
        avatar = p.get("avatar") or {}
        if avatar.get("locator"):
            lines.append(f"![avatar]({avatar['locator']})")
        lines.append(
            f"**{p['occupation']}** — age {p['age']}, {p['location']} "
            f"({p['experience_level']})"
        )
        if p.get("quote"):
            lines.append(f"> {p['quote']}")
        if p.get("tagline"):
            lines.append(f"*{p['tagline']}*")
        if p.get("background"):
            lines.append(p["background"])
        lines.append("### Goals & Motivations")
        lines.extend(f"- {g}" for g in p["goals"])
        lines.append("### Pain Points & Frustrations")
        lines.extend(f"- {pp}" for pp in p["pain_points"])
        blocks.append("\n\n".join(lines))
    return "\n\n---\n\n".join(blocks)


@main.group()
def issues() -> None:
    """Sync, browse, and map tracker issues."""


@issues.command("sync")
@click.option("--repo", default=None)
@click.option(
    "--mode",
    type=click.Choice(["all-new", "ids", "labels", "date-range"]),
    default="all-new",
    show_default=True,
)
@click.option("--id", "ids", multiple=True, type=int, help="Issue number (repeatable; ids mode).")
@click.option("--label", "labels", multiple=True, help="Label filter (repeatable; labels mode).")
@click.option("--since", default=None, help="RFC 3339 lower bound (date-range mode).")
@click.option("--until", default=None, help="RFC 3339 upper bound (date-range mode).")
@click.option("--limit", default=20, show_default=True)
@click.option("--no-map", is_flag=True, help="Skip automatic mapping of new issues.")
@click.option("--wait", is_flag=True)
@pass_runtime
def issues_sync(
    runtime: Runtime,
    repo: str | None,
    mode: str,
    ids: tuple[int, ...],
    labels: tuple[str, ...],
    since: str | None,
    until: str | None,
    limit: int,
    no_map: bool,
    wait: bool,
) -> None:
    def flow() -> None:
        repo_id = runtime.resolve_repo(repo)
        request = SyncRequest(
            mode=mode.replace("-", "_"),
            ids=tuple(ids),
            labels=tuple(labels),
            since=from_rfc3339(since),
            until=from_rfc3339(until),
            limit=limit,
        )
        submitted = runtime.sync_issues(repo_id, request, auto_map=not no_map)
        click.echo(f"sync job: {submitted['job_id']}")
        if wait:
            snapshot = runtime.wait_for(submitted["job_id"])
            if snapshot["stage"] == "failed":
                raise RepoPersonaError(snapshot["error"])
            click.echo(json.dumps(snapshot.get("result") or {}))

    _run(flow)


@issues.command("list")
@click.option("--repo", default=None)
@click.option("--view", type=click.Choice(["github", "persona"]), default="github", show_default=True)
@click.option("--state", type=click.Choice(["open", "closed"]), default=None)
@click.option("--band", type=click.Choice(["high", "medium", "low", "unmatched"]), default=None)
@click.option("--persona", "persona_id", default=None)
@click.option("--json", "as_json", is_flag=True)
@pass_runtime
def issues_list(
    runtime: Runtime,
    repo: str | None,
    view: str,
    state: str | None,
    band: str | None,
    persona_id: str | None,
    as_json: bool,
) -> None:
    def flow() -> None:
        repo_id = runtime.resolve_repo(repo)
        payload = runtime.issues(
            repo_id, view, state=state, confidence_band=band, persona_id=persona_id
        )
        if as_json:
            click.echo(json.dumps(payload, indent=2))
            return
        if view == "github":
            for row in payload["issues"]:
                badges = " ".join(
                    f"[{b['name']} {b['percent']}% {b['band']}]" for b in row["badges"]
                )
                click.echo(f"#{row['number']:<5} {row['state']:<6} {row['title']}  {badges}")
        else:
            for group in payload["groups"]:
                persona = group["persona"]
                click.echo(f"{persona['name']} ({persona['occupation']}): {group['count']} issues")
                for row in group["issues"]:
                    click.echo(f"    #{row['number']} {row['title']}")
            if payload["unmatched_issues"]:
                click.echo(f"(unmatched): {len(payload['unmatched_issues'])} issues")

    _run(flow)


@issues.command("map")
@click.option("--repo", default=None)
@click.option("--force-remap-ai", is_flag=True, help="Re-map issues that only have AI associations.")
@click.option("--wait", is_flag=True)
@pass_runtime
def issues_map(runtime: Runtime, repo: str | None, force_remap_ai: bool, wait: bool) -> None:
    def flow() -> None:
        repo_id = runtime.resolve_repo(repo)
        submitted = runtime.submit_mapping(repo_id, force_remap_ai)
        click.echo(f"mapping job: {submitted['job_id']}")
        if wait:
            snapshot = runtime.wait_for(submitted["job_id"])
            if snapshot["stage"] == "failed":
                raise RepoPersonaError(snapshot["error"])
            click.echo(json.dumps(snapshot.get("result") or {}))

    _run(flow)


@main.command()
@click.option("--repo", default=None)
@click.option("--json", "as_json", is_flag=True)
@pass_runtime
def analytics(runtime: Runtime, repo: str | None, as_json: bool) -> None:
    """Print the dashboard summary for a repository."""

    def flow() -> None:
        repo_id = runtime.resolve_repo(repo)
        summary = runtime.analytics(repo_id)
        if as_json:
            click.echo(json.dumps(summary, indent=2))
            return
        click.echo(f"total issues:    {summary['total_issues']}")
        click.echo(f"active personas: {summary['active_personas']}")
        click.echo(f"coverage rate:   {summary['coverage_rate']:.0%}")
        click.echo(f"repo stars:      {summary['repo_stars']}")
        click.echo("label distribution:")
        for label, count in sorted(summary["label_distribution"].items()):
            click.echo(f"  {label}: {count}")
        click.echo("persona coverage:")
        for pid, count in sorted(summary["persona_coverage"].items()):
            click.echo(f"  {pid}: {count}")

    _run(flow)


@main.command()
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", default=8000, show_default=True)
@pass_runtime
def serve(runtime: Runtime, host: str, port: int) -> None:
    """Run the HTTP service (local engine behind the API)."""
    import uvicorn

    from .service import create_service

    if runtime.app is None:
        raise click.UsageError("serve requires --local mode")
    uvicorn.run(create_service(runtime.app), host=host, port=port, log_level="warning")


if __name__ == "__main__":
    main()
