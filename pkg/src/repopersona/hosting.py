"""Client for the hosting service's REST API, with pluggable transports."""

from __future__ import annotations

import base64
import threading
import time
from dataclasses import dataclass
from datetime import datetime
from typing import Any, Callable, Protocol
from urllib.parse import urlsplit

import requests

from . import fixturerepo
from .errors import MalformedUrl, NoReadme, NotFound, RateLimited, RepoPersonaError
from .model import IssueRecord, RepositoryRef, ResourceDocument
from .util import from_rfc3339, to_rfc3339, utcnow

USER_AGENT = "repopersona/0.1 (+persona research tooling)"
FETCH_TIMEOUT = 10.0
MAX_RATE_RETRIES = 3

SYNC_MODES = ("all_new", "by_ids", "by_labels", "by_date_range")


@dataclass(frozen=True)
class SyncRequest:
    """What to pull from the issue tracker on a (re-)sync."""

    mode: str = "all_new"
    ids: tuple[int, ...] = ()
    labels: tuple[str, ...] = ()
    since: datetime | None = None
    until: datetime | None = None
    limit: int = 20
    state: str = "open"

    def __post_init__(self) -> None:
        if self.mode not in SYNC_MODES:
            raise RepoPersonaError(f"unknown sync mode {self.mode!r}")
        if self.limit < 1:
            raise RepoPersonaError("sync limit must be >= 1")
        if self.mode == "by_ids" and not self.ids:
            raise RepoPersonaError("by_ids sync needs issue numbers")
        if self.mode != "by_ids" and self.ids:
            raise RepoPersonaError("ids only apply to by_ids mode")
        if self.mode == "by_labels" and not self.labels:
            raise RepoPersonaError("by_labels sync needs labels")
        if self.mode != "by_labels" and self.labels:
            raise RepoPersonaError("labels only apply to by_labels mode")
        if self.mode == "by_date_range" and self.since is None and self.until is None:
            raise RepoPersonaError("by_date_range sync needs since and/or until")
        if self.mode not in ("by_date_range", "all_new") and (self.since or self.until):
            raise RepoPersonaError("dates only apply to by_date_range mode")

    def to_json(self) -> dict[str, Any]:
        return {
            "mode": self.mode,
            "ids": list(self.ids),
            "labels": list(self.labels),
            "since": to_rfc3339(self.since),
            "until": to_rfc3339(self.until),
            "limit": self.limit,
            "state": self.state,
        }

    @classmethod
    def from_json(cls, data: dict[str, Any]) -> "SyncRequest":
        return cls(
            mode=data.get("mode", "all_new"),
            ids=tuple(int(i) for i in data.get("ids") or ()),
            labels=tuple(data.get("labels") or ()),
            since=from_rfc3339(data.get("since")),
            until=from_rfc3339(data.get("until")),
            limit=int(data.get("limit", 20)),
            state=data.get("state", "open"),
        )


class Transport(Protocol):
    def get(self, url: str, params: dict[str, str] | None = None) -> fixturerepo.Response: ...


class HttpTransport:
    """Real HTTP transport with the crawl user-agent and a per-fetch timeout."""

    def __init__(self, timeout: float = FETCH_TIMEOUT) -> None:
        self._session = requests.Session()
        self._session.headers["User-Agent"] = USER_AGENT
        self._timeout = timeout

    def get(self, url: str, params: dict[str, str] | None = None) -> fixturerepo.Response:
        try:
            resp = self._session.get(url, params=params or {}, timeout=self._timeout)
        except requests.RequestException as exc:
            return fixturerepo.Response(599, f"transport error: {exc}")
        return fixturerepo.Response(resp.status_code, resp.text, dict(resp.headers))


class DirectoryTransport:
    """Offline transport resolving every URL against a fixture directory."""

    def __init__(self, root: str, faults: fixturerepo.FaultPlan | None = None) -> None:
        self.repo = fixturerepo.FixtureRepo(root, faults)

    def get(self, url: str, params: dict[str, str] | None = None) -> fixturerepo.Response:
        parts = urlsplit(url)
        path = parts.path
        if path.startswith(fixturerepo.API_PREFIX) or path.startswith("/raw/"):
            return self.repo.resolve_api(path, params)
        if parts.netloc.startswith("api.") and path.startswith("/repos"):
            return self.repo.resolve_api(path, params)
        if parts.netloc == "raw.githubusercontent.com":
            return self.repo.resolve_api("/raw" + path, params)
        return self.repo.resolve_external(url)


class TokenBucket:
    """Global in-process budget shared by all hosting fetches."""

    def __init__(self, capacity: int = 20, refill_per_second: float = 20.0) -> None:
        self.capacity = capacity
        self.refill = refill_per_second
        self._tokens = float(capacity)
        self._stamp = time.monotonic()
        self._lock = threading.Lock()

    def acquire(self) -> None:
        while True:
            with self._lock:
                now = time.monotonic()
                self._tokens = min(self.capacity, self._tokens + (now - self._stamp) * self.refill)
                self._stamp = now
                if self._tokens >= 1:
                    self._tokens -= 1
                    return
                wait = (1 - self._tokens) / self.refill
            time.sleep(wait)


def parse_repo_url(url: str) -> tuple[str, str, str, str]:
    """Split a repository URL into (scheme, host, owner, name)."""
    parts = urlsplit(url.strip())
    if parts.scheme not in ("http", "https") or not parts.netloc:
        raise MalformedUrl(f"not a repository URL: {url!r}")
    segments = [s for s in parts.path.split("/") if s]
    if len(segments) < 2:
        raise MalformedUrl(f"repository URL needs /owner/name: {url!r}")
    owner, name = segments[0], segments[1]
    if name.endswith(".git"):
        name = name[: -len(".git")]
    if not owner or not name:
        raise MalformedUrl(f"repository URL needs /owner/name: {url!r}")
    return parts.scheme, parts.netloc, owner, name


def api_base(scheme: str, host: str) -> str:
    if host == "github.com":
        return "https://api.github.com"
    return f"{scheme}://{host}{fixturerepo.API_PREFIX}"


def raw_base(scheme: str, host: str) -> str:
    if host == "github.com":
        return "https://raw.githubusercontent.com"
    return f"{scheme}://{host}/raw"


class HostingClient:
    """Stateless issue-tracker client; rate budget and backoff are shared."""

    def __init__(
        self,
        transport: Transport,
        bucket: TokenBucket | None = None,
        sleeper: Callable[[float], None] = time.sleep,
    ) -> None:
        self.transport = transport
        self.bucket = bucket or TokenBucket()
        self.sleep = sleeper
        self._scheme_by_host: dict[str, str] = {}

    # -- plumbing -------------------------------------------------------------

    def _get(self, url: str, params: dict[str, str] | None = None) -> fixturerepo.Response:
        backoff = 0.5
        for attempt in range(MAX_RATE_RETRIES + 1):
            self.bucket.acquire()
            resp = self.transport.get(url, params)
            if resp.status != 429:
                return resp
            if attempt == MAX_RATE_RETRIES:
                break
            retry_after = resp.headers.get("Retry-After")
            delay = float(retry_after) if retry_after else backoff
            self.sleep(delay)
            backoff *= 2
        raise RateLimited(f"rate limit exhausted for {url}", retry_after=None)

    def _api(self, ref_or_url: "RepositoryRef | str") -> tuple[str, str, str, str]:
        if isinstance(ref_or_url, str):
            scheme, host, owner, name = parse_repo_url(ref_or_url)
        else:
            host, owner, name = ref_or_url.host, ref_or_url.owner, ref_or_url.name
            scheme = self._scheme_by_host.get(host, "https")
        self._scheme_by_host[host] = scheme
        return scheme, host, owner, name

    # -- operations ------------------------------------------------------------

    def fetch_repo(self, url: str) -> RepositoryRef:
        scheme, host, owner, name = self._api(url)
        resp = self._get(f"{api_base(scheme, host)}/repos/{owner}/{name}")
        if resp.status == 404:
            raise NotFound(f"repository {owner}/{name} not found")
        if resp.status != 200:
            raise RepoPersonaError(f"repository fetch failed with HTTP {resp.status}")
        meta = resp.json()
        return RepositoryRef(
            host=host,
            owner=owner,
            name=name,
            stars=int(meta.get("stargazers_count", 0)),
            forks=int(meta.get("forks_count", 0)),
            open_issue_count=int(meta.get("open_issues_count", 0)),
            default_branch=meta.get("default_branch", "main"),
        )

    def fetch_readme(self, ref: RepositoryRef) -> ResourceDocument:
        scheme = self._scheme_by_host.get(ref.host, "https")
        resp = self._get(f"{api_base(scheme, ref.host)}/repos/{ref.owner}/{ref.name}/readme")
        if resp.status == 404:
            raise NoReadme(f"{ref.full_name} has no README")
        if resp.status != 200:
            raise RepoPersonaError(f"readme fetch failed with HTTP {resp.status}")
        payload = resp.json()
        content = payload.get("content", "")
        if payload.get("encoding") == "base64":
            text = base64.b64decode(content).decode("utf-8", errors="replace")
        else:
            text = content
        return ResourceDocument(
            source_kind="readme",
            locator=payload.get("path", "README.md"),
            content_text=text,
            priority=5,
        )

    def fetch_issues(self, ref: RepositoryRef, request: SyncRequest) -> list[IssueRecord]:
        scheme = self._scheme_by_host.get(ref.host, "https")
        base = f"{api_base(scheme, ref.host)}/repos/{ref.owner}/{ref.name}/issues"

        if request.mode == "by_ids":
            records = []
            for number in request.ids:
                resp = self._get(f"{base}/{number}")
                if resp.status == 404:
                    raise NotFound(f"issue #{number} not found in {ref.full_name}")
                if resp.status != 200:
                    raise RepoPersonaError(f"issue fetch failed with HTTP {resp.status}")
                records.append(_issue_from_api(resp.json()))
            records.sort(key=lambda r: r.created_at, reverse=True)
            return records[: request.limit]

        params: dict[str, str] = {"state": request.state}
        if request.mode == "by_labels":
            params["labels"] = ",".join(request.labels)
        if request.since is not None:
            params["since"] = to_rfc3339(request.since)

        records = []
        page = 1
        while len(records) < request.limit:
            page_params = dict(params, per_page="30", page=str(page))
            resp = self._get(base, page_params)
            if resp.status == 404:
                raise NotFound(f"repository {ref.full_name} not found")
            if resp.status != 200:
                raise RepoPersonaError(f"issue list failed with HTTP {resp.status}")
            batch = resp.json()
            if not batch:
                break
            for raw in batch:
                record = _issue_from_api(raw)
                if request.since is not None:
                    # all_new means created strictly after the last sync;
                    # an explicit date range includes its endpoints.
                    if request.mode == "by_date_range":
                        if record.created_at < request.since:
                            continue
                    elif record.created_at <= request.since:
                        continue
                if request.until is not None and record.created_at > request.until:
                    continue
                records.append(record)
            if len(batch) < 30:
                break
            page += 1
        records.sort(key=lambda r: r.created_at, reverse=True)
        return records[: request.limit]

    def fetch_raw(self, ref: RepositoryRef, relpath: str) -> fixturerepo.Response:
        scheme = self._scheme_by_host.get(ref.host, "https")
        url = f"{raw_base(scheme, ref.host)}/{ref.owner}/{ref.name}/{ref.default_branch}/{relpath.lstrip('/')}"
        return self._get(url)

    def fetch_url(self, url: str) -> fixturerepo.Response:
        return self._get(url)


def _issue_from_api(raw: dict[str, Any]) -> IssueRecord:
    labels = tuple(fixturerepo.label_name(l) for l in raw.get("labels", []))
    created = from_rfc3339(raw["created_at"]) or utcnow()
    return IssueRecord(
        number=int(raw["number"]),
        title=raw.get("title", ""),
        body=raw.get("body") or "",
        labels=labels,
        state=raw.get("state", "open"),
        created_at=created,
        updated_at=from_rfc3339(raw.get("updated_at")) or created,
        synced_at=utcnow(),
    )
