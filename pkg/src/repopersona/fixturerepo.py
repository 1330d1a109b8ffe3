"""Serve hosting-API responses from a directory of fixture files.

The same resolver backs two frontends: an in-process transport (zero network)
and a loopback HTTP server used by connector tests. Layout under the root:

    repos/{owner}__{name}/repo.json     repository metadata
    repos/{owner}__{name}/readme.md     README body (absent file means 404)
    repos/{owner}__{name}/issues.json   full issue list, any order
    repos/{owner}__{name}/raw/...       branch-relative raw content files
    external/{host}/{sanitized-path}    bodies for absolute external URLs
"""

from __future__ import annotations

import base64
import json
import re
import threading
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any
from urllib.parse import urlsplit

from .util import from_rfc3339

API_PREFIX = "/api/v3"

_SAFE_RE = re.compile(r"[^A-Za-z0-9._-]+")


@dataclass
class Response:
    status: int
    body: str
    headers: dict[str, str] = field(default_factory=dict)

    def json(self) -> Any:
        return json.loads(self.body)


def _json_response(payload: Any, status: int = 200) -> Response:
    return Response(status, json.dumps(payload), {"Content-Type": "application/json"})


def _error(status: int, message: str) -> Response:
    return _json_response({"message": message}, status)


def sanitize_external(url: str) -> str:
    """Relative fixture path for an absolute external URL."""
    parts = urlsplit(url)
    path = parts.path.strip("/")
    name = _SAFE_RE.sub("_", path) if path else "index.html"
    return f"external/{parts.netloc}/{name}"


@dataclass
class FaultPlan:
    """Mutable fault-injection switches consulted before fixture lookup."""

    readme_status: int | None = None
    rate_limit_hits: int = 0  # next N requests answer 429
    retry_after: float = 0.0
    fail_substrings: dict[str, int] = field(default_factory=dict)
    _lock: threading.Lock = field(default_factory=threading.Lock, repr=False)

    def check(self, path: str) -> Response | None:
        with self._lock:
            if self.rate_limit_hits > 0:
                self.rate_limit_hits -= 1
                headers = {"Retry-After": str(self.retry_after)} if self.retry_after else {}
                resp = _error(429, "rate limited")
                resp.headers.update(headers)
                return resp
        for fragment, status in self.fail_substrings.items():
            if fragment in path:
                return _error(status, f"injected failure for {fragment}")
        if self.readme_status and path.endswith("/readme"):
            return _error(self.readme_status, "readme fault")
        return None


class FixtureRepo:
    """Resolves hosting-API paths and external URLs against fixture files."""

    def __init__(self, root: str | Path, faults: FaultPlan | None = None) -> None:
        self.root = Path(root)
        self.faults = faults or FaultPlan()

    # -- api surface --------------------------------------------------------

    def resolve_api(self, path: str, params: dict[str, str] | None = None) -> Response:
        params = params or {}
        fault = self.faults.check(path)
        if fault is not None:
            return fault
        if path.startswith(API_PREFIX):
            path = path[len(API_PREFIX):]
        parts = [p for p in path.split("/") if p]
        if len(parts) >= 3 and parts[0] == "repos":
            owner, name = parts[1], parts[2]
            rest = parts[3:]
            repo_dir = self.root / "repos" / f"{owner}__{name}"
            if not repo_dir.is_dir():
                return _error(404, "repository not found")
            if not rest:
                return self._repo_meta(repo_dir, owner, name)
            if rest == ["readme"]:
                return self._readme(repo_dir)
            if rest == ["issues"]:
                return self._issues(repo_dir, params)
            if len(rest) == 2 and rest[0] == "issues":
                return self._issue(repo_dir, rest[1])
        if len(parts) >= 4 and parts[0] == "raw":
            owner, name = parts[1], parts[2]
            relpath = "/".join(parts[4:])  # parts[3] is the branch
            target = self.root / "repos" / f"{owner}__{name}" / "raw" / relpath
            if target.is_file():
                return Response(200, target.read_text(encoding="utf-8"))
            return _error(404, "raw content not found")
        return _error(404, "unknown path")

    def resolve_external(self, url: str) -> Response:
        fault = self.faults.check(url)
        if fault is not None:
            return fault
        target = self.root / sanitize_external(url)
        if target.is_file():
            return Response(200, target.read_text(encoding="utf-8"))
        return _error(404, "external page not found")

    def resolve_site(self, path: str) -> Response:
        """Server-local pages (used when external URLs point at the server)."""
        fault = self.faults.check(path)
        if fault is not None:
            return fault
        target = self.root / "site" / path.lstrip("/")
        if target.is_file():
            return Response(200, target.read_text(encoding="utf-8"))
        return _error(404, "page not found")

    # -- endpoint handlers ---------------------------------------------------

    def _repo_meta(self, repo_dir: Path, owner: str, name: str) -> Response:
        meta = json.loads((repo_dir / "repo.json").read_text(encoding="utf-8"))
        meta.setdefault("name", name)
        meta.setdefault("full_name", f"{owner}/{name}")
        return _json_response(meta)

    def _readme(self, repo_dir: Path) -> Response:
        # format-agnostic, like the real readme endpoint
        for candidate in ("readme.md", "readme.rst", "readme.txt"):
            readme = repo_dir / candidate
            if readme.is_file():
                break
        else:
            return _error(404, "no readme")
        name = "README" + readme.suffix
        return _json_response(
            {
                "name": name,
                "path": name,
                "encoding": "base64",
                "content": base64.b64encode(readme.read_bytes()).decode("ascii"),
            }
        )

    def _load_issues(self, repo_dir: Path) -> list[dict[str, Any]]:
        payload = json.loads((repo_dir / "issues.json").read_text(encoding="utf-8"))
        return payload["issues"] if isinstance(payload, dict) else payload

    def _issues(self, repo_dir: Path, params: dict[str, str]) -> Response:
        issues = self._load_issues(repo_dir)
        state = params.get("state", "open")
        if state != "all":
            issues = [i for i in issues if i.get("state", "open") == state]
        labels = [x for x in params.get("labels", "").split(",") if x]
        if labels:
            issues = [
                i
                for i in issues
                if set(labels) <= {label_name(l) for l in i.get("labels", [])}
            ]
        since = params.get("since")
        if since:
            cutoff = from_rfc3339(since)
            issues = [i for i in issues if from_rfc3339(i["created_at"]) >= cutoff]
        issues.sort(key=lambda i: i["created_at"], reverse=True)
        per_page = int(params.get("per_page", 30))
        page = int(params.get("page", 1))
        start = (page - 1) * per_page
        return _json_response(issues[start : start + per_page])

    def _issue(self, repo_dir: Path, number: str) -> Response:
        try:
            wanted = int(number)
        except ValueError:
            return _error(404, "bad issue number")
        for issue in self._load_issues(repo_dir):
            if issue["number"] == wanted:
                return _json_response(issue)
        return _error(404, "issue not found")


def label_name(label: Any) -> str:
    if isinstance(label, dict):
        return str(label.get("name", ""))
    return str(label)
