"""Loopback HTTP server speaking the hosting-API paths, backed by fixtures."""

from __future__ import annotations

import threading
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from urllib.parse import parse_qsl, urlsplit

from .fixturerepo import API_PREFIX, FaultPlan, FixtureRepo


class FixtureServer:
    """Serves a fixture directory over 127.0.0.1 for connector tests."""

    def __init__(self, root: str, faults: FaultPlan | None = None) -> None:
        self.repo = FixtureRepo(root, faults)
        self.faults = self.repo.faults
        repo = self.repo

        class Handler(BaseHTTPRequestHandler):
            def do_GET(self) -> None:  # noqa: N802 (http.server API)
                parts = urlsplit(self.path)
                params = dict(parse_qsl(parts.query))
                if parts.path.startswith(API_PREFIX) or parts.path.startswith("/raw/"):
                    result = repo.resolve_api(parts.path, params)
                else:
                    result = repo.resolve_site(parts.path)
                body = result.body.encode("utf-8")
                self.send_response(result.status)
                for key, value in result.headers.items():
                    self.send_header(key, value)
                self.send_header("Content-Length", str(len(body)))
                self.end_headers()
                self.wfile.write(body)

            def log_message(self, *args: object) -> None:
                pass

        self._server = ThreadingHTTPServer(("127.0.0.1", 0), Handler)
        self._thread = threading.Thread(target=self._server.serve_forever, daemon=True)

    @property
    def base_url(self) -> str:
        host, port = self._server.server_address[:2]
        return f"http://{host}:{port}"

    def repo_url(self, owner: str, name: str) -> str:
        return f"{self.base_url}/{owner}/{name}"

    def start(self) -> "FixtureServer":
        self._thread.start()
        return self

    def stop(self) -> None:
        self._server.shutdown()
        self._server.server_close()

    def __enter__(self) -> "FixtureServer":
        return self.start()

    def __exit__(self, *exc: object) -> None:
        self.stop()
