"""Durable storage of all domain records.

Entities live in one envelope table: kind + id + canonical JSON payload,
with a per-entity monotonically increasing version and a tombstone flag.
Writes are serialized per repository via in-process locks, which is the
single-writer discipline the engines rely on.
"""

from __future__ import annotations

import json
import sqlite3
import threading
from collections import defaultdict
from contextlib import contextmanager
from dataclasses import dataclass, field
from datetime import datetime
from typing import Any, Iterator

from .errors import StaleVersion, UnknownRepository
from .model import IssuePersonaMapping, IssueRecord, Persona, RepositoryRef, ResourceCorpus
from .providers import ProviderCall
from .util import from_rfc3339, stable_hash, to_rfc3339, utcnow

_SCHEMA = """
CREATE TABLE IF NOT EXISTS records (
    kind TEXT NOT NULL,
    entity_id TEXT NOT NULL,
    repo_id TEXT NOT NULL DEFAULT '',
    version INTEGER NOT NULL,
    tombstone INTEGER NOT NULL DEFAULT 0,
    payload TEXT NOT NULL,
    updated_at TEXT NOT NULL,
    PRIMARY KEY (kind, entity_id)
);
CREATE INDEX IF NOT EXISTS records_by_repo ON records (kind, repo_id);
CREATE TABLE IF NOT EXISTS provider_calls (
    seq INTEGER PRIMARY KEY AUTOINCREMENT,
    job_id TEXT,
    stage TEXT NOT NULL,
    call_type TEXT NOT NULL,
    input_tokens INTEGER NOT NULL,
    output_tokens INTEGER NOT NULL,
    succeeded INTEGER NOT NULL,
    latency_s REAL NOT NULL,
    at TEXT NOT NULL
);
"""


@dataclass
class Envelope:
    kind: str
    entity_id: str
    repo_id: str
    version: int
    tombstone: bool
    payload: dict[str, Any]


@dataclass
class RepoRecord:
    """A tracked repository: url, metadata snapshot, and sync bookkeeping."""

    id: str
    url: str
    ref: RepositoryRef
    created_at: datetime = field(default_factory=utcnow)
    last_synced_at: datetime | None = None

    def to_json(self) -> dict[str, Any]:
        return {
            "id": self.id,
            "url": self.url,
            "ref": self.ref.to_json(),
            "created_at": to_rfc3339(self.created_at),
            "last_synced_at": to_rfc3339(self.last_synced_at),
        }

    @classmethod
    def from_json(cls, data: dict[str, Any]) -> "RepoRecord":
        return cls(
            id=data["id"],
            url=data["url"],
            ref=RepositoryRef.from_json(data["ref"]),
            created_at=from_rfc3339(data.get("created_at")) or utcnow(),
            last_synced_at=from_rfc3339(data.get("last_synced_at")),
        )


def repo_id_for(ref: RepositoryRef) -> str:
    return "r-" + stable_hash([ref.host, ref.owner, ref.name], 10)


class Store:
    def __init__(self, path: str = ":memory:") -> None:
        self._conn = sqlite3.connect(path, check_same_thread=False)
        self._conn.execute("PRAGMA journal_mode=WAL")
        self._db_lock = threading.RLock()
        self._repo_locks: dict[str, threading.RLock] = defaultdict(threading.RLock)
        with self._db_lock:
            self._conn.executescript(_SCHEMA)
            self._conn.commit()

    def close(self) -> None:
        with self._db_lock:
            self._conn.close()

    @contextmanager
    def repo_lock(self, repo_id: str) -> Iterator[None]:
        """Single-writer section for one repository."""
        with self._db_lock:
            lock = self._repo_locks[repo_id]
        with lock:
            yield

    # -- envelope primitives -------------------------------------------------

    def put(
        self,
        kind: str,
        entity_id: str,
        payload: dict[str, Any],
        *,
        repo_id: str = "",
        expected_version: int | None = None,
        tombstone: bool | None = None,
    ) -> int:
        with self._db_lock:
            row = self._conn.execute(
                "SELECT version, tombstone FROM records WHERE kind=? AND entity_id=?",
                (kind, entity_id),
            ).fetchone()
            current = row[0] if row else 0
            if expected_version is not None and current != expected_version:
                raise StaleVersion(
                    f"{kind} {entity_id}: expected version {expected_version}, have {current}"
                )
            flag = tombstone if tombstone is not None else bool(row[1]) if row else False
            version = current + 1
            self._conn.execute(
                "INSERT INTO records (kind, entity_id, repo_id, version, tombstone, payload, updated_at)"
                " VALUES (?,?,?,?,?,?,?)"
                " ON CONFLICT(kind, entity_id) DO UPDATE SET"
                " repo_id=excluded.repo_id, version=excluded.version,"
                " tombstone=excluded.tombstone, payload=excluded.payload,"
                " updated_at=excluded.updated_at",
                (
                    kind,
                    entity_id,
                    repo_id,
                    version,
                    int(flag),
                    json.dumps(payload, ensure_ascii=False),
                    to_rfc3339(utcnow()),
                ),
            )
            self._conn.commit()
            return version

    def get(self, kind: str, entity_id: str, *, include_tombstoned: bool = False) -> Envelope | None:
        with self._db_lock:
            row = self._conn.execute(
                "SELECT repo_id, version, tombstone, payload FROM records"
                " WHERE kind=? AND entity_id=?",
                (kind, entity_id),
            ).fetchone()
        if row is None:
            return None
        envelope = Envelope(kind, entity_id, row[0], row[1], bool(row[2]), json.loads(row[3]))
        if envelope.tombstone and not include_tombstoned:
            return None
        return envelope

    def list(
        self, kind: str, *, repo_id: str | None = None, include_tombstoned: bool = False
    ) -> list[Envelope]:
        query = "SELECT entity_id, repo_id, version, tombstone, payload FROM records WHERE kind=?"
        args: list[Any] = [kind]
        if repo_id is not None:
            query += " AND repo_id=?"
            args.append(repo_id)
        with self._db_lock:
            rows = self._conn.execute(query, args).fetchall()
        envelopes = [
            Envelope(kind, r[0], r[1], r[2], bool(r[3]), json.loads(r[4])) for r in rows
        ]
        if not include_tombstoned:
            envelopes = [e for e in envelopes if not e.tombstone]
        return envelopes

    def set_tombstone(self, kind: str, entity_id: str, flag: bool = True) -> None:
        envelope = self.get(kind, entity_id, include_tombstoned=True)
        if envelope is None:
            return
        self.put(
            kind,
            entity_id,
            envelope.payload,
            repo_id=envelope.repo_id,
            tombstone=flag,
        )

    # -- repositories ----------------------------------------------------------

    def save_repo(self, record: RepoRecord) -> None:
        self.put("repo", record.id, record.to_json(), repo_id=record.id)

    def get_repo(self, repo_id: str) -> RepoRecord:
        envelope = self.get("repo", repo_id)
        if envelope is None:
            raise UnknownRepository(f"repository {repo_id} not found")
        return RepoRecord.from_json(envelope.payload)

    def find_repo(self, owner: str, name: str) -> RepoRecord | None:
        for envelope in self.list("repo"):
            record = RepoRecord.from_json(envelope.payload)
            if record.ref.owner == owner and record.ref.name == name:
                return record
        return None

    def list_repos(self) -> list[RepoRecord]:
        return [RepoRecord.from_json(e.payload) for e in self.list("repo")]

    # -- personas ----------------------------------------------------------------

    def save_persona(
        self, repo_id: str, persona: Persona, *, expected_version: int | None = None
    ) -> int:
        return self.put(
            "persona",
            persona.id,
            persona.to_json(),
            repo_id=repo_id,
            expected_version=expected_version,
        )

    def get_persona(self, persona_id: str, *, include_archived: bool = False) -> tuple[Persona, Envelope] | None:
        envelope = self.get("persona", persona_id, include_tombstoned=include_archived)
        if envelope is None:
            return None
        return Persona.from_json(envelope.payload), envelope

    def personas(self, repo_id: str, *, include_archived: bool = False) -> list[Persona]:
        envelopes = self.list("persona", repo_id=repo_id, include_tombstoned=include_archived)
        personas = [Persona.from_json(e.payload) for e in envelopes]
        personas.sort(key=lambda p: (p.created_at, p.id))
        return personas

    def archive_persona(self, persona_id: str) -> None:
        self.set_tombstone("persona", persona_id, True)

    # -- issues -------------------------------------------------------------------

    @staticmethod
    def _issue_key(repo_id: str, number: int) -> str:
        return f"{repo_id}#{number}"

    def save_issue(self, repo_id: str, issue: IssueRecord) -> None:
        self.put("issue", self._issue_key(repo_id, issue.number), issue.to_json(), repo_id=repo_id)

    def get_issue(self, repo_id: str, number: int) -> IssueRecord | None:
        envelope = self.get("issue", self._issue_key(repo_id, number))
        return IssueRecord.from_json(envelope.payload) if envelope else None

    def issues(self, repo_id: str) -> list[IssueRecord]:
        records = [IssueRecord.from_json(e.payload) for e in self.list("issue", repo_id=repo_id)]
        records.sort(key=lambda i: (i.created_at, i.number), reverse=True)
        return records

    # -- mappings -------------------------------------------------------------------

    def save_mapping(self, repo_id: str, mapping: IssuePersonaMapping) -> None:
        self.put(
            "mapping",
            self._issue_key(repo_id, mapping.issue_number),
            mapping.to_json(),
            repo_id=repo_id,
        )

    def mapping_for(self, repo_id: str, number: int) -> IssuePersonaMapping | None:
        envelope = self.get("mapping", self._issue_key(repo_id, number))
        return IssuePersonaMapping.from_json(envelope.payload) if envelope else None

    def mappings(self, repo_id: str) -> dict[int, IssuePersonaMapping]:
        out = {}
        for envelope in self.list("mapping", repo_id=repo_id):
            mapping = IssuePersonaMapping.from_json(envelope.payload)
            out[mapping.issue_number] = mapping
        return out

    # -- corpus ----------------------------------------------------------------------

    def save_corpus(self, repo_id: str, corpus: ResourceCorpus) -> None:
        self.put("corpus", repo_id, corpus.to_json(), repo_id=repo_id)

    def get_corpus(self, repo_id: str) -> ResourceCorpus | None:
        envelope = self.get("corpus", repo_id)
        return ResourceCorpus.from_json(envelope.payload) if envelope else None

    # -- jobs -------------------------------------------------------------------------

    def save_job(self, repo_id: str, job_id: str, payload: dict[str, Any]) -> None:
        self.put("job", job_id, payload, repo_id=repo_id)

    def get_job(self, job_id: str) -> dict[str, Any] | None:
        envelope = self.get("job", job_id)
        return envelope.payload if envelope else None

    def jobs(self, repo_id: str | None = None) -> list[dict[str, Any]]:
        return [e.payload for e in self.list("job", repo_id=repo_id)]

    # -- provider calls -----------------------------------------------------------------

    def record_call(self, call: ProviderCall) -> None:
        with self._db_lock:
            self._conn.execute(
                "INSERT INTO provider_calls"
                " (job_id, stage, call_type, input_tokens, output_tokens, succeeded, latency_s, at)"
                " VALUES (?,?,?,?,?,?,?,?)",
                (
                    call.job_id,
                    call.stage,
                    call.call_type,
                    call.input_tokens,
                    call.output_tokens,
                    int(call.succeeded),
                    call.latency_s,
                    to_rfc3339(call.at),
                ),
            )
            self._conn.commit()

    def call_counts(self, job_id: str | None = None) -> dict[str, int]:
        query = "SELECT call_type, COUNT(*) FROM provider_calls"
        args: list[Any] = []
        if job_id is not None:
            query += " WHERE job_id=?"
            args.append(job_id)
        query += " GROUP BY call_type"
        with self._db_lock:
            rows = self._conn.execute(query, args).fetchall()
        return {kind: count for kind, count in rows}
