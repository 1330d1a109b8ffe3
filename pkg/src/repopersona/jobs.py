"""Asynchronous job execution with staged progress and polling snapshots."""

from __future__ import annotations

import threading
import uuid
from queue import SimpleQueue
from typing import Any, Callable

from .config import Config
from .errors import BusyRepository, InvalidParams, RepoPersonaError, UnknownJob
from .store import Store
from .util import to_rfc3339, utcnow

JOB_KINDS = ("generation", "mapping", "sync")
TERMINAL_STAGES = ("done", "failed")

Executor = Callable[["JobContext"], dict[str, Any]]
Validator = Callable[[dict[str, Any]], None]


class JobContext:
    """Handle the executor uses to report staged progress."""

    def __init__(self, runner: "JobRunner", job_id: str) -> None:
        self.runner = runner
        self.job_id = job_id
        self.warnings: list[str] = []

    @property
    def params(self) -> dict[str, Any]:
        return self.runner._job(self.job_id)["params"]

    def enter_stage(self, stage: str) -> None:
        band = self.runner.config.stage_bands.get(stage)
        percent = band[0] if band else None
        self.runner._update(self.job_id, stage=stage, percent=percent)

    def complete_stage(self, stage: str) -> None:
        band = self.runner.config.stage_bands.get(stage)
        if band:
            self.runner._update(self.job_id, percent=band[1])

    def progress(self, stage: str, fraction: float) -> None:
        band = self.runner.config.stage_bands.get(stage)
        if band:
            lo, hi = band
            self.runner._update(self.job_id, percent=int(lo + (hi - lo) * fraction))
        else:
            self.runner._update(self.job_id, percent=int(100 * fraction))

    def set_percent(self, percent: int) -> None:
        self.runner._update(self.job_id, percent=percent)

    def warn(self, message: str) -> None:
        self.warnings.append(message)


class JobRunner:
    """Thread-pool execution of generation, sync, and mapping jobs.

    Snapshots are plain dicts; percent never decreases over a job's lifetime
    and terminal snapshots never change. Jobs survive restart as
    queued-or-failed: a queued job re-runs, an interrupted one fails.
    """

    def __init__(self, store: Store, config: Config | None = None, *, workers: int = 2) -> None:
        self.store = store
        self.config = config or Config()
        self._jobs: dict[str, dict[str, Any]] = {}
        self._executors: dict[str, tuple[Executor, Validator | None]] = {}
        self._queue: SimpleQueue[str | None] = SimpleQueue()
        self._lock = threading.RLock()
        self._workers = [
            threading.Thread(target=self._worker, daemon=True) for _ in range(workers)
        ]
        self._started = False

    # -- lifecycle ---------------------------------------------------------------

    def register(self, kind: str, run: Executor, validate: Validator | None = None) -> None:
        if kind not in JOB_KINDS:
            raise RepoPersonaError(f"unknown job kind {kind!r}")
        self._executors[kind] = (run, validate)

    def start(self) -> "JobRunner":
        if not self._started:
            self._started = True
            for thread in self._workers:
                thread.start()
        return self

    def shutdown(self, wait: bool = True, timeout: float = 10.0) -> None:
        """Flush queued work and stop the workers (they are daemons anyway)."""
        if not self._started:
            return
        for _ in self._workers:
            self._queue.put(None)
        if wait:
            for thread in self._workers:
                thread.join(timeout=timeout)

    def recover(self) -> None:
        """Re-queue jobs that never started; fail the ones a crash interrupted."""
        for payload in self.store.jobs():
            stage = payload.get("stage")
            if stage in TERMINAL_STAGES:
                with self._lock:
                    self._jobs.setdefault(payload["job_id"], payload)
                continue
            with self._lock:
                self._jobs[payload["job_id"]] = payload
            if stage == "queued":
                self._queue.put(payload["job_id"])
            else:
                self._finish(payload["job_id"], error="interrupted by restart")

    # -- public API -----------------------------------------------------------------

    def submit(self, kind: str, params: dict[str, Any]) -> str:
        """Enqueue a job and return its id immediately."""
        if kind not in self._executors:
            raise InvalidParams(f"no executor for job kind {kind!r}")
        _run, validate = self._executors[kind]
        if validate is not None:
            validate(params)
        repo_id = params.get("repo_id", "")
        job_id = "j-" + uuid.uuid4().hex[:12]
        record = {
            "job_id": job_id,
            "kind": kind,
            "repo_id": repo_id,
            "params": params,
            "stage": "queued",
            "percent": 0,
            "error": None,
            "stage_history": ["queued"],
            "warnings": [],
            "result": None,
            "created_at": to_rfc3339(utcnow()),
            "started_at": None,
            "finished_at": None,
        }
        with self._lock:
            if kind == "generation" and self._generation_in_flight(repo_id):
                raise BusyRepository(f"a generation job is already running for {repo_id}")
            self._jobs[job_id] = record
            self._persist(record)
        self._queue.put(job_id)
        return job_id

    def status(self, job_id: str) -> dict[str, Any]:
        record = self._job(job_id)
        return {
            "job_id": record["job_id"],
            "kind": record["kind"],
            "repo_id": record["repo_id"],
            "stage": record["stage"],
            "percent": record["percent"],
            "error": record["error"],
            "warnings": list(record["warnings"]),
            "result": record["result"],
            "stage_history": list(record["stage_history"]),
            "started_at": record["started_at"],
            "finished_at": record["finished_at"],
        }

    def wait(self, job_id: str, *, timeout: float = 30.0, poll: float = 0.02) -> dict[str, Any]:
        """Block until the job reaches a terminal stage (testing/CLI helper)."""
        import time

        deadline = time.monotonic() + timeout
        while time.monotonic() < deadline:
            snapshot = self.status(job_id)
            if snapshot["stage"] in TERMINAL_STAGES:
                return snapshot
            time.sleep(poll)
        raise RepoPersonaError(f"job {job_id} did not finish within {timeout}s")

    # -- internals ---------------------------------------------------------------------

    def _persist(self, record: dict[str, Any]) -> None:
        import sqlite3

        try:
            self.store.save_job(record["repo_id"], record["job_id"], record)
        except sqlite3.ProgrammingError:
            pass  # store already closed during shutdown; memory copy stays correct

    def _generation_in_flight(self, repo_id: str) -> bool:
        for record in self._jobs.values():
            if (
                record["kind"] == "generation"
                and record["repo_id"] == repo_id
                and record["stage"] not in TERMINAL_STAGES
            ):
                return True
        return False

    def _job(self, job_id: str) -> dict[str, Any]:
        with self._lock:
            record = self._jobs.get(job_id)
        if record is None:
            payload = self.store.get_job(job_id)
            if payload is None:
                raise UnknownJob(f"job {job_id} not found")
            with self._lock:
                record = self._jobs.setdefault(job_id, payload)
        return record

    def _update(
        self,
        job_id: str,
        *,
        stage: str | None = None,
        percent: int | None = None,
        error: str | None = None,
    ) -> None:
        with self._lock:
            record = self._job(job_id)
            if record["stage"] in TERMINAL_STAGES:
                return  # terminal snapshots are immutable
            if stage is not None and stage != record["stage"]:
                record["stage"] = stage
                record["stage_history"].append(stage)
            if percent is not None:
                record["percent"] = max(record["percent"], min(100, percent))
            if error is not None:
                record["error"] = error
            self._persist(record)

    def _finish(
        self, job_id: str, *, result: dict[str, Any] | None = None, error: str | None = None
    ) -> None:
        with self._lock:
            record = self._job(job_id)
            if record["stage"] in TERMINAL_STAGES:
                return
            if error is None:
                record["stage"] = "done"
                record["percent"] = 100
                record["result"] = result
            else:
                record["stage"] = "failed"
                record["error"] = error
            record["stage_history"].append(record["stage"])
            record["finished_at"] = to_rfc3339(utcnow())
            self._persist(record)

    def _worker(self) -> None:
        while True:
            job_id = self._queue.get()
            if job_id is None:
                return
            try:
                record = self._job(job_id)
            except UnknownJob:
                continue
            if record["stage"] in TERMINAL_STAGES:
                continue
            with self._lock:
                record["started_at"] = to_rfc3339(utcnow())
            run, _validate = self._executors[record["kind"]]
            context = JobContext(self, job_id)
            try:
                result = run(context)
            except RepoPersonaError as exc:
                self._finish(job_id, error=f"{type(exc).__name__}: {exc}")
            except Exception as exc:  # defensive: jobs must always terminate
                self._finish(job_id, error=f"unexpected error: {exc}")
            else:
                with self._lock:
                    record["warnings"].extend(context.warnings)
                self._finish(job_id, result=result)
