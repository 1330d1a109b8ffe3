"""Exception hierarchy shared across the package."""

from __future__ import annotations


class RepoPersonaError(Exception):
    """Base class for all errors raised by this package."""


class MalformedUrl(RepoPersonaError):
    """The given string is not a repository URL we can parse."""


class NotFound(RepoPersonaError):
    """The hosting service returned 404 for the requested resource."""


class NoReadme(NotFound):
    """The repository has no README; callers may degrade gracefully."""


class RateLimited(RepoPersonaError):
    """The hosting service rate limit was exhausted after retries."""

    def __init__(self, message: str, retry_after: float | None = None) -> None:
        super().__init__(message)
        self.retry_after = retry_after


class ProviderError(RepoPersonaError):
    """A completion or image provider failed after the retry policy."""


class ParseError(RepoPersonaError):
    """Provider output could not be parsed into the stage schema."""


class MissingPlaceholder(RepoPersonaError):
    """A prompt template placeholder was not supplied in the context."""


class EmptyCorpus(RepoPersonaError):
    """No resource content is available to analyze."""


class UnknownRepository(NotFound):
    """Repository id not present in the store."""


class UnknownPersona(NotFound):
    """Persona id not present in the store."""


class UnknownIssue(NotFound):
    """Issue number not present in the store."""


class UnknownJob(NotFound):
    """Job id not present in the orchestrator."""


class InvalidPersona(RepoPersonaError):
    """Persona fields violate validation rules."""

    def __init__(self, violations: list[str]) -> None:
        super().__init__("; ".join(violations))
        self.violations = violations


class InvalidPatch(InvalidPersona):
    """An edit patch would leave the persona invalid or touches frozen fields."""


class FewerThanTwo(RepoPersonaError):
    """A merge needs at least two distinct personas."""


class ConflictingRequest(RepoPersonaError):
    """The request contradicts current state (e.g. removing an absent association)."""


class InvalidParams(RepoPersonaError):
    """Job parameters are not valid for the requested job kind."""


class BusyRepository(RepoPersonaError):
    """Another generation job is already in flight for this repository."""


class StaleVersion(RepoPersonaError):
    """Optimistic-concurrency check failed: the entity changed since it was read."""
