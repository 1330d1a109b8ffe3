"""Small shared helpers: time, hashing, and text normalization."""

from __future__ import annotations

import hashlib
import json
import re
from datetime import datetime, timezone
from typing import Any

RFC3339 = "%Y-%m-%dT%H:%M:%SZ"

_WORD_RE = re.compile(r"[a-z0-9]+")

# Common English function words excluded from token-overlap heuristics.
STOPWORDS = frozenset(
    """a an and are as at be but by for from has have how in into is it its of on or
    that the their them they this to was when where which who will with would can
    cant cannot not no does did do you your our we i me my using use used via""".split()
)


def utcnow() -> datetime:
    return datetime.now(timezone.utc).replace(microsecond=0)


def to_rfc3339(dt: datetime | None) -> str | None:
    if dt is None:
        return None
    if dt.tzinfo is None:
        dt = dt.replace(tzinfo=timezone.utc)
    return dt.astimezone(timezone.utc).strftime(RFC3339)


def from_rfc3339(raw: str | None) -> datetime | None:
    if raw is None or raw == "":
        return None
    text = raw.replace("Z", "+00:00")
    dt = datetime.fromisoformat(text)
    if dt.tzinfo is None:
        dt = dt.replace(tzinfo=timezone.utc)
    return dt.astimezone(timezone.utc)


def stable_hash(value: Any, length: int = 16) -> str:
    """Deterministic hex digest of any JSON-representable value."""
    canonical = json.dumps(value, sort_keys=True, ensure_ascii=False, default=str)
    return hashlib.sha256(canonical.encode("utf-8")).hexdigest()[:length]


def tokenize(text: str) -> list[str]:
    """Lowercased alphanumeric tokens, function words and short tokens dropped."""
    out = []
    for tok in _WORD_RE.findall(text.lower()):
        if len(tok) < 3 or tok in STOPWORDS:
            continue
        out.append(tok)
    return out


def token_set(text: str) -> set[str]:
    return set(tokenize(text))


def slugify(text: str) -> str:
    return "-".join(_WORD_RE.findall(text.lower())) or "x"
